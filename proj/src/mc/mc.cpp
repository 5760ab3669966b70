#include "mc/mc.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/random/normal_distribution.hpp>

#include <algorithm>
#include <atomic>
#include <cfloat>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "common/errors.hpp"

namespace scop::mc {

namespace {

using Engine = std::mt19937_64;

struct Dynamics {
    double rbar;
    double sigma;
    double T;
    double dt;
    int n_steps;
};

Dynamics prepare(const model::PlanSpec& plan, const model::MarketParams& market, double u0,
                 const SimConfig& config) {
    model::validate(plan);
    if (!(market.equity_vol >= 0.0) || market.equity_fraction < 0.0 || market.equity_fraction > 1.0) {
        throw ValidationError("mc: market parameters out of range");
    }
    if (!(u0 >= 0.0)) throw DomainError("mc: u0 must be nonnegative");
    if (config.n_paths < 1 || config.steps_per_year < 1 || config.batch_size < 1) {
        throw ValidationError("mc: path, step and batch counts must be positive");
    }
    Dynamics d;
    d.rbar = market.risk_free + market.equity_fraction * (market.equity_mean - market.risk_free);
    d.sigma = market.equity_fraction * market.equity_vol;
    d.T = plan.horizon_years;
    d.n_steps = std::max(1, static_cast<int>(std::lround(d.T * config.steps_per_year)));
    d.dt = d.T / d.n_steps;
    return d;
}

// Runs `batch_kernel(engine, batch_paths) -> hits` over fixed-size batches,
// each with its own substream, spread across threads.
template <typename Kernel>
TailEstimate run_batches(const SimConfig& config, int n_steps, Kernel batch_kernel) {
    const std::int64_t batch = config.batch_size;
    const std::int64_t n_batches = (config.n_paths + batch - 1) / batch;
    std::vector<std::int64_t> hits(static_cast<std::size_t>(n_batches), 0);
    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (std::int64_t b = next++; b < n_batches; b = next++) {
            const std::uint64_t s = substream_seed(config.seed, static_cast<std::uint64_t>(b));
            // mt19937_64 is fully specified by the standard, so a seed names
            // the same stream in every process and on every platform.
            Engine engine(s);
            const std::int64_t paths = std::min(batch, config.n_paths - b * batch);
            hits[static_cast<std::size_t>(b)] = batch_kernel(engine, static_cast<std::size_t>(paths));
        }
    };
    const int threads = static_cast<int>(std::clamp<std::int64_t>(config.threads, 1, n_batches));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    TailEstimate est;
    est.n_paths = config.n_paths;
    est.n_steps = n_steps;
    for (auto h : hits) est.hits += h;
    est.p_hat = static_cast<double>(est.hits) / static_cast<double>(est.n_paths);
    est.std_error = std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(est.n_paths));
    return est;
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

TailEstimate simulate_tail(const model::PlanSpec& plan, const model::MarketParams& market,
                           double u0, double xi, const SimConfig& config) {
    const Dynamics d = prepare(plan, market, u0, config);
    const double growth = 1.0 + d.rbar * d.dt;
    const double vol = d.sigma * std::sqrt(d.dt);
    std::vector<double> contribution(static_cast<std::size_t>(d.n_steps));
    for (int k = 0; k < d.n_steps; ++k) contribution[k] = u0 * std::exp(xi * k * d.dt) * d.dt;
    const double pi0 = plan.initial_wealth;
    const double target = plan.target_wealth;

    auto kernel = [&](Engine& engine, std::size_t paths) {
        boost::random::normal_distribution<double> normal;
        std::vector<double> pi(paths, pi0);
        std::vector<double> z(paths);
        for (int k = 0; k < d.n_steps; ++k) {
            for (auto& v : z) v = normal(engine);
            const double c = contribution[k];
            for (std::size_t i = 0; i < paths; ++i) {
                const double next = pi[i] * (growth + vol * z[i]) + c;
                pi[i] = std::max(next, DBL_EPSILON);
            }
        }
        std::int64_t hits = 0;
        for (double v : pi) hits += v < target;
        return hits;
    };
    return run_batches(config, d.n_steps, kernel);
}

TailEstimate simulate_tail_verhulst(const model::PlanSpec& plan, const model::MarketParams& market,
                                    double u0, double xi, const SimConfig& config) {
    const Dynamics d = prepare(plan, market, u0, config);
    if (!(u0 > 0.0)) throw DomainError("mc: Verhulst coordinates need u0 > 0");
    if (!(d.sigma > 0.0)) throw ValidationError("mc: Verhulst coordinates need sigma > 0");
    const double s2 = d.sigma * d.sigma;
    const double v0 = 2.0 * u0 / (s2 * plan.initial_wealth);
    const double v_hat = 2.0 * u0 * std::exp(xi * d.T) / (s2 * plan.target_wealth);
    const double a = (xi - d.rbar + s2) * d.dt;
    const double b = 0.5 * s2 * d.dt;
    const double vol = d.sigma * std::sqrt(d.dt);

    auto kernel = [&](Engine& engine, std::size_t paths) {
        boost::random::normal_distribution<double> normal;
        std::vector<double> v(paths, v0);
        std::vector<double> z(paths);
        for (int k = 0; k < d.n_steps; ++k) {
            for (auto& x : z) x = normal(engine);
            for (std::size_t i = 0; i < paths; ++i) {
                // dv = v (xi - rbar + sigma^2 - sigma^2 v / 2) dt - sigma v dW
                const double next = v[i] * (1.0 + a - b * v[i] - vol * z[i]);
                v[i] = std::max(next, DBL_EPSILON);
            }
        }
        std::int64_t hits = 0;
        for (double x : v) hits += x >= v_hat;
        return hits;
    };
    return run_batches(config, d.n_steps, kernel);
}

TailEstimate simulate(const model::PlanSpec& plan, const model::MarketParams& market, double u0,
                      double xi, const SimConfig& config) {
    return config.coordinate == Coordinate::wealth
               ? simulate_tail(plan, market, u0, xi, config)
               : simulate_tail_verhulst(plan, market, u0, xi, config);
}

double deterministic_terminal_wealth(const model::PlanSpec& plan, const model::MarketParams& market,
                                     double u0, double xi) {
    const double rbar = market.risk_free + market.equity_fraction * (market.equity_mean - market.risk_free);
    const double T = plan.horizon_years;
    const double growth = std::exp(rbar * T);
    const double gap = rbar - xi;
    const double annuity = std::fabs(gap) < 1e-12 ? T * growth : (growth - std::exp(xi * T)) / gap;
    return plan.initial_wealth * growth + u0 * annuity;
}

double gbm_tail_probability(const model::PlanSpec& plan, const model::MarketParams& market) {
    const double rbar = market.risk_free + market.equity_fraction * (market.equity_mean - market.risk_free);
    const double sigma = market.equity_fraction * market.equity_vol;
    const double T = plan.horizon_years;
    const double z = (std::log(plan.target_wealth / plan.initial_wealth) - (rbar - 0.5 * sigma * sigma) * T) /
                     (sigma * std::sqrt(T));
    return boost::math::cdf(boost::math::normal_distribution<double>(), z);
}

}  // namespace scop::mc
