#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>
#include <mutex>
#include <thread>

#include "common/errors.hpp"
#include "common/hash.hpp"
#include "surface/surface.hpp"

namespace scop::surface {

namespace {

std::string market_plan_fingerprint(const model::PlanSpec& plan,
                                    const model::MarketParams& market) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g",
                  plan.horizon_years, plan.initial_wealth, plan.target_wealth, plan.u0_min,
                  plan.u0_max, plan.xi_min, plan.xi_max, market.risk_free, market.equity_mean,
                  market.equity_vol, market.equity_fraction, market.txn_cost);
    return buf;
}

}  // namespace

ControlGrid make_grid(const model::PlanSpec& plan, const model::MarketParams& market,
                      int y_count, int xi_count) {
    if (y_count < 4 || xi_count < 4) throw ValidationError("grid: at least 4 nodes per axis");
    const auto params = model::derive_params(plan, market, plan.xi_min);
    const double y_lo = model::u0_to_y0(plan, params, plan.u0_min);
    const double y_hi = model::u0_to_y0(plan, params, plan.u0_max);
    if (!(y_hi > y_lo) || !(plan.xi_max > plan.xi_min)) {
        throw ValidationError("grid: u0 and xi bounds must span a nonempty rectangle");
    }
    ControlGrid grid;
    grid.y_nodes.resize(static_cast<std::size_t>(y_count));
    const double l0 = std::log(y_lo);
    const double l1 = std::log(y_hi);
    for (int i = 0; i < y_count; ++i) {
        grid.y_nodes[i] = std::exp(l0 + (l1 - l0) * i / (y_count - 1));
    }
    grid.y_nodes.front() = y_lo;
    grid.y_nodes.back() = y_hi;
    grid.xi_nodes.resize(static_cast<std::size_t>(xi_count));
    for (int j = 0; j < xi_count; ++j) {
        grid.xi_nodes[j] = plan.xi_min + (plan.xi_max - plan.xi_min) * j / (xi_count - 1);
    }
    grid.xi_nodes.back() = plan.xi_max;
    grid.provenance = hex64(fnv1a64(market_plan_fingerprint(plan, market)));
    return grid;
}

void validate(const ControlGrid& grid) {
    auto check_axis = [](const std::vector<double>& v, const char* name) {
        if (v.size() < 4) throw ValidationError(std::string("grid: ") + name + " needs at least 4 nodes");
        for (std::size_t i = 1; i < v.size(); ++i) {
            if (!(v[i] > v[i - 1])) {
                throw ValidationError(std::string("grid: ") + name + " nodes must strictly increase");
            }
        }
    };
    check_axis(grid.y_nodes, "y");
    check_axis(grid.xi_nodes, "xi");
    if (!(grid.y_nodes.front() > 0.0)) throw ValidationError("grid: y nodes must be positive");
}

std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ProbabilitySurface build_surface(const model::PlanSpec& plan, const model::MarketParams& market,
                                 const ControlGrid& grid, const BuildSettings& settings,
                                 spectral::DecompositionCache* cache) {
    validate(grid);
    const spectral::TailSolver solver(plan, market, settings.solver, cache);
    const std::size_t ny = grid.y_nodes.size();
    const std::size_t nx = grid.xi_nodes.size();

    ProbabilitySurface out;
    out.grid = grid;
    out.basis_size = settings.solver.basis_size;
    out.q = settings.solver.q;
    out.created_utc = settings.timestamp.empty() ? utc_now_iso8601() : settings.timestamp;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.p_values.assign(ny * nx, nan);
    out.raw_values.assign(ny * nx, nan);

    std::mutex failures_mutex;
    std::vector<std::string> column_errors(nx);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t j = next++; j < nx; j = next++) {
            spectral::SpectralColumn column;
            try {
                column = solver.column(grid.xi_nodes[j]);
            } catch (const std::exception& e) {
                column_errors[j] = e.what();
                continue;
            }
            for (std::size_t i = 0; i < ny; ++i) {
                try {
                    const auto r = solver.probability_at_y0(column, grid.y_nodes[i]);
                    out.raw_values[i * nx + j] = r.raw;
                    out.p_values[i * nx + j] = r.clamped;
                } catch (const std::exception& e) {
                    std::lock_guard lock(failures_mutex);
                    out.failures.push_back({i, j, e.what()});
                }
            }
        }
    };

    const int threads = std::clamp(settings.threads, 1, static_cast<int>(nx));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (std::size_t j = 0; j < nx; ++j) {
        if (!column_errors[j].empty()) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.6g", grid.xi_nodes[j]);
            throw ValidationError("surface column xi = " + std::string(buf) +
                                  " failed: " + column_errors[j]);
        }
    }
    std::sort(out.failures.begin(), out.failures.end(), [](const auto& a, const auto& b) {
        return a.y_index != b.y_index ? a.y_index < b.y_index : a.xi_index < b.xi_index;
    });
    return out;
}

}  // namespace scop::surface
