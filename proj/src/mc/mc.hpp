#pragma once

#include <cstdint>

#include "model/model.hpp"

namespace scop::mc {

enum class Coordinate { wealth, verhulst };

struct SimConfig {
    std::int64_t n_paths = 200000;
    int steps_per_year = 252;
    std::uint64_t seed = 7;
    Coordinate coordinate = Coordinate::wealth;
    int threads = 1;
    /// Paths per independent substream; fixed so results do not depend on threads.
    int batch_size = 4096;
};

struct TailEstimate {
    double p_hat = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    std::int64_t hits = 0;
    int n_steps = 0;
};

/// Euler-Maruyama on dPi = (rbar Pi + u0 e^{xi t}) dt + sigma Pi dW; estimates P[Pi_T < target].
TailEstimate simulate_tail(const model::PlanSpec& plan, const model::MarketParams& market,
                           double u0, double xi, const SimConfig& config);

/// Euler-Maruyama on the Verhulst variable v = 2 u_t / (sigma^2 Pi_t); estimates P[v_T >= y_hat].
/// Driven by the same substreams as simulate_tail with dW mirrored.
TailEstimate simulate_tail_verhulst(const model::PlanSpec& plan, const model::MarketParams& market,
                                    double u0, double xi, const SimConfig& config);

/// Dispatches on config.coordinate.
TailEstimate simulate(const model::PlanSpec& plan, const model::MarketParams& market, double u0,
                      double xi, const SimConfig& config);

/// Noiseless terminal wealth Pi0 e^{rbar T} + u0 (e^{rbar T} - e^{xi T}) / (rbar - xi).
double deterministic_terminal_wealth(const model::PlanSpec& plan, const model::MarketParams& market,
                                     double u0, double xi);

/// Lognormal P[Pi_T < target] for u0 = 0.
double gbm_tail_probability(const model::PlanSpec& plan, const model::MarketParams& market);

/// Seed of substream `index` (SplitMix64 finalizer over seed and index).
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace scop::mc
