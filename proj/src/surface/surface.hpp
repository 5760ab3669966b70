#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "model/model.hpp"
#include "spectral/spectral.hpp"

namespace scop::surface {

inline constexpr int kDefaultYNodes = 100;
inline constexpr int kDefaultXiNodes = 20;
inline constexpr int kDefaultRefine = 8;
inline constexpr double kDefaultFrontierTol = 2e-3;

struct ControlGrid {
    std::vector<double> y_nodes;
    std::vector<double> xi_nodes;
    std::string provenance;
};

/// y nodes log-spaced over the image of plan.u0_bounds, xi nodes linear over
/// plan.xi_bounds.
ControlGrid make_grid(const model::PlanSpec& plan, const model::MarketParams& market,
                      int y_count = kDefaultYNodes, int xi_count = kDefaultXiNodes);

void validate(const ControlGrid& grid);

struct NodeFailure {
    std::size_t y_index = 0;
    std::size_t xi_index = 0;
    std::string message;
};

struct ProbabilitySurface {
    ControlGrid grid;
    /// Row-major, y index major: value(i, j) = p_values[i * xi_count + j].
    std::vector<double> p_values;
    std::vector<double> raw_values;
    int basis_size = spectral::kDefaultBasisSize;
    double q = model::kDefaultQ;
    std::string created_utc;
    std::vector<NodeFailure> failures;

    [[nodiscard]] std::size_t y_count() const { return grid.y_nodes.size(); }
    [[nodiscard]] std::size_t xi_count() const { return grid.xi_nodes.size(); }
    [[nodiscard]] double p(std::size_t i, std::size_t j) const {
        return p_values[i * xi_count() + j];
    }
    [[nodiscard]] double raw(std::size_t i, std::size_t j) const {
        return raw_values[i * xi_count() + j];
    }
};

struct BuildSettings {
    spectral::SolverSettings solver;
    int threads = 1;
    /// Empty means "now"; fixed stamps keep archives reproducible.
    std::string timestamp;
};

ProbabilitySurface build_surface(const model::PlanSpec& plan, const model::MarketParams& market,
                                 const ControlGrid& grid, const BuildSettings& settings,
                                 spectral::DecompositionCache* cache = nullptr);

std::string utc_now_iso8601();

/// Tensor-product cubic spline with not-a-knot ends, stored as bicubic Hermite
/// patches (value, d/dy, d/dxi, d2/dy dxi at every node).
class BicubicInterpolant {
public:
    BicubicInterpolant(std::vector<double> y_nodes, std::vector<double> xi_nodes,
                       std::vector<double> values);

    [[nodiscard]] double operator()(double y, double xi) const;

    [[nodiscard]] const std::vector<double>& y_nodes() const { return y_; }
    [[nodiscard]] const std::vector<double>& xi_nodes() const { return xi_; }
    [[nodiscard]] double y_min() const { return y_.front(); }
    [[nodiscard]] double y_max() const { return y_.back(); }
    [[nodiscard]] double xi_min() const { return xi_.front(); }
    [[nodiscard]] double xi_max() const { return xi_.back(); }

private:
    std::vector<double> y_;
    std::vector<double> xi_;
    std::vector<double> f_;
    std::vector<double> fy_;
    std::vector<double> fx_;
    std::vector<double> fyx_;
};

/// Fits the clamped surface values.
BicubicInterpolant fit_spline(const ProbabilitySurface& surface);

/// Slopes of the not-a-knot cubic spline through (x, f).
std::vector<double> not_a_knot_slopes(const std::vector<double>& x, const std::vector<double>& f);

struct FrontierVertex {
    double xi = 0.0;
    double y = 0.0;
    double residual = 0.0;
};

using Polyline = std::vector<FrontierVertex>;

struct FrontierLevel {
    double alpha = 0.0;
    std::vector<Polyline> polylines;
    bool empty = true;
    std::string note;
};

struct FrontierSet {
    std::vector<FrontierLevel> levels;
};

struct FrontierSettings {
    int refine = kDefaultRefine;
    double tolerance = kDefaultFrontierTol;
};

FrontierSet extract_frontiers(const BicubicInterpolant& interp, const std::vector<double>& levels,
                              const FrontierSettings& settings = {});

/// y on the polyline at xi by linear interpolation; nullopt outside its xi span.
std::optional<double> frontier_y_at(const Polyline& line, double xi);

/// For every pair alpha1 < alpha2, the alpha1 curve lies at or above the alpha2
/// curve at the xi samples both cover. Returns the worst violation (<= 0 is nested).
double nesting_violation(const FrontierSet& set, const std::vector<double>& xi_samples);

/// Largest increase of p along y at fixed xi, sampled on the refined lattice.
double monotonicity_overshoot(const BicubicInterpolant& interp, int refine = kDefaultRefine);

enum class SolveStatus { found, infeasible, already_satisfied };

struct SolveResult {
    SolveStatus status = SolveStatus::infeasible;
    std::optional<double> u0;
    std::optional<double> y0;
    double p_at_solution = 0.0;
};

const char* to_string(SolveStatus status);

/// Bisection along the xi-slice of the spline for p(y, 0 | xi) = alpha.
SolveResult solve_u0(const BicubicInterpolant& interp, const model::PlanSpec& plan,
                     const model::DerivedParams& params, double xi, double alpha);

}  // namespace scop::surface
