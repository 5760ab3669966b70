#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "model/model.hpp"

namespace scop::spectral {

using model::Branch;

inline constexpr int kDefaultBasisSize = 150;

/// Quasi-number states
///   phi_n(y) = sqrt(n!/Gamma(n+2q)) y^q e^{-y/2} L_n^{(2q-1)}(y),
/// orthonormal under dy/y.
struct QuasiNumberBasis {
    int N = 0;
    double q = 0.0;
    double s = 0.0;
    double eps0 = 0.0;
    /// 0.5 * log(n! / Gamma(n + 2q)).
    std::vector<double> log_norms;

    [[nodiscard]] double alpha() const { return 2.0 * q - 1.0; }
};

QuasiNumberBasis make_basis(int N, double q, double s, double eps0 = 0.0);
QuasiNumberBasis make_basis(int N, const model::DerivedParams& params);

std::vector<double> basis_values(const QuasiNumberBasis& basis, double y);

/// exp(log_prefactor) * phi_n(y), with the prefactor folded into the log-space
/// normalizer so large e^{y/2} factors never materialize on their own.
std::vector<double> scaled_basis_values(const QuasiNumberBasis& basis, double y,
                                        double log_prefactor);

struct HamiltonianMatrix {
    Branch branch = Branch::plus;
    std::vector<double> diag;
    std::vector<double> offdiag;

    [[nodiscard]] int size() const { return static_cast<int>(diag.size()); }
};

HamiltonianMatrix build_hamiltonian(const QuasiNumberBasis& basis, Branch branch);

struct SpectralDecomposition {
    int N = 0;
    std::vector<double> eigenvalues;
    /// Column-major: column k is the k-th eigenvector.
    std::vector<double> eigenvectors;

    [[nodiscard]] double U(int row, int col) const {
        return eigenvectors[static_cast<std::size_t>(col) * N + row];
    }
};

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
/// Eigenvalues ascending; each eigenvector's largest entry is positive.
SpectralDecomposition eigendecompose(const HamiltonianMatrix& matrix);

/// Memoizes decompositions by (s, q, N, branch). Thread-safe.
class DecompositionCache {
public:
    std::shared_ptr<const SpectralDecomposition> get(const QuasiNumberBasis& basis,
                                                     Branch branch);
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::size_t misses() const;
    void clear();

private:
    using Key = std::tuple<double, double, int, int>;
    mutable std::mutex mutex_;
    std::map<Key, std::shared_ptr<const SpectralDecomposition>> entries_;
    std::size_t misses_ = 0;
};

DecompositionCache& shared_cache();

enum class WeightKind { forward, backward };

struct WeightVector {
    WeightKind kind = WeightKind::forward;
    double time_years = 0.0;
    std::vector<double> values;
};

/// w_n = y0^{-s} e^{y0/2} phi_n(y0).
WeightVector forward_initial_weights(const QuasiNumberBasis& basis,
                                     const model::ControlPoint& point,
                                     const model::DerivedParams& params);

/// w_n = sqrt(n!/Gamma(n+2q)) * int_{y_hat}^inf y^{kappa-1} e^{-y} L_n^{(2q-1)}(y) dy
/// from the complete integral minus the 2F2 lower piece.
WeightVector backward_initial_weights(const QuasiNumberBasis& basis,
                                      const model::ControlPoint& point,
                                      const model::DerivedParams& params);

/// w(t) = U exp(-(hbar t / 2) D) U^T w(0).
WeightVector evolve(const WeightVector& weights, const SpectralDecomposition& decomp,
                    double t_years, double hbar);

struct Reading {
    double raw = 0.0;
    double clamped = 0.0;
};

/// f(y) = y^{s-1} e^{-y/2} sum_n w_n phi_n(y); clamped view is max(raw, 0).
Reading fpe_density(const QuasiNumberBasis& basis, const WeightVector& weights,
                    const model::DerivedParams& params, double y);

/// p(y) = y^{-s} e^{y/2} sum_n w_n phi_n(y); clamped view restricted to [0, 1].
Reading bke_tail_probability(const QuasiNumberBasis& basis, const WeightVector& weights,
                             const model::DerivedParams& params, double y);

struct SolverSettings {
    int basis_size = kDefaultBasisSize;
    double q = model::kDefaultQ;
};

/// Everything that depends on xi alone.
struct SpectralColumn {
    model::DerivedParams params;
    QuasiNumberBasis basis;
    std::shared_ptr<const SpectralDecomposition> decomp;
};

struct TailQuery {
    model::ControlPoint point;
    Reading p;
};

/// Planning-time tail probability p(y0, 0 | xi) for a plan and market.
class TailSolver {
public:
    TailSolver(model::PlanSpec plan, model::MarketParams market, SolverSettings settings = {},
               DecompositionCache* cache = nullptr);

    /// Throws ValidationError when xi fails a parameter gate.
    [[nodiscard]] SpectralColumn column(double xi) const;
    [[nodiscard]] TailQuery probability(double u0, double xi) const;
    [[nodiscard]] TailQuery probability(const SpectralColumn& column, double u0) const;
    /// Same value by the y0 coordinate.
    [[nodiscard]] Reading probability_at_y0(const SpectralColumn& column, double y0) const;

    [[nodiscard]] const model::PlanSpec& plan() const { return plan_; }
    [[nodiscard]] const model::MarketParams& market() const { return market_; }
    [[nodiscard]] const SolverSettings& settings() const { return settings_; }

private:
    model::PlanSpec plan_;
    model::MarketParams market_;
    SolverSettings settings_;
    DecompositionCache* cache_;
};

Reading clamp_probability(double raw);

}  // namespace scop::spectral
