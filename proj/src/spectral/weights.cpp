#include <algorithm>
#include <cmath>

#include "common/errors.hpp"
#include "spectral/spectral.hpp"
#include "specfun/specfun.hpp"

namespace scop::spectral {

using specfun::log_gamma;

WeightVector forward_initial_weights(const QuasiNumberBasis& basis,
                                     const model::ControlPoint& point,
                                     const model::DerivedParams& params) {
    const double y0 = point.y0;
    if (!(y0 > 0.0)) throw DomainError("forward_initial_weights: y0 must be positive");
    WeightVector w;
    w.kind = WeightKind::forward;
    w.values = scaled_basis_values(basis, y0, -params.s * std::log(y0) + 0.5 * y0);
    return w;
}

WeightVector backward_initial_weights(const QuasiNumberBasis& basis,
                                      const model::ControlPoint& point,
                                      const model::DerivedParams& params) {
    const double y_hat = point.y_hat;
    const double kappa = params.kappa;
    const double alpha = basis.alpha();
    if (!(kappa > 0.0)) throw ValidationError("backward_initial_weights: kappa must be positive");
    if (!(alpha + 1.0 - kappa > 0.0)) {
        throw ValidationError("backward_initial_weights: requires q > s");
    }
    if (!(y_hat > 0.0)) throw DomainError("backward_initial_weights: y_hat must be positive");

    const double lg_kappa = log_gamma(kappa);
    const double lg_gap = log_gamma(alpha + 1.0 - kappa);
    const double lg_alpha1 = log_gamma(alpha + 1.0);
    const double log_lower = kappa * std::log(y_hat) - std::log(kappa);

    WeightVector w;
    w.kind = WeightKind::backward;
    w.values.resize(static_cast<std::size_t>(basis.N));
    for (int n = 0; n < basis.N; ++n) {
        const double lg_n1 = log_gamma(n + 1.0);
        const double complete =
            std::exp(lg_kappa + log_gamma(alpha + n + 1.0 - kappa) - lg_n1 - lg_gap);
        const double lower_scale =
            std::exp(log_gamma(alpha + n + 1.0) - lg_n1 - lg_alpha1 + log_lower);
        const double series =
            specfun::hyp2f2(alpha + n + 1.0, kappa, alpha + 1.0, kappa + 1.0, -y_hat);
        w.values[n] = std::exp(basis.log_norms[n]) * (complete - lower_scale * series);
    }
    return w;
}

WeightVector evolve(const WeightVector& weights, const SpectralDecomposition& decomp,
                    double t_years, double hbar) {
    const int N = decomp.N;
    if (static_cast<int>(weights.values.size()) != N) {
        throw DomainError("evolve: weight and decomposition dimensions differ");
    }
    if (!(t_years >= 0.0)) throw DomainError("evolve: time must be nonnegative");
    const double tau = 0.5 * hbar * t_years;
    std::vector<double> c(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
        const double* col = &decomp.eigenvectors[static_cast<std::size_t>(k) * N];
        double acc = 0.0;
        for (int i = 0; i < N; ++i) acc += col[i] * weights.values[i];
        c[k] = acc * std::exp(-tau * decomp.eigenvalues[k]);
    }
    WeightVector out;
    out.kind = weights.kind;
    out.time_years = weights.time_years + t_years;
    out.values.assign(static_cast<std::size_t>(N), 0.0);
    for (int k = 0; k < N; ++k) {
        const double* col = &decomp.eigenvectors[static_cast<std::size_t>(k) * N];
        for (int i = 0; i < N; ++i) out.values[i] += col[i] * c[k];
    }
    return out;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace

Reading clamp_probability(double raw) {
    return {raw, std::clamp(raw, 0.0, 1.0)};
}

Reading fpe_density(const QuasiNumberBasis& basis, const WeightVector& weights,
                    const model::DerivedParams& params, double y) {
    if (weights.kind != WeightKind::forward) {
        throw DomainError("fpe_density: forward weights required");
    }
    if (!(y > 0.0)) throw DomainError("fpe_density: y must be positive");
    const auto phi = scaled_basis_values(basis, y, (params.s - 1.0) * std::log(y) - 0.5 * y);
    const double raw = dot(weights.values, phi);
    return {raw, std::max(raw, 0.0)};
}

Reading bke_tail_probability(const QuasiNumberBasis& basis, const WeightVector& weights,
                             const model::DerivedParams& params, double y) {
    if (weights.kind != WeightKind::backward) {
        throw DomainError("bke_tail_probability: backward weights required");
    }
    if (!(y > 0.0)) throw DomainError("bke_tail_probability: y must be positive");
    const auto phi = scaled_basis_values(basis, y, -params.s * std::log(y) + 0.5 * y);
    return clamp_probability(dot(weights.values, phi));
}

TailSolver::TailSolver(model::PlanSpec plan, model::MarketParams market,
                       SolverSettings settings, DecompositionCache* cache)
    : plan_(std::move(plan)),
      market_(market),
      settings_(settings),
      cache_(cache != nullptr ? cache : &shared_cache()) {
    model::validate(plan_);
    model::validate(market_);
    if (settings_.basis_size < 2) throw ValidationError("solver.basis_size must be at least 2");
}

SpectralColumn TailSolver::column(double xi) const {
    SpectralColumn col;
    col.params = model::derive_params(plan_, market_, xi, settings_.q);
    col.params.require_gates();
    col.basis = make_basis(settings_.basis_size, col.params);
    col.decomp = cache_->get(col.basis, col.params.branch());
    return col;
}

Reading TailSolver::probability_at_y0(const SpectralColumn& column, double y0) const {
    const double u0 = model::y0_to_u0(plan_, column.params, y0);
    return probability(column, u0).p;
}

TailQuery TailSolver::probability(const SpectralColumn& column, double u0) const {
    TailQuery out;
    out.point = model::control_point(plan_, column.params, u0, column.params.xi);
    const auto wb = backward_initial_weights(column.basis, out.point, column.params);
    const double y0 = out.point.y0;
    const auto psi =
        scaled_basis_values(column.basis, y0, -column.params.s * std::log(y0) + 0.5 * y0);

    // p = psi^T U e^{-tau D} U^T w, contracted in the eigenbasis.
    const auto& d = *column.decomp;
    const int N = d.N;
    const double tau = 0.5 * column.params.hbar * plan_.horizon_years;
    double acc = 0.0;
    for (int k = 0; k < N; ++k) {
        const double* col = &d.eigenvectors[static_cast<std::size_t>(k) * N];
        double a = 0.0;
        double b = 0.0;
        for (int i = 0; i < N; ++i) {
            a += col[i] * psi[i];
            b += col[i] * wb.values[i];
        }
        acc += a * b * std::exp(-tau * d.eigenvalues[k]);
    }
    out.p = clamp_probability(acc);
    return out;
}

TailQuery TailSolver::probability(double u0, double xi) const {
    return probability(column(xi), u0);
}

}  // namespace scop::spectral
