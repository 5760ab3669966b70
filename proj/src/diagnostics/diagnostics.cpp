#include "diagnostics/diagnostics.hpp"

#include <cmath>
#include <numbers>

#include "common/errors.hpp"
#include "specfun/specfun.hpp"

namespace scop::diagnostics {

using specfun::log_gamma;
using std::numbers::pi;

double probability_current(const spectral::QuasiNumberBasis& basis,
                           const spectral::WeightVector& forward_weights,
                           const model::DerivedParams& params, double y) {
    if (forward_weights.kind != spectral::WeightKind::forward) {
        throw DomainError("probability_current: forward weights required");
    }
    if (!(y > 0.0)) throw DomainError("probability_current: y must be positive");
    const auto phi = spectral::scaled_basis_values(basis, y, params.s * std::log(y) - 0.5 * y);
    const auto& w = forward_weights.values;
    const double q = basis.q;
    const double s = basis.s;
    double acc = 0.0;
    for (int n = 0; n < basis.N; ++n) {
        const double nd = n;
        double term = (s - q - nd) * phi[n];
        if (n > 0) term += std::sqrt(nd * (nd + 2.0 * q - 1.0)) * phi[n - 1];
        acc += w[n] * term;
    }
    return 0.5 * params.hbar * acc;
}

NormReport total_norm(const spectral::QuasiNumberBasis& basis,
                      const spectral::WeightVector& forward_weights,
                      const model::DerivedParams& params, double y0) {
    NormReport report;
    report.gate_flags = params.gates;
    const double q = basis.q;
    const double s = basis.s;
    if (!(q > std::fabs(s))) return report;
    const double lead = log_gamma(q + s) - log_gamma(q - s);
    double acc = 0.0;
    for (int n = 0; n < basis.N; ++n) {
        const double lg = log_gamma(n + q - s) -
                          0.5 * (log_gamma(n + 1.0) + log_gamma(n + 2.0 * q)) + lead;
        acc += std::exp(lg) * forward_weights.values[n];
    }
    report.total_norm = acc;
    if (s > -0.25 && y0 > 0.0) report.residual_estimate = norm_residual_estimate(y0, basis.N, params);
    return report;
}

double norm_residual_estimate(double y0, int N, const model::DerivedParams& params) {
    const double s = params.s;
    const double q = params.q;
    if (!(s > -0.25)) throw ValidationError("norm_residual_estimate: requires s > -1/4");
    if (!(y0 > 0.0) || N < 1) throw DomainError("norm_residual_estimate: y0 > 0 and N >= 1");
    const double x = y0 * N;
    const double lead = std::exp(log_gamma(q + s) - log_gamma(q - s) + 0.5 * y0);
    return lead / std::sqrt(pi) * std::pow(x, -s - 0.25) *
           std::cos(2.0 * std::sqrt(x) - pi * (q - 0.75));
}

double norm_residual_amplitude(double y0, int N, const model::DerivedParams& params) {
    const double s = params.s;
    const double q = params.q;
    if (!(s > -0.25)) throw ValidationError("norm_residual_amplitude: requires s > -1/4");
    if (!(y0 > 0.0) || N < 1) throw DomainError("norm_residual_amplitude: y0 > 0 and N >= 1");
    return std::exp(log_gamma(q + s) - log_gamma(q - s) + 0.5 * y0) / std::sqrt(pi) *
           std::pow(y0 * N, -s - 0.25);
}

double norm_partial_sum(double y0, int N, const model::DerivedParams& params) {
    const double s = params.s;
    const double q = params.q;
    if (!(q > std::fabs(s))) throw ValidationError("norm_partial_sum: requires q > |s|");
    const auto lag = specfun::laguerre_sequence(2.0 * q - 1.0, N, y0);
    const double lead = (q - s) * std::log(y0) + log_gamma(q + s) - log_gamma(q - s);
    double acc = 0.0;
    for (int n = 0; n < N; ++n) {
        acc += std::exp(lead + log_gamma(n + q - s) - log_gamma(n + 2.0 * q)) * lag.values[n];
    }
    return acc;
}

FiniteNDensity finite_n_initial_density(double y, double y0, int N,
                                        const model::DerivedParams& params) {
    if (!(y > 0.0) || !(y0 > 0.0)) throw DomainError("finite_n_initial_density: y, y0 > 0");
    if (N < 1) throw DomainError("finite_n_initial_density: N >= 1");
    const double q = params.q;
    const double s = params.s;
    const double alpha = 2.0 * q - 1.0;

    const auto ly = specfun::laguerre_sequence(alpha, N + 1, y);
    const auto ly0 = specfun::laguerre_sequence(alpha, N + 1, y0);
    double bracket = 0.0;
    // Removable singularity: switch to the derivative form, L'_n = -L_{n-1}^{(alpha+1)}.
    if (std::fabs(y - y0) <= 1e-7 * std::max(1.0, y0)) {
        const auto d = specfun::laguerre_sequence(alpha + 1.0, N + 1, y0);
        const double dl_nm1 = N >= 2 ? -d.values[N - 2] : 0.0;
        const double dl_n = -d.values[N - 1];
        bracket = dl_nm1 * ly0.values[N] - dl_n * ly0.values[N - 1];
    } else {
        bracket = (ly.values[N - 1] * ly0.values[N] - ly.values[N] * ly0.values[N - 1]) / (y - y0);
    }
    const double log_pref = s * (std::log(y) - std::log(y0)) + (q - 1.0) * std::log(y) +
                            q * std::log(y0) - y + log_gamma(N + 1.0) -
                            log_gamma(N + 2.0 * q - 1.0);

    FiniteNDensity out;
    out.exact = std::exp(log_pref) * bracket;

    const double omega = 2.0 * std::sqrt(static_cast<double>(N));
    const double r = std::sqrt(y) - std::sqrt(y0);
    const double p = std::sqrt(y) + std::sqrt(y0);
    const double scale = std::exp((s - 0.25) * (std::log(y) - std::log(y0)) - 0.5 * (y - y0)) /
                         (2.0 * pi * std::sqrt(y));
    const double diff_term = r == 0.0 ? omega : std::sin(omega * r) / r;
    const double sum_term = (std::sin(2.0 * pi * q) * std::sin(omega * p) +
                             std::cos(2.0 * pi * q) * std::cos(omega * p)) /
                            p;
    out.asymptotic = scale * (diff_term + sum_term);
    out.envelope = scale * ((r == 0.0 ? omega : std::min(omega, 1.0 / std::fabs(r))) + 1.0 / p);
    return out;
}

BackwardAsymptotic backward_initial_asymptotic(double y, double y_hat, int N,
                                               const model::DerivedParams& params) {
    if (!(y > 0.0) || !(y_hat > 0.0)) throw DomainError("backward_initial_asymptotic: y, y_hat > 0");
    if (N < 1) throw DomainError("backward_initial_asymptotic: N >= 1");
    if (std::fabs(params.q - 1.25) > 1e-12) {
        throw ValidationError("backward_initial_asymptotic: derived for q = 5/4 only");
    }
    const double kappa = params.kappa;
    const double omega = 2.0 * std::sqrt(static_cast<double>(N));
    const double shape = std::exp((kappa - 1.25) * std::log(y) - 0.5 * y);
    const double step = y > y_hat ? 1.0 : (y == y_hat ? 0.5 : 0.0);

    BackwardAsymptotic out;
    out.leading = shape * step;
    out.correction = -2.0 * std::pow(y, -0.25) * std::pow(y_hat, kappa - 1.5) *
                     std::sin(omega * std::sqrt(y_hat)) / (pi * omega) *
                     (std::cos(omega * std::sqrt(y)) + std::sin(omega * std::sqrt(y)));
    out.value = out.leading + out.correction;
    out.flagged = std::fabs(out.correction) >= 0.5 * shape;

    // Integrating by parts in u = sqrt z leaves the boundary term
    // (1/omega) [g(u) cos(omega (u -+ sqrt y)) / (u -+ sqrt y)] at u = sqrt(y_hat).
    const double near = std::sqrt(y_hat) - std::sqrt(y);
    const double far = std::sqrt(y_hat) + std::sqrt(y);
    if (near != 0.0) {
        out.endpoint_correction = std::pow(y, 0.25) * std::pow(y_hat, kappa - 1.5) *
                                  std::exp(-0.5 * y_hat) / (pi * omega) *
                                  (std::cos(omega * near) / near + std::cos(omega * far) / far);
    }
    out.endpoint_value = out.leading + out.endpoint_correction;
    return out;
}

}  // namespace scop::diagnostics
