#pragma once

#include <vector>

#include "model/model.hpp"
#include "spectral/spectral.hpp"

namespace scop::diagnostics {

/// x-space probability current J = V' f + (hbar/2) df/dx in the Morse variable:
///   J(y) = (hbar/2) y^s e^{-y/2} sum_n w_n [C_n phi_{n-1}(y) + (s - q - n) phi_n(y)].
double probability_current(const spectral::QuasiNumberBasis& basis,
                           const spectral::WeightVector& forward_weights,
                           const model::DerivedParams& params, double y);

struct NormReport {
    double total_norm = 0.0;
    double residual_estimate = 0.0;
    std::vector<model::Gate> gate_flags;
};

/// int f dy = Gamma(q+s)/Gamma(q-s) sum_n Gamma(n+q-s)/sqrt(n! Gamma(n+2q)) w_n.
/// `y0` feeds the residual estimate for the initial-state series.
NormReport total_norm(const spectral::QuasiNumberBasis& basis,
                      const spectral::WeightVector& forward_weights,
                      const model::DerivedParams& params, double y0);

/// Leading asymptotic tail of the t = 0 norm series beyond N terms:
///   Gamma(q+s)/Gamma(q-s) e^{y0/2}/sqrt(pi) (y0 N)^{-s-1/4} cos(2 sqrt(y0 N) - pi (q - 3/4)).
double norm_residual_estimate(double y0, int N, const model::DerivedParams& params);

/// Magnitude of that estimate with the cosine dropped; the scale on which it
/// is compared against the true deficit, which changes sign with N.
double norm_residual_amplitude(double y0, int N, const model::DerivedParams& params);

/// Partial sum of the t = 0 norm series over n < N, for checking the estimate.
double norm_partial_sum(double y0, int N, const model::DerivedParams& params);

struct FiniteNDensity {
    double exact = 0.0;
    double asymptotic = 0.0;
    /// Magnitude scale of the asymptotic oscillation at y.
    double envelope = 0.0;
};

/// Truncated t = 0 density from the Christoffel-Darboux kernel, and its
/// large-N three-term form.
FiniteNDensity finite_n_initial_density(double y, double y0, int N,
                                        const model::DerivedParams& params);

struct BackwardAsymptotic {
    double value = 0.0;
    double leading = 0.0;
    double correction = 0.0;
    /// |correction| >= 50% of the leading term scale.
    bool flagged = false;
    /// Alternative O(1/omega) term: the boundary contribution at z = y_hat of
    ///   y^{1/4}/(2 pi) int_{y_hat}^inf z^{kappa-2} e^{-z/2} [sin(omega(sqrt z - sqrt y))/(sqrt z - sqrt y)
    ///                                                     + sin(omega(sqrt z + sqrt y))/(sqrt z + sqrt y)] dz,
    /// i.e. the Gibbs ringing of the step. Zero at y = y_hat, where it is singular.
    double endpoint_correction = 0.0;
    double endpoint_value = 0.0;
};

/// Large-N form of the backward initial state sum_n w_n^B(0) phi_n(y), derived
/// for q = 5/4. The step takes the value 1/2 at y = y_hat.
BackwardAsymptotic backward_initial_asymptotic(double y, double y_hat, int N,
                                               const model::DerivedParams& params);

}  // namespace scop::diagnostics
