#pragma once

#include <cstddef>
#include <vector>

namespace scop::specfun {

/// Generalized Laguerre values L_0^(alpha)(x) .. L_{count-1}^(alpha)(x).
///
/// The upward recurrence runs on mantissas with a shared power-of-two
/// exponent so that large x*N does not overflow. `values` is the materialized
/// view; entries that do not fit in a double saturate to +-DBL_MAX and set
/// `saturated`.
struct LaguerreSequence {
    double alpha = 0.0;
    int count = 0;
    double argument = 0.0;
    std::vector<double> values;
    std::vector<double> mantissas;
    std::vector<int> exponents;
    bool saturated = false;

    /// L_n = mantissas[n] * 2^exponents[n].
    [[nodiscard]] double log_abs(std::size_t n) const;
    [[nodiscard]] int sign(std::size_t n) const;
};

LaguerreSequence laguerre_sequence(double alpha, int count, double x);

/// ln Gamma(x) for x > 0.
double log_gamma(double x);

/// Upper incomplete gamma Gamma(s, x), not normalized.
double upper_incomplete_gamma(double s, double x);

struct Hyp2F2Options {
    std::size_t max_terms = 100000;
    std::size_t quiet_terms = 50;
    double relative_floor = 1e-16;
};

struct Hyp2F2Result {
    double value = 0.0;
    std::size_t terms = 0;
    /// max |term| / |sum|; the loss of significance in the summation.
    double condition = 1.0;
    bool extended_precision = false;
};

/// 2F2(a1, a2; b1, b2; z) for real z by direct summation of the series.
///
/// The sum stops once the term stays below relative_floor * |partial sum|
/// for quiet_terms consecutive terms. When the alternating series for large
/// a1 and negative z cancels more digits than double keeps, the same series
/// is re-summed in binary128, or in 100-digit binary floating point when
/// even binary128 would lose too much.
Hyp2F2Result hyp2f2_detailed(double a1, double a2, double b1, double b2, double z,
                             const Hyp2F2Options& options = {});

double hyp2f2(double a1, double a2, double b1, double b2, double z);

}  // namespace scop::specfun
