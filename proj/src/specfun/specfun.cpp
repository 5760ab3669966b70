#include "specfun/specfun.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "common/errors.hpp"

namespace scop::specfun {

namespace {

// Rescale once the running mantissa passes 2^600; leaves ample headroom for
// one more recurrence step before overflow.
constexpr int kRescaleBits = 600;
const double kRescaleThreshold = std::ldexp(1.0, kRescaleBits);

bool is_nonpositive_integer(double b) {
    return b <= 0.0 && std::floor(b) == b;
}

template <typename Real>
struct SeriesOutcome {
    Real sum;
    double max_term;
    std::size_t terms;
};

template <typename Real>
SeriesOutcome<Real> sum_2f2(double a1, double a2, double b1, double b2, double z,
                            const Hyp2F2Options& opt) {
    Real term = 1;
    Real sum = 1;
    double max_term = 1.0;
    std::size_t quiet = 0;
    std::size_t k = 0;
    const Real zr = z;
    while (quiet < opt.quiet_terms) {
        if (k >= opt.max_terms) {
            throw ConvergenceError("hyp2f2: series did not settle within " +
                                   std::to_string(opt.max_terms) + " terms");
        }
        const Real kr = static_cast<Real>(k);
        const Real num = (Real(a1) + kr) * (Real(a2) + kr);
        const Real den = (Real(b1) + kr) * (Real(b2) + kr) * (kr + 1);
        const Real ratio = num / den * zr;
        term *= ratio;
        sum += term;
        ++k;
        const double at = std::fabs(static_cast<double>(term));
        if (at > max_term) max_term = at;
        const double as = std::fabs(static_cast<double>(sum));
        const bool shrinking = std::fabs(static_cast<double>(ratio)) < 1.0;
        if (shrinking && at <= opt.relative_floor * as) {
            ++quiet;
        } else {
            quiet = 0;
        }
    }
    return {sum, max_term, k};
}

}  // namespace

double LaguerreSequence::log_abs(std::size_t n) const {
    return std::log(std::fabs(mantissas.at(n))) + exponents.at(n) * std::log(2.0);
}

int LaguerreSequence::sign(std::size_t n) const {
    const double m = mantissas.at(n);
    return (m > 0.0) - (m < 0.0);
}

LaguerreSequence laguerre_sequence(double alpha, int count, double x) {
    if (!(alpha > -1.0)) throw DomainError("laguerre_sequence: alpha must exceed -1");
    if (count < 1) throw DomainError("laguerre_sequence: count must be at least 1");
    if (!(x >= 0.0)) throw DomainError("laguerre_sequence: argument must be nonnegative");

    LaguerreSequence seq;
    seq.alpha = alpha;
    seq.count = count;
    seq.argument = x;
    const auto n_total = static_cast<std::size_t>(count);
    seq.mantissas.resize(n_total);
    seq.exponents.assign(n_total, 0);

    seq.mantissas[0] = 1.0;
    if (count >= 2) seq.mantissas[1] = alpha + 1.0 - x;

    int shift = 0;
    double prev = 1.0;
    double cur = count >= 2 ? seq.mantissas[1] : 0.0;
    for (std::size_t n = 1; n + 1 < n_total; ++n) {
        const double nd = static_cast<double>(n);
        double next = ((2.0 * nd + alpha + 1.0 - x) * cur - (nd + alpha) * prev) / (nd + 1.0);
        if (std::fabs(next) > kRescaleThreshold) {
            prev = std::ldexp(cur, -kRescaleBits);
            cur = std::ldexp(next, -kRescaleBits);
            shift += kRescaleBits;
        } else {
            prev = cur;
            cur = next;
        }
        seq.mantissas[n + 1] = cur;
        seq.exponents[n + 1] = shift;
    }

    seq.values.resize(n_total);
    for (std::size_t n = 0; n < n_total; ++n) {
        const double v = std::ldexp(seq.mantissas[n], seq.exponents[n]);
        if (std::isinf(v)) {
            seq.saturated = true;
            seq.values[n] = std::copysign(DBL_MAX, seq.mantissas[n]);
        } else {
            seq.values[n] = v;
        }
    }
    return seq;
}

double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
    return boost::math::lgamma(x);
}

double upper_incomplete_gamma(double s, double x) {
    if (!(s > 0.0)) throw DomainError("upper_incomplete_gamma: s must be positive");
    if (!(x >= 0.0)) throw DomainError("upper_incomplete_gamma: x must be nonnegative");
    if (x == 0.0) return boost::math::tgamma(s);
    return boost::math::tgamma(s, x);
}

Hyp2F2Result hyp2f2_detailed(double a1, double a2, double b1, double b2, double z,
                             const Hyp2F2Options& options) {
    if (is_nonpositive_integer(b1) || is_nonpositive_integer(b2)) {
        throw DomainError("hyp2f2: lower parameters must not be nonpositive integers");
    }
    if (!std::isfinite(z)) throw DomainError("hyp2f2: argument must be finite");

    const auto fast = sum_2f2<double>(a1, a2, b1, b2, z, options);
    Hyp2F2Result out;
    out.value = fast.sum;
    out.terms = fast.terms;
    out.condition = fast.sum != 0.0 ? fast.max_term / std::fabs(fast.sum)
                                    : std::numeric_limits<double>::infinity();
    // Keep roughly 13 significant digits. Past that cancellation the sum is
    // re-run in binary128, and past binary128's reach in 100 decimal digits.
    // Each wider sum also gives a sharper estimate of the true condition.
    if (out.condition * DBL_EPSILON > 1e-13) {
        const auto wide = sum_2f2<__float128>(a1, a2, b1, b2, z, options);
        out.value = static_cast<double>(wide.sum);
        out.terms = wide.terms;
        out.extended_precision = true;
        if (wide.sum != 0) out.condition = wide.max_term / std::fabs(static_cast<double>(wide.sum));
        if (out.condition * 1.93e-34 > 1e-13) {
            using Wider = boost::multiprecision::cpp_bin_float_100;
            const auto wider = sum_2f2<Wider>(a1, a2, b1, b2, z, options);
            out.value = static_cast<double>(wider.sum);
            out.terms = wider.terms;
            if (wider.sum != 0) {
                out.condition = wider.max_term / std::fabs(static_cast<double>(wider.sum));
            }
        }
    }
    return out;
}

double hyp2f2(double a1, double a2, double b1, double b2, double z) {
    return hyp2f2_detailed(a1, a2, b1, b2, z).value;
}

}  // namespace scop::specfun
