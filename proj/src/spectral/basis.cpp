#include <cmath>

#include "common/errors.hpp"
#include "spectral/spectral.hpp"
#include "specfun/specfun.hpp"

namespace scop::spectral {

QuasiNumberBasis make_basis(int N, double q, double s, double eps0) {
    if (N < 2) throw DomainError("basis: N must be at least 2");
    if (!(q > 0.0)) throw DomainError("basis: q must be positive");
    if (!(s > -0.5)) throw DomainError("basis: s must exceed -1/2 for a normalizable start state");
    QuasiNumberBasis b;
    b.N = N;
    b.q = q;
    b.s = s;
    b.eps0 = eps0;
    b.log_norms.resize(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n) {
        b.log_norms[n] = 0.5 * (specfun::log_gamma(n + 1.0) - specfun::log_gamma(n + 2.0 * q));
    }
    return b;
}

QuasiNumberBasis make_basis(int N, const model::DerivedParams& params) {
    return make_basis(N, params.q, params.s, params.eps0);
}

std::vector<double> scaled_basis_values(const QuasiNumberBasis& basis, double y,
                                        double log_prefactor) {
    if (!(y > 0.0)) throw DomainError("basis_values: y must be positive");
    const auto lag = specfun::laguerre_sequence(basis.alpha(), basis.N, y);
    const double common = log_prefactor + basis.q * std::log(y) - 0.5 * y;
    const double ln2 = std::log(2.0);
    std::vector<double> out(static_cast<std::size_t>(basis.N));
    for (int n = 0; n < basis.N; ++n) {
        const double m = lag.mantissas[n];
        if (m == 0.0) {
            out[n] = 0.0;
            continue;
        }
        out[n] = m * std::exp(common + basis.log_norms[n] + lag.exponents[n] * ln2);
    }
    return out;
}

std::vector<double> basis_values(const QuasiNumberBasis& basis, double y) {
    return scaled_basis_values(basis, y, 0.0);
}

HamiltonianMatrix build_hamiltonian(const QuasiNumberBasis& basis, Branch branch) {
    const int N = basis.N;
    const double q = basis.q;
    const double s = basis.s;
    HamiltonianMatrix h;
    h.branch = branch;
    h.diag.resize(static_cast<std::size_t>(N));
    h.offdiag.resize(static_cast<std::size_t>(N - 1));
    for (int n = 0; n < N; ++n) {
        const double nd = n;
        const double c2 = nd * (nd + 2.0 * q - 1.0);
        const double shift = s - q - nd;
        double d = c2 + shift * shift + basis.eps0;
        if (branch == Branch::minus) d += 2.0 * (nd + q) * (2.0 * s + 1.0);
        h.diag[n] = d;
        if (n + 1 < N) {
            const double k = nd + 1.0;
            const double c_next = std::sqrt(k * (k + 2.0 * q - 1.0));
            h.offdiag[n] = branch == Branch::plus ? shift * c_next : -(s + q + nd + 1.0) * c_next;
        }
    }
    return h;
}

}  // namespace scop::spectral
