#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "common/errors.hpp"
#include "spectral/spectral.hpp"

namespace scop::spectral {

namespace {

constexpr int kMaxSweeps = 60;

// Implicit QL on (d, e) where e[i] couples i and i+1; z accumulates the
// rotations column-major.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z,
                    int n) {
    const double eps = std::numeric_limits<double>::epsilon();
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m = l;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= eps * dd) break;
            }
            if (m == l) break;
            if (iter++ == kMaxSweeps) {
                throw ConvergenceError("eigendecompose: no convergence for eigenvalue " +
                                       std::to_string(l));
            }
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0;
            double c = 1.0;
            double p = 0.0;
            int i = m - 1;
            bool deflated = false;
            for (; i >= l; --i) {
                const double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                double* zi = &z[static_cast<std::size_t>(i) * n];
                double* zi1 = &z[static_cast<std::size_t>(i + 1) * n];
                for (int k = 0; k < n; ++k) {
                    const double t = zi1[k];
                    zi1[k] = s * zi[k] + c * t;
                    zi[k] = c * zi[k] - s * t;
                }
            }
            if (deflated) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        } while (m != l);
    }
}

}  // namespace

SpectralDecomposition eigendecompose(const HamiltonianMatrix& matrix) {
    const int n = matrix.size();
    if (n < 1 || static_cast<int>(matrix.offdiag.size()) != n - 1) {
        throw DomainError("eigendecompose: malformed tridiagonal matrix");
    }
    std::vector<double> d = matrix.diag;
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    std::copy(matrix.offdiag.begin(), matrix.offdiag.end(), e.begin());
    std::vector<double> z(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] = 1.0;

    tridiagonal_ql(d, e, z, n);

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });

    SpectralDecomposition out;
    out.N = n;
    out.eigenvalues.resize(static_cast<std::size_t>(n));
    out.eigenvectors.resize(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        const int src = order[k];
        out.eigenvalues[k] = d[src];
        const double* col = &z[static_cast<std::size_t>(src) * n];
        int arg = 0;
        for (int i = 1; i < n; ++i) {
            if (std::fabs(col[i]) > std::fabs(col[arg])) arg = i;
        }
        const double sign = col[arg] < 0.0 ? -1.0 : 1.0;
        double* dst = &out.eigenvectors[static_cast<std::size_t>(k) * n];
        for (int i = 0; i < n; ++i) dst[i] = sign * col[i];
    }
    return out;
}

std::shared_ptr<const SpectralDecomposition> DecompositionCache::get(
    const QuasiNumberBasis& basis, Branch branch) {
    const Key key{basis.s, basis.q, basis.N, static_cast<int>(branch)};
    {
        std::lock_guard lock(mutex_);
        auto it = entries_.find(key);
        if (it != entries_.end()) return it->second;
    }
    // Decompose outside the lock; a racing duplicate is discarded below.
    auto fresh = std::make_shared<const SpectralDecomposition>(
        eigendecompose(build_hamiltonian(basis, branch)));
    std::lock_guard lock(mutex_);
    auto [it, inserted] = entries_.emplace(key, fresh);
    if (inserted) ++misses_;
    return it->second;
}

std::size_t DecompositionCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::size_t DecompositionCache::misses() const {
    std::lock_guard lock(mutex_);
    return misses_;
}

void DecompositionCache::clear() {
    std::lock_guard lock(mutex_);
    entries_.clear();
    misses_ = 0;
}

DecompositionCache& shared_cache() {
    static DecompositionCache cache;
    return cache;
}

}  // namespace scop::spectral
