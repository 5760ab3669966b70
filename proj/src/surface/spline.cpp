#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "common/errors.hpp"
#include "surface/surface.hpp"

namespace scop::surface {

namespace {

// Not-a-knot slope system for fixed abscissae; factored once per axis.
class SlopeSolver {
public:
    explicit SlopeSolver(const std::vector<double>& x) : x_(x) {
        const auto n = static_cast<Eigen::Index>(x.size());
        if (n < 4) throw DomainError("spline: at least 4 nodes required");
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        const double h0 = x[1] - x[0];
        const double h1 = x[2] - x[1];
        a(0, 0) = h1;
        a(0, 1) = h0 + h1;
        for (Eigen::Index i = 1; i + 1 < n; ++i) {
            const double hl = x[i] - x[i - 1];
            const double hr = x[i + 1] - x[i];
            a(i, i - 1) = hr;
            a(i, i) = 2.0 * (hl + hr);
            a(i, i + 1) = hl;
        }
        const double ha = x[n - 2] - x[n - 3];
        const double hb = x[n - 1] - x[n - 2];
        a(n - 1, n - 2) = ha + hb;
        a(n - 1, n - 1) = ha;
        lu_.compute(a);
    }

    [[nodiscard]] std::vector<double> slopes(const std::vector<double>& f) const {
        const std::size_t n = x_.size();
        std::vector<double> h(n - 1);
        std::vector<double> del(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            h[i] = x_[i + 1] - x_[i];
            del[i] = (f[i + 1] - f[i]) / h[i];
        }
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
        rhs[0] = ((h[0] + 2.0 * (h[0] + h[1])) * h[1] * del[0] + h[0] * h[0] * del[1]) /
                 (h[0] + h[1]);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            rhs[static_cast<Eigen::Index>(i)] = 3.0 * (h[i] * del[i - 1] + h[i - 1] * del[i]);
        }
        const double ha = h[n - 3];
        const double hb = h[n - 2];
        rhs[static_cast<Eigen::Index>(n - 1)] =
            (hb * hb * del[n - 3] + (2.0 * (ha + hb) + hb) * ha * del[n - 2]) / (ha + hb);
        const Eigen::VectorXd d = lu_.solve(rhs);
        return {d.data(), d.data() + d.size()};
    }

private:
    std::vector<double> x_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

std::size_t locate(const std::vector<double>& nodes, double v) {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), v);
    std::size_t i = it == nodes.begin() ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
    return std::min(i, nodes.size() - 2);
}

struct Hermite {
    double h00, h01, h10, h11;
};

Hermite hermite(double t) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    return {2.0 * t3 - 3.0 * t2 + 1.0, -2.0 * t3 + 3.0 * t2, t3 - 2.0 * t2 + t, t3 - t2};
}

}  // namespace

std::vector<double> not_a_knot_slopes(const std::vector<double>& x, const std::vector<double>& f) {
    if (x.size() != f.size()) throw DomainError("spline: size mismatch");
    return SlopeSolver(x).slopes(f);
}

BicubicInterpolant::BicubicInterpolant(std::vector<double> y_nodes, std::vector<double> xi_nodes,
                                       std::vector<double> values)
    : y_(std::move(y_nodes)), xi_(std::move(xi_nodes)), f_(std::move(values)) {
    const std::size_t ny = y_.size();
    const std::size_t nx = xi_.size();
    if (ny < 4 || nx < 4) throw DomainError("spline: degenerate grid (need 4 x 4 nodes)");
    if (f_.size() != ny * nx) throw DomainError("spline: value count does not match grid");
    for (std::size_t i = 1; i < ny; ++i) {
        if (!(y_[i] > y_[i - 1])) throw DomainError("spline: y nodes must strictly increase");
    }
    for (std::size_t j = 1; j < nx; ++j) {
        if (!(xi_[j] > xi_[j - 1])) throw DomainError("spline: xi nodes must strictly increase");
    }
    for (double v : f_) {
        if (!std::isfinite(v)) throw DomainError("spline: non-finite node value");
    }

    const SlopeSolver along_y(y_);
    const SlopeSolver along_xi(xi_);
    fy_.assign(ny * nx, 0.0);
    fx_.assign(ny * nx, 0.0);
    fyx_.assign(ny * nx, 0.0);

    std::vector<double> col(ny);
    for (std::size_t j = 0; j < nx; ++j) {
        for (std::size_t i = 0; i < ny; ++i) col[i] = f_[i * nx + j];
        const auto d = along_y.slopes(col);
        for (std::size_t i = 0; i < ny; ++i) fy_[i * nx + j] = d[i];
    }
    std::vector<double> row(nx);
    for (std::size_t i = 0; i < ny; ++i) {
        std::copy_n(&f_[i * nx], nx, row.begin());
        const auto d = along_xi.slopes(row);
        std::copy(d.begin(), d.end(), &fx_[i * nx]);
        std::copy_n(&fy_[i * nx], nx, row.begin());
        const auto dd = along_xi.slopes(row);
        std::copy(dd.begin(), dd.end(), &fyx_[i * nx]);
    }
}

double BicubicInterpolant::operator()(double y, double xi) const {
    const std::size_t nx = xi_.size();
    const std::size_t i = locate(y_, y);
    const std::size_t j = locate(xi_, xi);
    const double hy = y_[i + 1] - y_[i];
    const double hx = xi_[j + 1] - xi_[j];
    const Hermite a = hermite((y - y_[i]) / hy);
    const Hermite b = hermite((xi - xi_[j]) / hx);
    const double va[2] = {a.h00, a.h01};
    const double da[2] = {a.h10 * hy, a.h11 * hy};
    const double vb[2] = {b.h00, b.h01};
    const double db[2] = {b.h10 * hx, b.h11 * hx};
    double acc = 0.0;
    for (int di = 0; di < 2; ++di) {
        for (int dj = 0; dj < 2; ++dj) {
            const std::size_t k = (i + di) * nx + (j + dj);
            acc += va[di] * vb[dj] * f_[k] + da[di] * vb[dj] * fy_[k] + va[di] * db[dj] * fx_[k] +
                   da[di] * db[dj] * fyx_[k];
        }
    }
    return acc;
}

BicubicInterpolant fit_spline(const ProbabilitySurface& surface) {
    return BicubicInterpolant(surface.grid.y_nodes, surface.grid.xi_nodes, surface.p_values);
}

}  // namespace scop::surface
