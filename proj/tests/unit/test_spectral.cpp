#include <doctest.h>

#include <Eigen/Dense>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <thread>

#include "common/errors.hpp"
#include "specfun/specfun.hpp"
#include "spectral/spectral.hpp"

using namespace scop;
using namespace scop::spectral;

namespace {

model::DerivedParams params_at(double xi, double q = 1.25) {
    return model::derive_params(model::PlanSpec{}, model::MarketParams{}, xi, q);
}

Eigen::MatrixXd dense(const HamiltonianMatrix& h) {
    const int n = h.size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) a(i, i) = h.diag[i];
    for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = a(i + 1, i) = h.offdiag[i];
    return a;
}

// phi_n(y) and d phi_n / dy from the Laguerre derivative identity.
void phi_and_derivative(const QuasiNumberBasis& b, int n, double y, double& v, double& dv) {
    const auto L = specfun::laguerre_sequence(b.alpha(), n + 1, y);
    const auto L1 = specfun::laguerre_sequence(b.alpha() + 1.0, n + 1, y);
    const double ln = L.values[n];
    const double dln = n > 0 ? -L1.values[n - 1] : 0.0;
    const double c = std::exp(b.log_norms[n]) * std::pow(y, b.q - 1.0) * std::exp(-0.5 * y);
    v = c * y * ln;
    dv = c * ((b.q - 0.5 * y) * ln + y * dln);
}

}  // namespace

TEST_CASE("basis is orthonormal under dy/y") {
    const int N = 16;
    boost::math::quadrature::exp_sinh<double> integrator;
    for (double q : {0.75, 1.25, 2.25}) {
        const auto b = make_basis(N, q, 0.1);
        for (int m = 0; m < N; m += 3) {
            for (int n = m; n < N; n += 2) {
                const double g = integrator.integrate([&](double y) {
                    if (y <= 0.0 || y > 600.0) return 0.0;
                    const auto phi = basis_values(b, y);
                    return phi[m] * phi[n] / y;
                });
                CHECK(g == doctest::Approx(m == n ? 1.0 : 0.0).scale(1.0).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("scaled basis values fold the prefactor without overflow") {
    const auto b = make_basis(40, 1.25, 0.05);
    const double y = 3.7;
    const auto plain = basis_values(b, y);
    const auto scaled = scaled_basis_values(b, y, 2.5);
    for (int n = 0; n < 40; ++n) {
        CHECK(scaled[n] == doctest::Approx(std::exp(2.5) * plain[n]).epsilon(1e-12).scale(1e-300));
    }
    // e^{y/2} at y = 1500 overflows on its own but the product is moderate.
    const auto far = scaled_basis_values(b, 1500.0, 750.0);
    for (double v : far) CHECK(std::isfinite(v));
}

TEST_CASE("plus-branch matrix is the Galerkin form of the x-space operator") {
    boost::math::quadrature::exp_sinh<double> integrator;
    for (double xi : {-0.01, 0.03, 0.3}) {
        const auto p = params_at(xi);
        const int N = 8;
        const auto b = make_basis(N, p);
        const auto h = build_hamiltonian(b, Branch::plus);
        // <phi_m| -d^2/dx^2 + 2U/hbar^2 |phi_n> with y = e^{-x}, integrated by parts.
        auto element = [&](int m, int n) {
            return integrator.integrate([&](double y) {
                if (y <= 0.0 || y > 400.0) return 0.0;
                double a, da, c, dc;
                phi_and_derivative(b, m, y, a, da);
                phi_and_derivative(b, n, y, c, dc);
                const double u = model::schrodinger_potential_direct(p, -std::log(y));
                return (y * da * y * dc + 2.0 * u / (p.hbar * p.hbar) * a * c) / y;
            });
        };
        for (int n = 0; n < N; ++n) {
            CHECK(h.diag[n] == doctest::Approx(element(n, n)).epsilon(1e-9));
            if (n + 1 < N) CHECK(h.offdiag[n] == doctest::Approx(element(n, n + 1)).epsilon(1e-9));
            if (n + 2 < N) CHECK(std::fabs(element(n, n + 2)) < 1e-9);
        }
    }
}

TEST_CASE("matrix spot values") {
    const auto b = make_basis(4, 1.25, 0.0, 0.0);
    const auto h = build_hamiltonian(b, Branch::plus);
    CHECK(h.diag[0] == doctest::Approx(1.5625).epsilon(1e-15));
    CHECK(h.offdiag[0] == doctest::Approx(-1.25 * std::sqrt(2.5)).epsilon(1e-15));
    CHECK(h.offdiag[0] == doctest::Approx(-1.97642).epsilon(1e-5));
    const auto hm = build_hamiltonian(b, Branch::minus);
    CHECK(hm.diag[1] == doctest::Approx(h.diag[1] + 2.0 * (1 + 1.25) * 1.0).epsilon(1e-15));
    CHECK(hm.offdiag[1] == doctest::Approx(-(0.0 + 1.25 + 2.0) * std::sqrt(2.0 * 3.5)).epsilon(1e-15));
}

TEST_CASE("eigendecomposition agrees with a dense symmetric solver") {
    for (double s : {-0.2, 0.0, 0.2}) {
        const auto b = make_basis(150, 1.25, s);
        const auto h = build_hamiltonian(b, Branch::plus);
        const auto d = eigendecompose(h);
        const Eigen::MatrixXd a = dense(h);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(a);
        for (int k = 0; k < 150; ++k) {
            CHECK(d.eigenvalues[k] ==
                  doctest::Approx(ref.eigenvalues()(k)).epsilon(1e-11).scale(std::fabs(ref.eigenvalues()(149))));
        }
        Eigen::Map<const Eigen::MatrixXd> U(d.eigenvectors.data(), 150, 150);
        const Eigen::VectorXd lam = Eigen::Map<const Eigen::VectorXd>(d.eigenvalues.data(), 150);
        CHECK((U.transpose() * U - Eigen::MatrixXd::Identity(150, 150)).cwiseAbs().maxCoeff() < 1e-12);
        const double scale = a.cwiseAbs().maxCoeff();
        CHECK((U * lam.asDiagonal() * U.transpose() - a).cwiseAbs().maxCoeff() < 1e-12 * scale);
        CHECK(d.eigenvalues.front() >= -1e-10);
        for (int k = 1; k < 150; ++k) CHECK(d.eigenvalues[k] >= d.eigenvalues[k - 1]);
    }
}

TEST_CASE("evolution equals the dense matrix exponential") {
    const auto p = params_at(0.03);
    const auto b = make_basis(40, p);
    const auto h = build_hamiltonian(b, Branch::plus);
    const auto d = eigendecompose(h);
    const auto cp = model::control_point(model::PlanSpec{}, p, 22500.0, 0.03);
    const auto w0 = forward_initial_weights(b, cp, p);
    for (double t : {0.0, 1.0, 7.5}) {
        const auto wt = evolve(w0, d, t, p.hbar);
        const Eigen::MatrixXd e = (-(0.5 * p.hbar * t) * dense(h)).exp();
        const Eigen::VectorXd ref = e * Eigen::Map<const Eigen::VectorXd>(w0.values.data(), 40);
        for (int n = 0; n < 40; ++n) {
            CHECK(wt.values[n] == doctest::Approx(ref(n)).epsilon(1e-10).scale(ref.cwiseAbs().maxCoeff()));
        }
        CHECK(wt.time_years == doctest::Approx(t));
    }
}

TEST_CASE("backward weights equal quadrature of the defining integral") {
    boost::math::quadrature::exp_sinh<double> integrator;
    for (double s : {-0.1, 0.05}) {
        model::DerivedParams p = params_at(0.03);
        p.s = s;
        p.kappa = p.q + s;
        const auto b = make_basis(50, p.q, s);
        for (double yh : {0.1, 0.364424, 2.0}) {
            model::ControlPoint cp;
            cp.y_hat = yh;
            cp.y0 = 1.0;
            const auto w = backward_initial_weights(b, cp, p);
            for (int n : {0, 1, 5, 17, 33, 49}) {
                const double ref = std::exp(b.log_norms[n]) * integrator.integrate([&](double u) {
                    const double y = yh + u;
                    if (y > 700.0) return 0.0;
                    const auto L = specfun::laguerre_sequence(b.alpha(), n + 1, y);
                    return std::pow(y, p.kappa - 1.0) * std::exp(-y) * L.values[n];
                });
                CHECK(w.values[n] == doctest::Approx(ref).epsilon(1e-8).scale(1e-8));
            }
        }
    }
}

TEST_CASE("duality: forward and backward weights pair to a time-independent value") {
    const model::PlanSpec plan;
    const auto p = params_at(0.03);
    const auto b = make_basis(150, p);
    const auto d = eigendecompose(build_hamiltonian(b, Branch::plus));
    const auto cp = model::control_point(plan, p, 22500.0, 0.03);
    const auto wf0 = forward_initial_weights(b, cp, p);
    const auto wb0 = backward_initial_weights(b, cp, p);
    double first = 0.0;
    for (double t : {0.0, 5.0, 10.0, 15.0, 20.0}) {
        const auto wf = evolve(wf0, d, t, p.hbar);
        const auto wb = evolve(wb0, d, 20.0 - t, p.hbar);
        double pair = 0.0;
        for (int n = 0; n < 150; ++n) pair += wf.values[n] * wb.values[n];
        if (t == 0.0) first = pair;
        CHECK(pair == doctest::Approx(first).epsilon(1e-10));
    }
    // The pairing is the planning-time tail probability.
    const TailSolver solver(plan, model::MarketParams{});
    CHECK(first == doctest::Approx(solver.probability(22500.0, 0.03).p.raw).epsilon(1e-10));
}

TEST_CASE("solver contraction equals evolving the backward weights directly") {
    const model::PlanSpec plan;
    const TailSolver solver(plan, model::MarketParams{});
    for (double xi : {0.025, 0.05}) {
        const auto col = solver.column(xi);
        for (double u0 : {10000.0, 40000.0, 100000.0}) {
            const auto q = solver.probability(col, u0);
            const auto wb = evolve(backward_initial_weights(col.basis, q.point, col.params), *col.decomp,
                                   plan.horizon_years, col.params.hbar);
            const auto direct = bke_tail_probability(col.basis, wb, col.params, q.point.y0);
            CHECK(q.p.raw == doctest::Approx(direct.raw).epsilon(1e-11));
        }
    }
}

TEST_CASE("tail probability is independent of the basis parameter q") {
    const model::PlanSpec plan;
    for (double u0 : {15000.0, 60000.0}) {
        const TailSolver a(plan, model::MarketParams{}, {150, 0.75});
        const TailSolver b(plan, model::MarketParams{}, {150, 1.25});
        const TailSolver c(plan, model::MarketParams{}, {150, 2.25});
        const double pb = b.probability(u0, 0.035).p.raw;
        CHECK(a.probability(u0, 0.035).p.raw == doctest::Approx(pb).epsilon(2e-3).scale(1.0));
        CHECK(c.probability(u0, 0.035).p.raw == doctest::Approx(pb).epsilon(2e-3).scale(1.0));
    }
}

TEST_CASE("tail probability decreases with contributions and stays in [0, 1]") {
    const TailSolver solver(model::PlanSpec{}, model::MarketParams{});
    const auto col = solver.column(0.04);
    double prev = 2.0;
    for (double u0 = 10000.0; u0 <= 100000.0; u0 += 7500.0) {
        const auto r = solver.probability(col, u0);
        CHECK(r.p.clamped >= 0.0);
        CHECK(r.p.clamped <= 1.0);
        CHECK(r.p.raw < prev);
        prev = r.p.raw;
    }
}

TEST_CASE("backward initial state reproduces the step away from the jump") {
    const auto p = params_at(0.03);
    const auto b = make_basis(150, p);
    model::ControlPoint cp;
    cp.y_hat = 0.8;
    cp.y0 = 1.0;
    const auto w = backward_initial_weights(b, cp, p);
    for (double y : {0.2, 0.4, 1.6, 2.5}) {
        const auto r = bke_tail_probability(b, w, p, y);
        CHECK(r.raw == doctest::Approx(y > cp.y_hat ? 1.0 : 0.0).scale(1.0).epsilon(0.06));
    }
}

TEST_CASE("clamping") {
    CHECK(clamp_probability(-0.01).clamped == 0.0);
    CHECK(clamp_probability(1.02).clamped == 1.0);
    CHECK(clamp_probability(0.3).clamped == 0.3);
    CHECK(clamp_probability(-0.01).raw == -0.01);
}

TEST_CASE("decomposition cache memoizes and is safe under concurrent use") {
    DecompositionCache cache;
    const auto b = make_basis(60, 1.25, 0.1);
    const auto first = cache.get(b, Branch::plus);
    CHECK(cache.get(b, Branch::plus) == first);
    CHECK(cache.size() == 1);
    CHECK(cache.misses() == 1);
    std::vector<std::thread> pool;
    std::vector<std::shared_ptr<const SpectralDecomposition>> got(8);
    for (int i = 0; i < 8; ++i) {
        pool.emplace_back([&, i] { got[i] = cache.get(make_basis(60, 1.25, 0.01 * (i % 4)), Branch::plus); });
    }
    for (auto& t : pool) t.join();
    for (int i = 0; i < 8; ++i) CHECK(got[i] == got[i % 4]);
    CHECK(cache.size() == 5);
    cache.clear();
    CHECK(cache.size() == 0);
}

TEST_CASE("gate failures surface as validation errors") {
    const TailSolver solver(model::PlanSpec{}, model::MarketParams{});
    CHECK_THROWS_AS((void)solver.column(-0.2), ValidationError);
}
