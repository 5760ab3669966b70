#include "model/model.hpp"

#include <cmath>
#include <sstream>

#include "common/errors.hpp"

namespace scop::model {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

Gate make_gate(std::string name, bool passed, const std::string& message) {
    return Gate{std::move(name), passed, passed ? std::string{} : message};
}

}  // namespace

void validate(const PlanSpec& plan) {
    require(std::isfinite(plan.horizon_years) && plan.horizon_years > 0.0,
            "plan.horizon_years must be positive");
    require(std::isfinite(plan.initial_wealth) && plan.initial_wealth > 0.0,
            "plan.initial_wealth must be positive");
    require(std::isfinite(plan.target_wealth) && plan.target_wealth > 0.0,
            "plan.target_wealth must be positive");
    require(std::isfinite(plan.u0_min) && plan.u0_min > 0.0,
            "plan.u0_bounds minimum must be positive");
    require(std::isfinite(plan.u0_max) && plan.u0_min <= plan.u0_max,
            "plan.u0_bounds must be ordered [min, max]");
    require(std::isfinite(plan.xi_min) && std::isfinite(plan.xi_max) &&
                plan.xi_min <= plan.xi_max,
            "plan.xi_bounds must be ordered [min, max]");
    require(std::fabs(plan.xi_min) < 1.0 && std::fabs(plan.xi_max) < 1.0,
            "plan.xi_bounds must lie in (-1, 1)");
    for (double a : plan.confidence_levels) {
        require(a > 0.0 && a < 1.0, "plan.confidence_levels entries must lie in (0, 1)");
    }
}

void validate(const MarketParams& market) {
    require(std::isfinite(market.risk_free), "market.risk_free must be finite");
    require(std::isfinite(market.equity_mean), "market.equity_mean must be finite");
    require(std::isfinite(market.equity_vol) && market.equity_vol > 0.0,
            "market.equity_vol must be positive");
    require(market.equity_fraction >= 0.0 && market.equity_fraction <= 1.0,
            "market.equity_fraction must lie in [0, 1]");
    require(std::isfinite(market.txn_cost) && market.txn_cost >= 0.0,
            "market.txn_cost must be nonnegative");
}

bool DerivedParams::gates_passed() const {
    for (const auto& g : gates) {
        if (!g.passed) return false;
    }
    return true;
}

std::string DerivedParams::gate_summary() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& g : gates) {
        if (g.passed) continue;
        if (!first) os << "; ";
        os << g.message;
        first = false;
    }
    return os.str();
}

void DerivedParams::require_gates() const {
    if (!gates_passed()) throw ValidationError(gate_summary());
}

DerivedParams derive_params(const PlanSpec& plan, const MarketParams& market, double xi,
                            double q) {
    validate(plan);
    validate(market);
    require(std::isfinite(xi) && std::fabs(xi) < 1.0, "xi must lie in (-1, 1)");
    require(std::isfinite(q) && q > 0.0, "q must be positive");

    DerivedParams p;
    p.xi = xi;
    p.q = q;
    p.rbar = market.risk_free + market.equity_fraction * (market.equity_mean - market.risk_free);
    p.sigma = market.equity_fraction * market.equity_vol;
    require(p.sigma > 0.0, "portfolio volatility must be positive (equity_fraction > 0)");
    p.hbar = p.sigma * p.sigma;
    p.eta = xi - p.rbar + 0.5 * p.hbar;
    p.s = p.eta / p.hbar;
    p.g = 2.0 * p.s + 1.0;
    p.kappa = q + p.s;
    const double h2 = p.hbar * p.hbar;
    p.D0 = h2 * p.g * p.g / 8.0;
    p.U0 = -h2 * (2.0 * p.g - 1.0) / 8.0;
    p.eps0 = 2.0 * p.U0 / h2 + p.s + 0.25;

    std::ostringstream s_text;
    s_text << "s = " << p.s;
    p.gates.push_back(make_gate("s_gt_minus_quarter", p.s > -0.25,
                                s_text.str() + " violates s > -1/4 (series convergence)"));
    p.gates.push_back(make_gate("q_gt_s", q > p.s,
                                s_text.str() + " violates q > s (initial-norm expansion)"));
    p.gates.push_back(make_gate("q_gt_minus_s", q > -p.s,
                                s_text.str() + " violates q > -s (vanishing current)"));
    return p;
}

double u0_to_y0(const PlanSpec& plan, const DerivedParams& params, double u0) {
    return 2.0 * u0 / (params.hbar * plan.initial_wealth);
}

double y0_to_u0(const PlanSpec& plan, const DerivedParams& params, double y0) {
    return 0.5 * params.hbar * y0 * plan.initial_wealth;
}

ControlPoint control_point(const PlanSpec& plan, const DerivedParams& params, double u0,
                           double xi) {
    if (!(u0 > 0.0) || !std::isfinite(u0)) {
        throw DomainError("control_point: u0 must be positive");
    }
    ControlPoint cp;
    cp.u0 = u0;
    cp.xi = xi;
    cp.y0 = u0_to_y0(plan, params, u0);
    cp.y_hat = 2.0 * u0 * std::exp(xi * plan.horizon_years) / (params.hbar * plan.target_wealth);
    return cp;
}

double langevin_potential(const DerivedParams& params, double x) {
    return params.eta * x + 0.5 * params.hbar * std::exp(-x);
}

double exp_minus_potential(const DerivedParams& params, double y) {
    return std::exp(params.s * std::log(y) - 0.5 * y);
}

double exp_plus_potential(const DerivedParams& params, double y) {
    return std::exp(-params.s * std::log(y) + 0.5 * y);
}

double schrodinger_potential(const DerivedParams& params, double x) {
    const double g = params.g;
    if (g == 0.0) {
        const double e = std::exp(-x);
        return params.hbar * params.hbar / 8.0 * e * e + params.U0;
    }
    const double x_star = -std::log(std::fabs(g));
    const double shifted = std::exp(-(x - x_star));
    const double bracket = g > 0.0 ? 1.0 - shifted : 1.0 + shifted;
    return params.D0 * bracket * bracket + params.U0;
}

double schrodinger_potential_direct(const DerivedParams& params, double x) {
    const double e = std::exp(-x);
    const double v1 = params.eta - 0.5 * params.hbar * e;
    const double v2 = 0.5 * params.hbar * e;
    return 0.5 * v1 * v1 - 0.5 * params.hbar * v2;
}

}  // namespace scop::model
