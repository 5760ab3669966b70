#pragma once

#include <string>
#include <vector>

namespace scop::model {

struct PlanSpec {
    double horizon_years = 20.0;
    double initial_wealth = 500000.0;
    double target_wealth = 2500000.0;
    double u0_min = 10000.0;
    double u0_max = 100000.0;
    double xi_min = 0.025;
    double xi_max = 0.05;
    std::vector<double> confidence_levels{0.03, 0.05, 0.075, 0.10, 0.15, 0.20};
};

struct MarketParams {
    double risk_free = 0.025;
    double equity_mean = 0.075;
    double equity_vol = 0.375;
    double equity_fraction = 0.8;
    double txn_cost = 0.0;
};

/// Throws ValidationError naming the first offending field.
void validate(const PlanSpec& plan);
void validate(const MarketParams& market);

struct Gate {
    std::string name;
    bool passed = true;
    std::string message;
};

enum class Branch { plus, minus };

struct DerivedParams {
    double xi = 0.0;
    double rbar = 0.0;
    double sigma = 0.0;
    double hbar = 0.0;
    double eta = 0.0;
    double s = 0.0;
    double g = 0.0;
    double q = 1.25;
    // Exponent of the backward initial integrand y^{kappa-1} e^{-y}.
    double kappa = 0.0;
    double D0 = 0.0;
    double U0 = 0.0;
    double eps0 = 0.0;
    std::vector<Gate> gates;

    [[nodiscard]] bool gates_passed() const;
    [[nodiscard]] std::string gate_summary() const;
    [[nodiscard]] Branch branch() const { return g >= 0.0 ? Branch::plus : Branch::minus; }
    /// Throws ValidationError listing every failed gate.
    void require_gates() const;
};

inline constexpr double kDefaultQ = 1.25;

DerivedParams derive_params(const PlanSpec& plan, const MarketParams& market, double xi,
                            double q = kDefaultQ);

struct ControlPoint {
    double u0 = 0.0;
    double xi = 0.0;
    double y0 = 0.0;
    double y_hat = 0.0;
};

ControlPoint control_point(const PlanSpec& plan, const DerivedParams& params, double u0,
                           double xi);
double y0_to_u0(const PlanSpec& plan, const DerivedParams& params, double y0);
double u0_to_y0(const PlanSpec& plan, const DerivedParams& params, double u0);

/// V(x) = eta x + (hbar/2) e^{-x}.
double langevin_potential(const DerivedParams& params, double x);

/// exp(-V/hbar) = y^{s} e^{-y/2} and exp(+V/hbar) = y^{-s} e^{y/2} at y = e^{-x}.
double exp_minus_potential(const DerivedParams& params, double y);
double exp_plus_potential(const DerivedParams& params, double y);

/// U(x) from the Morse branch form D0 (1 - e^{-(x - x*)})^2 + U0.
double schrodinger_potential(const DerivedParams& params, double x);

/// U(x) = V'(x)^2 / 2 - (hbar/2) V''(x), evaluated directly.
double schrodinger_potential_direct(const DerivedParams& params, double x);

}  // namespace scop::model
