#include "service/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "common/errors.hpp"
#include "common/hash.hpp"

namespace scop::service {

using nlohmann::json;

namespace {

// Strict view over one JSON object: unknown keys and wrong types are errors.
class Section {
public:
    Section(const json& doc, std::string path, std::set<std::string> allowed)
        : doc_(doc), path_(std::move(path)) {
        if (!doc_.is_object()) throw ValidationError(path_ + " must be a JSON object");
        for (const auto& [key, _] : doc_.items()) {
            if (!allowed.count(key)) throw ValidationError("unknown key " + path_ + "." + key);
        }
    }

    void number(const char* key, double& out) const {
        if (!doc_.contains(key)) return;
        const auto& v = doc_.at(key);
        if (!v.is_number()) throw ValidationError(field(key) + " must be a number");
        out = v.get<double>();
        if (!std::isfinite(out)) throw ValidationError(field(key) + " must be finite");
    }

    template <typename Int>
    void integer(const char* key, Int& out) const {
        if (!doc_.contains(key)) return;
        const auto& v = doc_.at(key);
        if (v.is_number_unsigned()) {
            out = static_cast<Int>(v.get<std::uint64_t>());
        } else if (v.is_number_integer()) {
            const auto i = v.get<std::int64_t>();
            if constexpr (std::is_unsigned_v<Int>) {
                if (i < 0) throw ValidationError(field(key) + " must be nonnegative");
            }
            out = static_cast<Int>(i);
        } else {
            throw ValidationError(field(key) + " must be an integer");
        }
    }

    void range(const char* key, double& lo, double& hi) const {
        if (!doc_.contains(key)) return;
        const auto& v = doc_.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            throw ValidationError(field(key) + " must be a [min, max] pair of numbers");
        }
        lo = v[0].get<double>();
        hi = v[1].get<double>();
    }

    void number_list(const char* key, std::vector<double>& out) const {
        if (!doc_.contains(key)) return;
        const auto& v = doc_.at(key);
        if (!v.is_array()) throw ValidationError(field(key) + " must be an array of numbers");
        out.clear();
        for (const auto& e : v) {
            if (!e.is_number()) throw ValidationError(field(key) + " must be an array of numbers");
            out.push_back(e.get<double>());
        }
    }

    [[nodiscard]] const json* child(const char* key) const {
        return doc_.contains(key) ? &doc_.at(key) : nullptr;
    }

private:
    [[nodiscard]] std::string field(const char* key) const { return path_ + "." + key; }

    const json& doc_;
    std::string path_;
};

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

}  // namespace

PlanConfig parse_config(const json& doc) {
    PlanConfig cfg;
    const Section root(doc, "config", {"plan", "market", "solver", "mc"});
    if (const auto* p = root.child("plan")) {
        const Section s(*p, "plan", {"horizon_years", "initial_wealth", "target_wealth", "u0_bounds",
                                     "xi_bounds", "confidence_levels"});
        s.number("horizon_years", cfg.plan.horizon_years);
        s.number("initial_wealth", cfg.plan.initial_wealth);
        s.number("target_wealth", cfg.plan.target_wealth);
        s.range("u0_bounds", cfg.plan.u0_min, cfg.plan.u0_max);
        s.range("xi_bounds", cfg.plan.xi_min, cfg.plan.xi_max);
        s.number_list("confidence_levels", cfg.plan.confidence_levels);
    }
    if (const auto* m = root.child("market")) {
        const Section s(*m, "market", {"risk_free", "equity_mean", "equity_vol", "equity_fraction",
                                       "txn_cost"});
        s.number("risk_free", cfg.market.risk_free);
        s.number("equity_mean", cfg.market.equity_mean);
        s.number("equity_vol", cfg.market.equity_vol);
        s.number("equity_fraction", cfg.market.equity_fraction);
        s.number("txn_cost", cfg.market.txn_cost);
    }
    if (const auto* v = root.child("solver")) {
        const Section s(*v, "solver", {"basis_size", "q", "y_nodes", "xi_nodes", "refine",
                                       "frontier_tolerance"});
        s.integer("basis_size", cfg.solver.basis_size);
        s.number("q", cfg.solver.q);
        s.integer("y_nodes", cfg.solver.y_nodes);
        s.integer("xi_nodes", cfg.solver.xi_nodes);
        s.integer("refine", cfg.solver.refine);
        s.number("frontier_tolerance", cfg.solver.frontier_tolerance);
    }
    if (const auto* c = root.child("mc")) {
        const Section s(*c, "mc", {"paths", "steps_per_year", "seed"});
        s.integer("paths", cfg.mc.paths);
        s.integer("steps_per_year", cfg.mc.steps_per_year);
        s.integer("seed", cfg.mc.seed);
    }
    validate(cfg);
    return cfg;
}

PlanConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

PlanConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void validate(const PlanConfig& config) {
    model::validate(config.plan);
    model::validate(config.market);
    const auto& s = config.solver;
    require(s.basis_size >= 2 && s.basis_size <= 1000, "solver.basis_size must lie in [2, 1000]");
    require(s.q > 0.0, "solver.q must be positive");
    require(s.y_nodes >= 4 && s.xi_nodes >= 4, "solver grid counts must be at least 4");
    require(s.y_nodes <= 5000 && s.xi_nodes <= 5000, "solver grid counts must be at most 5000");
    require(s.refine >= 1 && s.refine <= 64, "solver.refine must lie in [1, 64]");
    require(s.frontier_tolerance > 0.0, "solver.frontier_tolerance must be positive");
    require(config.plan.u0_max > config.plan.u0_min, "plan.u0_bounds must span a nonempty range");
    require(config.plan.xi_max > config.plan.xi_min, "plan.xi_bounds must span a nonempty range");
    require(config.mc.paths >= 1, "mc.paths must be positive");
    require(config.mc.steps_per_year >= 1, "mc.steps_per_year must be positive");
    // s is affine in xi, so the gates hold on the whole band iff they hold at both ends.
    for (double xi : {config.plan.xi_min, config.plan.xi_max}) {
        const auto params = model::derive_params(config.plan, config.market, xi, s.q);
        if (!params.gates_passed()) {
            std::ostringstream os;
            os << "plan.xi_bounds endpoint " << xi << ": " << params.gate_summary();
            throw ValidationError(os.str());
        }
    }
}

json to_json(const PlanConfig& c) {
    json plan = {
        {"horizon_years", c.plan.horizon_years},
        {"initial_wealth", c.plan.initial_wealth},
        {"target_wealth", c.plan.target_wealth},
        {"u0_bounds", {c.plan.u0_min, c.plan.u0_max}},
        {"xi_bounds", {c.plan.xi_min, c.plan.xi_max}},
        {"confidence_levels", c.plan.confidence_levels},
    };
    json market = {
        {"risk_free", c.market.risk_free},
        {"equity_mean", c.market.equity_mean},
        {"equity_vol", c.market.equity_vol},
        {"equity_fraction", c.market.equity_fraction},
        {"txn_cost", c.market.txn_cost},
    };
    json solver = {
        {"basis_size", c.solver.basis_size},
        {"q", c.solver.q},
        {"y_nodes", c.solver.y_nodes},
        {"xi_nodes", c.solver.xi_nodes},
        {"refine", c.solver.refine},
        {"frontier_tolerance", c.solver.frontier_tolerance},
    };
    json mc = {
        {"paths", c.mc.paths},
        {"steps_per_year", c.mc.steps_per_year},
        {"seed", c.mc.seed},
    };
    return {{"plan", plan}, {"market", market}, {"solver", solver}, {"mc", mc}};
}

std::string config_hash(const PlanConfig& config) {
    return hex64(fnv1a64(to_json(config).dump()));
}

spectral::SolverSettings solver_settings(const PlanConfig& config) {
    return {config.solver.basis_size, config.solver.q};
}

}  // namespace scop::service
