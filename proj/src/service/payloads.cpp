#include "service/payloads.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "common/errors.hpp"
#include "diagnostics/diagnostics.hpp"

namespace scop::service {

using nlohmann::json;

namespace {

json envelope(const char* kind) {
    return {{"kind", kind}, {"engine_version", kEngineVersion}};
}

json gates_json(const std::vector<model::Gate>& gates) {
    json out = json::array();
    for (const auto& g : gates) {
        out.push_back({{"name", g.name}, {"passed", g.passed}, {"message", g.message}});
    }
    return out;
}

json point_json(const model::ControlPoint& p) {
    return {{"u0", p.u0}, {"xi", p.xi}, {"y0", p.y0}, {"y_hat", p.y_hat}};
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string cell(const json& v) {
    if (v.is_number_float()) return num(v.get<double>());
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string quoted = "\"";
        for (char c : s) {
            if (c == '"') quoted += '"';
            quoted += c;
        }
        return quoted + '"';
    }
    if (v.is_null()) return "";
    return v.dump();
}

void flatten(const json& v, const std::string& prefix, std::string& out) {
    if (v.is_object()) {
        for (const auto& [k, child] : v.items()) {
            flatten(child, prefix.empty() ? k : prefix + "." + k, out);
        }
    } else if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            flatten(v[i], prefix + "[" + std::to_string(i) + "]", out);
        }
    } else {
        out += prefix + ',' + cell(v) + '\n';
    }
}

std::string surface_csv(const json& p) {
    std::string out = "y,u0,xi,p,p_raw\n";
    const auto& g = p.at("grid");
    const auto& ys = g.at("y_nodes");
    const auto& us = g.at("u0_nodes");
    const auto& xs = g.at("xi_nodes");
    for (std::size_t i = 0; i < ys.size(); ++i) {
        for (std::size_t j = 0; j < xs.size(); ++j) {
            out += cell(ys[i]) + ',' + cell(us[i]) + ',' + cell(xs[j]) + ',' +
                   cell(p.at("p")[i][j]) + ',' + cell(p.at("p_raw")[i][j]) + '\n';
        }
    }
    return out;
}

std::string frontiers_csv(const json& p) {
    std::string out = "alpha,polyline,vertex,xi,y,u0,residual\n";
    for (const auto& level : p.at("frontiers")) {
        const auto& lines = level.at("polylines");
        for (std::size_t l = 0; l < lines.size(); ++l) {
            for (std::size_t v = 0; v < lines[l].size(); ++v) {
                const auto& x = lines[l][v];
                out += cell(level.at("alpha")) + ',' + std::to_string(l) + ',' + std::to_string(v) +
                       ',' + cell(x.at("xi")) + ',' + cell(x.at("y")) + ',' + cell(x.at("u0")) +
                       ',' + cell(x.at("residual")) + '\n';
            }
        }
    }
    return out;
}

const char* coordinate_name(mc::Coordinate c) {
    return c == mc::Coordinate::wealth ? "wealth" : "verhulst";
}

}  // namespace

Format parse_format(const std::string& name) {
    if (name == "json") return Format::json;
    if (name == "csv") return Format::csv;
    throw ValidationError("format must be json or csv, got '" + name + "'");
}

Snapshot::Snapshot(SurfaceArchive ar)
    : archive(std::move(ar)), interp([this] {
          if (!archive.surface.failures.empty()) {
              throw StateError("surface has " + std::to_string(archive.surface.failures.size()) +
                               " failed nodes");
          }
          return surface::fit_spline(archive.surface);
      }()) {}

json probability_payload(const PlanConfig& config, double u0, double xi,
                         spectral::DecompositionCache* cache) {
    const spectral::TailSolver solver(config.plan, config.market, solver_settings(config), cache);
    const auto col = solver.column(xi);
    const auto query = solver.probability(col, u0);
    json out = envelope("probability");
    out["config_hash"] = config_hash(config);
    out["point"] = point_json(query.point);
    out["p"] = query.p.clamped;
    out["p_raw"] = query.p.raw;
    out["basis_size"] = config.solver.basis_size;
    out["q"] = config.solver.q;
    return out;
}

json surface_payload(const SurfaceArchive& ar) {
    const auto& s = ar.surface;
    const auto params = model::derive_params(ar.config.plan, ar.config.market,
                                             ar.config.plan.xi_min, ar.config.solver.q);
    json u0s = json::array();
    for (double y : s.grid.y_nodes) u0s.push_back(model::y0_to_u0(ar.config.plan, params, y));
    json p = json::array();
    json raw = json::array();
    for (std::size_t i = 0; i < s.y_count(); ++i) {
        json prow = json::array();
        json rrow = json::array();
        for (std::size_t j = 0; j < s.xi_count(); ++j) {
            prow.push_back(s.p(i, j));
            rrow.push_back(s.raw(i, j));
        }
        p.push_back(std::move(prow));
        raw.push_back(std::move(rrow));
    }
    json failures = json::array();
    for (const auto& f : s.failures) {
        failures.push_back({{"y_index", f.y_index}, {"xi_index", f.xi_index}, {"message", f.message}});
    }
    json out = envelope("surface");
    out["config_hash"] = ar.config_hash;
    out["grid"] = {{"y_nodes", s.grid.y_nodes},
                   {"xi_nodes", s.grid.xi_nodes},
                   {"u0_nodes", u0s},
                   {"provenance", s.grid.provenance}};
    out["p"] = std::move(p);
    out["p_raw"] = std::move(raw);
    out["basis_size"] = s.basis_size;
    out["q"] = s.q;
    out["created_utc"] = s.created_utc;
    out["failures"] = std::move(failures);
    return out;
}

json frontiers_payload(const Snapshot& snap, const std::optional<std::vector<double>>& levels) {
    const auto& cfg = snap.archive.config;
    const auto& want = levels ? *levels : cfg.plan.confidence_levels;
    const auto set = surface::extract_frontiers(
        snap.interp, want, {cfg.solver.refine, cfg.solver.frontier_tolerance});
    const auto params =
        model::derive_params(cfg.plan, cfg.market, cfg.plan.xi_min, cfg.solver.q);
    json out = envelope("frontiers");
    out["config_hash"] = snap.archive.config_hash;
    out["levels"] = want;
    out["frontiers"] = frontiers_to_json(set, params.hbar, cfg.plan.initial_wealth);
    return out;
}

json solve_payload(const Snapshot& snap, double xi, double alpha,
                   spectral::DecompositionCache* cache) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    const auto& cfg = snap.archive.config;
    if (!(xi >= cfg.plan.xi_min && xi <= cfg.plan.xi_max)) {
        throw ValidationError("xi must lie within plan.xi_bounds");
    }
    const auto params = model::derive_params(cfg.plan, cfg.market, xi, cfg.solver.q);
    const auto result = surface::solve_u0(snap.interp, cfg.plan, params, xi, alpha);
    json out = envelope("solve");
    out["config_hash"] = snap.archive.config_hash;
    out["xi"] = xi;
    out["alpha"] = alpha;
    out["status"] = surface::to_string(result.status);
    if (result.status == surface::SolveStatus::found) {
        const spectral::TailSolver solver(cfg.plan, cfg.market, solver_settings(cfg), cache);
        const auto check = solver.probability(*result.u0, xi);
        out["u0"] = *result.u0;
        out["y0"] = *result.y0;
        out["p_spline"] = result.p_at_solution;
        out["p_spectral"] = check.p.clamped;
    } else {
        out["u0"] = nullptr;
        out["y0"] = nullptr;
        out["p_spline"] = nullptr;
        out["p_spectral"] = nullptr;
    }
    return out;
}

json mc_payload(const PlanConfig& config, const McRequest& req) {
    mc::SimConfig sim;
    sim.n_paths = req.paths.value_or(config.mc.paths);
    sim.seed = req.seed.value_or(config.mc.seed);
    sim.steps_per_year = req.steps_per_year.value_or(config.mc.steps_per_year);
    sim.coordinate = req.coordinate;
    sim.threads = req.threads;
    const auto est = mc::simulate(config.plan, config.market, req.u0, req.xi, sim);
    json out = envelope("mc");
    out["config_hash"] = config_hash(config);
    out["u0"] = req.u0;
    out["xi"] = req.xi;
    out["coordinate"] = coordinate_name(req.coordinate);
    out["paths"] = sim.n_paths;
    out["steps_per_year"] = sim.steps_per_year;
    out["n_steps"] = est.n_steps;
    out["seed"] = sim.seed;
    out["hits"] = est.hits;
    out["p_hat"] = est.p_hat;
    out["std_error"] = est.std_error;
    return out;
}

json diagnose_payload(const PlanConfig& config, double u0, double xi,
                      spectral::DecompositionCache* cache) {
    const auto params = model::derive_params(config.plan, config.market, xi, config.solver.q);
    const auto point = model::control_point(config.plan, params, u0, xi);
    json out = envelope("diagnose");
    out["config_hash"] = config_hash(config);
    out["point"] = point_json(point);
    out["params"] = {{"rbar", params.rbar},   {"sigma", params.sigma}, {"hbar", params.hbar},
                     {"eta", params.eta},     {"s", params.s},         {"g", params.g},
                     {"q", params.q},         {"kappa", params.kappa},
                     {"branch", params.branch() == model::Branch::plus ? "plus" : "minus"}};
    out["gates"] = gates_json(params.gates);
    out["gates_passed"] = params.gates_passed();
    if (!params.gates_passed()) return out;

    const spectral::TailSolver solver(config.plan, config.market, solver_settings(config), cache);
    const auto col = solver.column(xi);
    const double T = config.plan.horizon_years;
    const auto wf = spectral::evolve(spectral::forward_initial_weights(col.basis, point, params),
                                     *col.decomp, T, params.hbar);
    const auto norm = diagnostics::total_norm(col.basis, wf, params, point.y0);
    out["norm"] = {{"t_years", T},
                   {"total_norm", norm.total_norm},
                   {"deviation", norm.total_norm - 1.0},
                   {"residual_estimate_t0", norm.residual_estimate}};

    // Near the origin J ~ y^{s+q}; measure the log-log slope over one decade.
    const double y_lo = 1e-6;
    const double y_hi = 1e-5;
    const double j_lo = diagnostics::probability_current(col.basis, wf, params, y_lo);
    const double j_hi = diagnostics::probability_current(col.basis, wf, params, y_hi);
    json current = {{"y", {y_lo, y_hi}}, {"J", {j_lo, j_hi}}, {"expected_exponent", params.s + params.q}};
    if (j_lo != 0.0 && j_hi != 0.0 && (j_lo > 0.0) == (j_hi > 0.0)) {
        current["exponent"] = std::log(j_hi / j_lo) / std::log(y_hi / y_lo);
    } else {
        current["exponent"] = nullptr;
    }
    out["current"] = std::move(current);

    const int N = config.solver.basis_size;
    json finite = json::array();
    for (double f : {0.5, 0.9, 1.1, 2.0}) {
        const double y = f * point.y0;
        const auto d = diagnostics::finite_n_initial_density(y, point.y0, N, params);
        finite.push_back({{"y", y}, {"exact", d.exact}, {"asymptotic", d.asymptotic},
                          {"envelope", d.envelope}});
    }
    out["finite_n_density"] = std::move(finite);

    if (std::fabs(params.q - 1.25) <= 1e-12) {
        const auto wb = spectral::backward_initial_weights(col.basis, point, params);
        json backward = json::array();
        for (double f : {0.5, 0.9, 1.1, 2.0}) {
            const double y = f * point.y_hat;
            const auto a = diagnostics::backward_initial_asymptotic(y, point.y_hat, N, params);
            const auto phi = spectral::basis_values(col.basis, y);
            double series = 0.0;
            for (int n = 0; n < N; ++n) series += wb.values[n] * phi[n];
            backward.push_back({{"y", y}, {"series", series}, {"asymptotic", a.value},
                                {"leading", a.leading}, {"correction", a.correction},
                                {"flagged", a.flagged}, {"endpoint_asymptotic", a.endpoint_value}});
        }
        out["backward_initial"] = std::move(backward);
    } else {
        out["backward_initial"] = nullptr;
    }
    return out;
}

json error_payload(const std::string& error, const std::string& message,
                   const std::string& correlation_id) {
    json out = envelope("error");
    out["error"] = error;
    out["message"] = message;
    if (!correlation_id.empty()) out["correlation_id"] = correlation_id;
    return out;
}

std::string render(const json& payload, Format format) {
    if (format == Format::json) return payload.dump() + '\n';
    const auto kind = payload.value("kind", std::string{});
    if (kind == "surface") return surface_csv(payload);
    if (kind == "frontiers") return frontiers_csv(payload);
    std::string out = "field,value\n";
    flatten(payload, "", out);
    return out;
}

std::vector<double> parse_levels(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto token = text.substr(start, comma == std::string::npos ? std::string::npos
                                                                        : comma - start);
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (token.empty() || end != token.c_str() + token.size() || !(v > 0.0 && v < 1.0)) {
            throw ValidationError("levels must be a comma-separated list in (0, 1), got '" + text + "'");
        }
        out.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace scop::service
