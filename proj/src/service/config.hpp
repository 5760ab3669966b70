#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>

#include "model/model.hpp"
#include "surface/surface.hpp"

namespace scop::service {

inline constexpr const char* kEngineVersion = "scop 0.1.0";

struct SolverConfig {
    int basis_size = spectral::kDefaultBasisSize;
    double q = model::kDefaultQ;
    int y_nodes = surface::kDefaultYNodes;
    int xi_nodes = surface::kDefaultXiNodes;
    int refine = surface::kDefaultRefine;
    double frontier_tolerance = surface::kDefaultFrontierTol;
};

struct McConfig {
    std::int64_t paths = 200000;
    int steps_per_year = 252;
    std::uint64_t seed = 7;
};

/// Every section and field is optional; omitted values take the defaults
/// above. Unknown keys anywhere are rejected.
struct PlanConfig {
    model::PlanSpec plan;
    model::MarketParams market;
    SolverConfig solver;
    McConfig mc;
};

PlanConfig parse_config(const nlohmann::json& doc);
PlanConfig parse_config_text(const std::string& text);
PlanConfig load_config(const std::string& path);

/// Range checks plus the parameter gates at both ends of the xi bounds.
void validate(const PlanConfig& config);

/// Fully populated canonical form (sorted keys, every default spelled out).
nlohmann::json to_json(const PlanConfig& config);

/// FNV-1a of the canonical JSON text, as 16 hex digits.
std::string config_hash(const PlanConfig& config);

spectral::SolverSettings solver_settings(const PlanConfig& config);

}  // namespace scop::service
