#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "mc/mc.hpp"
#include "service/archive.hpp"
#include "service/config.hpp"

namespace scop::service {

// Every payload is a JSON object with "kind" and "engine_version". The CLI
// and the HTTP router print the same dump() text, so identical inputs give
// identical bytes on both paths.

enum class Format { json, csv };

Format parse_format(const std::string& name);

/// Immutable view of a built surface plus its fitted spline.
struct Snapshot {
    SurfaceArchive archive;
    surface::BicubicInterpolant interp;

    explicit Snapshot(SurfaceArchive ar);
};

nlohmann::json probability_payload(const PlanConfig& config, double u0, double xi,
                                   spectral::DecompositionCache* cache = nullptr);

nlohmann::json surface_payload(const SurfaceArchive& archive);

/// Levels default to the archive config's confidence levels.
nlohmann::json frontiers_payload(const Snapshot& snapshot,
                                 const std::optional<std::vector<double>>& levels = std::nullopt);

/// Spline inversion for u0, then a direct spectral evaluation at the answer.
nlohmann::json solve_payload(const Snapshot& snapshot, double xi, double alpha,
                             spectral::DecompositionCache* cache = nullptr);

struct McRequest {
    double u0 = 0.0;
    double xi = 0.0;
    std::optional<std::int64_t> paths;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps_per_year;
    mc::Coordinate coordinate = mc::Coordinate::wealth;
    int threads = 1;
};

/// Thread count is not echoed: results do not depend on it.
nlohmann::json mc_payload(const PlanConfig& config, const McRequest& request);

nlohmann::json diagnose_payload(const PlanConfig& config, double u0, double xi,
                                spectral::DecompositionCache* cache = nullptr);

nlohmann::json error_payload(const std::string& error, const std::string& message,
                             const std::string& correlation_id = {});

std::string render(const nlohmann::json& payload, Format format);

/// Parses "0.03,0.05,..." into levels in (0, 1).
std::vector<double> parse_levels(const std::string& text);

}  // namespace scop::service
