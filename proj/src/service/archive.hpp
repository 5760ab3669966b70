#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "service/config.hpp"
#include "surface/surface.hpp"

namespace scop::service {

/// On-disk layout (all integers and doubles little-endian):
///   8 bytes   magic "SCOPSURF"
///   u32       format version (1)
///   u64       header length H
///   H bytes   canonical JSON header (config, grid meta, frontiers, section table)
///   f64[]     y_nodes, xi_nodes, p_values, raw_values in that order
struct SurfaceArchive {
    std::string engine_version = kEngineVersion;
    std::string config_hash;
    PlanConfig config;
    surface::ProbabilitySurface surface;
    surface::FrontierSet frontiers;
};

inline constexpr std::uint32_t kArchiveFormatVersion = 1;

/// Builds the surface for a config and extracts frontiers at its confidence levels.
SurfaceArchive build_archive(const PlanConfig& config, int threads,
                             const std::string& timestamp = {},
                             spectral::DecompositionCache* cache = nullptr);

std::string serialize_archive(const SurfaceArchive& archive);
SurfaceArchive deserialize_archive(const std::string& bytes);

void write_archive(const SurfaceArchive& archive, const std::string& path);
SurfaceArchive read_archive(const std::string& path);

/// Long-format table: y, u0, xi, p, p_raw per node.
std::string archive_csv(const SurfaceArchive& archive);

nlohmann::json frontiers_to_json(const surface::FrontierSet& set, double hbar,
                                 double initial_wealth);
surface::FrontierSet frontiers_from_json(const nlohmann::json& doc);

}  // namespace scop::service
