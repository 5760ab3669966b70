#include "service/archive.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "common/errors.hpp"

namespace scop::service {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "archive I/O writes native doubles and assumes little-endian");

namespace {

constexpr char kMagic[8] = {'S', 'C', 'O', 'P', 'S', 'U', 'R', 'F'};

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw IoError("archive truncated");
    T v;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

void put_doubles(std::string& out, const std::vector<double>& v) {
    out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
}

std::vector<double> take_doubles(const std::string& in, std::size_t& pos, std::size_t count) {
    if (pos + count * sizeof(double) > in.size()) throw IoError("archive truncated");
    std::vector<double> v(count);
    std::memcpy(v.data(), in.data() + pos, count * sizeof(double));
    pos += count * sizeof(double);
    return v;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

json frontiers_to_json(const surface::FrontierSet& set, double hbar, double initial_wealth) {
    json levels = json::array();
    for (const auto& level : set.levels) {
        json lines = json::array();
        for (const auto& line : level.polylines) {
            json verts = json::array();
            for (const auto& v : line) {
                verts.push_back({{"xi", v.xi},
                                 {"y", v.y},
                                 {"u0", 0.5 * hbar * v.y * initial_wealth},
                                 {"residual", v.residual}});
            }
            lines.push_back(std::move(verts));
        }
        levels.push_back({{"alpha", level.alpha},
                          {"empty", level.empty},
                          {"note", level.note},
                          {"polylines", std::move(lines)}});
    }
    return levels;
}

surface::FrontierSet frontiers_from_json(const json& doc) {
    surface::FrontierSet set;
    for (const auto& l : doc) {
        surface::FrontierLevel level;
        level.alpha = l.at("alpha").get<double>();
        level.empty = l.at("empty").get<bool>();
        level.note = l.at("note").get<std::string>();
        for (const auto& line : l.at("polylines")) {
            surface::Polyline pl;
            for (const auto& v : line) {
                pl.push_back({v.at("xi").get<double>(), v.at("y").get<double>(),
                              v.at("residual").get<double>()});
            }
            level.polylines.push_back(std::move(pl));
        }
        set.levels.push_back(std::move(level));
    }
    return set;
}

SurfaceArchive build_archive(const PlanConfig& config, int threads, const std::string& timestamp,
                             spectral::DecompositionCache* cache) {
    validate(config);
    SurfaceArchive ar;
    ar.config = config;
    ar.config_hash = config_hash(config);
    const auto grid = surface::make_grid(config.plan, config.market, config.solver.y_nodes,
                                         config.solver.xi_nodes);
    surface::BuildSettings settings;
    settings.solver = solver_settings(config);
    settings.threads = threads;
    settings.timestamp = timestamp;
    ar.surface = surface::build_surface(config.plan, config.market, grid, settings, cache);
    if (ar.surface.failures.empty()) {
        const auto interp = surface::fit_spline(ar.surface);
        ar.frontiers = surface::extract_frontiers(
            interp, config.plan.confidence_levels,
            {config.solver.refine, config.solver.frontier_tolerance});
    }
    return ar;
}

std::string serialize_archive(const SurfaceArchive& ar) {
    const auto& s = ar.surface;
    const std::size_t ny = s.y_count();
    const std::size_t nx = s.xi_count();
    if (s.p_values.size() != ny * nx || s.raw_values.size() != ny * nx) {
        throw DomainError("archive: matrix shape does not match grid");
    }
    const auto params = model::derive_params(ar.config.plan, ar.config.market, ar.config.plan.xi_min,
                                             ar.config.solver.q);
    json failures = json::array();
    for (const auto& f : s.failures) {
        failures.push_back({{"y_index", f.y_index}, {"xi_index", f.xi_index}, {"message", f.message}});
    }
    const json header = {
        {"format", "scop-surface"},
        {"format_version", kArchiveFormatVersion},
        {"engine_version", ar.engine_version},
        {"config_hash", ar.config_hash},
        {"config", to_json(ar.config)},
        {"grid", {{"y_count", ny}, {"xi_count", nx}, {"provenance", s.grid.provenance}}},
        {"meta",
         {{"basis_size", s.basis_size},
          {"q", s.q},
          {"created_utc", s.created_utc},
          {"failures", failures}}},
        {"frontiers", frontiers_to_json(ar.frontiers, params.hbar, ar.config.plan.initial_wealth)},
        {"sections", json::array({{{"name", "y_nodes"}, {"count", ny}},
                                  {{"name", "xi_nodes"}, {"count", nx}},
                                  {{"name", "p_values"}, {"count", ny * nx}},
                                  {{"name", "raw_values"}, {"count", ny * nx}}})},
    };
    const std::string text = header.dump();
    std::string out;
    out.append(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kArchiveFormatVersion);
    put<std::uint64_t>(out, text.size());
    out += text;
    put_doubles(out, s.grid.y_nodes);
    put_doubles(out, s.grid.xi_nodes);
    put_doubles(out, s.p_values);
    put_doubles(out, s.raw_values);
    return out;
}

SurfaceArchive deserialize_archive(const std::string& bytes) {
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw IoError("not a surface archive (bad magic)");
    }
    std::size_t pos = sizeof kMagic;
    const auto version = take<std::uint32_t>(bytes, pos);
    if (version != kArchiveFormatVersion) {
        throw IoError("unsupported archive format version " + std::to_string(version));
    }
    const auto len = take<std::uint64_t>(bytes, pos);
    if (len > bytes.size() - pos) throw IoError("archive truncated");
    json header;
    try {
        header = json::parse(bytes.substr(pos, len));
    } catch (const json::parse_error& e) {
        throw IoError(std::string("archive header is not valid JSON: ") + e.what());
    }
    pos += len;

    SurfaceArchive ar;
    try {
        ar.engine_version = header.at("engine_version").get<std::string>();
        ar.config_hash = header.at("config_hash").get<std::string>();
        ar.config = parse_config(header.at("config"));
        const auto ny = header.at("grid").at("y_count").get<std::size_t>();
        const auto nx = header.at("grid").at("xi_count").get<std::size_t>();
        auto& s = ar.surface;
        s.grid.provenance = header.at("grid").at("provenance").get<std::string>();
        const auto& meta = header.at("meta");
        s.basis_size = meta.at("basis_size").get<int>();
        s.q = meta.at("q").get<double>();
        s.created_utc = meta.at("created_utc").get<std::string>();
        for (const auto& f : meta.at("failures")) {
            s.failures.push_back({f.at("y_index").get<std::size_t>(),
                                  f.at("xi_index").get<std::size_t>(),
                                  f.at("message").get<std::string>()});
        }
        ar.frontiers = frontiers_from_json(header.at("frontiers"));
        s.grid.y_nodes = take_doubles(bytes, pos, ny);
        s.grid.xi_nodes = take_doubles(bytes, pos, nx);
        s.p_values = take_doubles(bytes, pos, ny * nx);
        s.raw_values = take_doubles(bytes, pos, ny * nx);
    } catch (const json::exception& e) {
        throw IoError(std::string("archive header malformed: ") + e.what());
    }
    if (pos != bytes.size()) throw IoError("archive has trailing bytes");
    return ar;
}

void write_archive(const SurfaceArchive& archive, const std::string& path) {
    const std::string bytes = serialize_archive(archive);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path);
}

SurfaceArchive read_archive(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open archive " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_archive(ss.str());
}

std::string archive_csv(const SurfaceArchive& ar) {
    const auto& s = ar.surface;
    const auto params = model::derive_params(ar.config.plan, ar.config.market, ar.config.plan.xi_min,
                                             ar.config.solver.q);
    std::string out = "y,u0,xi,p,p_raw\n";
    for (std::size_t i = 0; i < s.y_count(); ++i) {
        const double y = s.grid.y_nodes[i];
        const double u0 = model::y0_to_u0(ar.config.plan, params, y);
        for (std::size_t j = 0; j < s.xi_count(); ++j) {
            out += num(y) + ',' + num(u0) + ',' + num(s.grid.xi_nodes[j]) + ',' + num(s.p(i, j)) +
                   ',' + num(s.raw(i, j)) + '\n';
        }
    }
    return out;
}

}  // namespace scop::service
