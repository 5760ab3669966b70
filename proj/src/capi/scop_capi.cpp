#include "scop/scop.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "common/errors.hpp"
#include "service/service.hpp"

using namespace scop;
using scop::service::Format;

struct scop_engine {
    service::PlanConfig config;
    spectral::DecompositionCache cache;
};

struct scop_archive {
    service::SurfaceArchive archive;
    // Absent when the surface has failed nodes; spline queries then report STATE.
    std::unique_ptr<const service::Snapshot> snapshot;
};

struct scop_service {
    std::unique_ptr<service::Service> impl;
};

namespace {

thread_local std::string last_error;

scop_status fail(scop_status status, const std::string& message) {
    last_error = message;
    return status;
}

// Null pointers and bad enum values from the caller.
struct ArgumentError : Error {
    using Error::Error;
};

// Runs body() and maps the error taxonomy onto status codes.
template <typename Body>
scop_status api(Body&& body) noexcept {
    try {
        last_error.clear();
        body();
        return SCOP_OK;
    } catch (const ArgumentError& e) {
        return fail(SCOP_INVALID_ARGUMENT, e.what());
    } catch (const ValidationError& e) {
        return fail(SCOP_VALIDATION, e.what());
    } catch (const DomainError& e) {
        return fail(SCOP_DOMAIN, e.what());
    } catch (const ConvergenceError& e) {
        return fail(SCOP_CONVERGENCE, e.what());
    } catch (const IoError& e) {
        return fail(SCOP_IO, e.what());
    } catch (const NotFoundError& e) {
        return fail(SCOP_NOT_FOUND, e.what());
    } catch (const StateError& e) {
        return fail(SCOP_STATE, e.what());
    } catch (const std::bad_alloc&) {
        return fail(SCOP_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SCOP_INTERNAL, e.what());
    } catch (...) {
        return fail(SCOP_INTERNAL, "unknown exception");
    }
}

void require(const void* p, const char* name) {
    if (!p) throw ArgumentError(std::string(name) + " must not be null");
}

Format to_format(scop_format f) {
    if (f == SCOP_FORMAT_JSON) return Format::json;
    if (f == SCOP_FORMAT_CSV) return Format::csv;
    throw ArgumentError("unknown scop_format value");
}

char* copy_out(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

const service::Snapshot& snapshot_of(const scop_archive* a) {
    if (!a->snapshot) {
        throw StateError("surface has failed nodes; spline queries are unavailable");
    }
    return *a->snapshot;
}

scop_archive* wrap(service::SurfaceArchive ar) {
    auto h = std::make_unique<scop_archive>();
    h->archive = std::move(ar);
    if (h->archive.surface.failures.empty()) {
        h->snapshot = std::make_unique<const service::Snapshot>(h->archive);
    }
    return h.release();
}

}  // namespace

extern "C" {

const char* scop_engine_version(void) { return service::kEngineVersion; }

const char* scop_last_error(void) { return last_error.c_str(); }

const char* scop_status_name(scop_status status) {
    switch (status) {
        case SCOP_OK: return "ok";
        case SCOP_INVALID_ARGUMENT: return "invalid_argument";
        case SCOP_VALIDATION: return "validation";
        case SCOP_DOMAIN: return "domain";
        case SCOP_CONVERGENCE: return "convergence";
        case SCOP_IO: return "io";
        case SCOP_NOT_FOUND: return "not_found";
        case SCOP_STATE: return "state";
        case SCOP_INTERNAL: return "internal";
    }
    return "unknown";
}

void scop_string_free(char* s) { std::free(s); }

scop_status scop_engine_create(const char* config_json, scop_engine** out) {
    return api([&] {
        require(config_json, "config_json");
        require(out, "out");
        auto e = std::make_unique<scop_engine>();
        e->config = service::parse_config_text(config_json);
        *out = e.release();
    });
}

scop_status scop_engine_load(const char* config_path, scop_engine** out) {
    return api([&] {
        require(config_path, "config_path");
        require(out, "out");
        auto e = std::make_unique<scop_engine>();
        e->config = service::load_config(config_path);
        *out = e.release();
    });
}

void scop_engine_destroy(scop_engine* engine) { delete engine; }

scop_status scop_engine_config(const scop_engine* engine, char** out_json) {
    return api([&] {
        require(engine, "engine");
        require(out_json, "out_json");
        *out_json = copy_out(service::to_json(engine->config).dump());
    });
}

scop_status scop_probability(scop_engine* engine, double u0, double xi, double* p, double* p_raw) {
    return api([&] {
        require(engine, "engine");
        const spectral::TailSolver solver(engine->config.plan, engine->config.market,
                                          service::solver_settings(engine->config), &engine->cache);
        const auto r = solver.probability(u0, xi);
        if (p) *p = r.p.clamped;
        if (p_raw) *p_raw = r.p.raw;
    });
}

scop_status scop_probability_report(scop_engine* engine, double u0, double xi, scop_format format,
                                    char** out) {
    return api([&] {
        require(engine, "engine");
        require(out, "out");
        const auto f = to_format(format);
        *out = copy_out(service::render(
            service::probability_payload(engine->config, u0, xi, &engine->cache), f));
    });
}

scop_status scop_mc_report(scop_engine* engine, double u0, double xi,
                           const scop_mc_options* options, scop_format format, char** out) {
    return api([&] {
        require(engine, "engine");
        require(out, "out");
        const auto f = to_format(format);
        service::McRequest req;
        req.u0 = u0;
        req.xi = xi;
        if (options) {
            if (options->paths < 0) throw ValidationError("paths must be positive");
            if (options->paths > 0) req.paths = options->paths;
            if (options->has_seed || options->seed != 0) req.seed = options->seed;
            if (options->steps_per_year < 0) throw ValidationError("steps_per_year must be positive");
            if (options->steps_per_year > 0) req.steps_per_year = options->steps_per_year;
            if (options->coordinate == SCOP_COORD_VERHULST) {
                req.coordinate = mc::Coordinate::verhulst;
            } else if (options->coordinate != SCOP_COORD_WEALTH) {
                throw ArgumentError("unknown scop_coordinate value");
            }
            if (options->threads > 0) req.threads = options->threads;
        }
        *out = copy_out(service::render(service::mc_payload(engine->config, req), f));
    });
}

scop_status scop_diagnose_report(scop_engine* engine, double u0, double xi, scop_format format,
                                 char** out) {
    return api([&] {
        require(engine, "engine");
        require(out, "out");
        const auto f = to_format(format);
        *out = copy_out(service::render(
            service::diagnose_payload(engine->config, u0, xi, &engine->cache), f));
    });
}

scop_status scop_surface_build(scop_engine* engine, int threads, const char* timestamp,
                               scop_archive** out) {
    return api([&] {
        require(engine, "engine");
        require(out, "out");
        *out = wrap(service::build_archive(engine->config, threads < 1 ? 1 : threads,
                                           timestamp ? timestamp : "", &engine->cache));
    });
}

scop_status scop_archive_read(const char* path, scop_archive** out) {
    return api([&] {
        require(path, "path");
        require(out, "out");
        *out = wrap(service::read_archive(path));
    });
}

scop_status scop_archive_write(const scop_archive* archive, const char* path) {
    return api([&] {
        require(archive, "archive");
        require(path, "path");
        service::write_archive(archive->archive, path);
    });
}

void scop_archive_destroy(scop_archive* archive) { delete archive; }

scop_status scop_surface_report(const scop_archive* archive, scop_format format, char** out) {
    return api([&] {
        require(archive, "archive");
        require(out, "out");
        const auto f = to_format(format);
        *out = copy_out(service::render(service::surface_payload(archive->archive), f));
    });
}

scop_status scop_frontiers_report(const scop_archive* archive, const double* levels,
                                  size_t n_levels, scop_format format, char** out) {
    return api([&] {
        require(archive, "archive");
        require(out, "out");
        const auto f = to_format(format);
        std::optional<std::vector<double>> want;
        if (levels) {
            want.emplace(levels, levels + n_levels);
            for (double a : *want) {
                if (!(a > 0.0 && a < 1.0)) throw ValidationError("levels must lie in (0, 1)");
            }
        }
        *out = copy_out(service::render(service::frontiers_payload(snapshot_of(archive), want), f));
    });
}

scop_status scop_solve_report(const scop_archive* archive, double xi, double alpha,
                              scop_format format, char** out) {
    return api([&] {
        require(archive, "archive");
        require(out, "out");
        const auto f = to_format(format);
        *out = copy_out(service::render(service::solve_payload(snapshot_of(archive), xi, alpha), f));
    });
}

scop_status scop_service_create(int build_workers, int build_threads, scop_service** out) {
    return api([&] {
        require(out, "out");
        service::ServiceOptions opts;
        opts.build_workers = build_workers < 1 ? 1 : build_workers;
        opts.build_threads = build_threads < 1 ? 1 : build_threads;
        auto h = std::make_unique<scop_service>();
        h->impl = std::make_unique<service::Service>(opts);
        *out = h.release();
    });
}

scop_status scop_service_add_archive(scop_service* svc, const scop_archive* archive,
                                     char** out_plan_id) {
    return api([&] {
        require(svc, "service");
        require(archive, "archive");
        const std::string id = svc->impl->add_archive(archive->archive);
        if (out_plan_id) *out_plan_id = copy_out(id);
    });
}

scop_status scop_service_handle(scop_service* svc, const char* method, const char* target,
                                const char* body, int* http_status, char** out_body) {
    return api([&] {
        require(svc, "service");
        require(method, "method");
        require(target, "target");
        require(http_status, "http_status");
        require(out_body, "out_body");
        const auto resp =
            svc->impl->handle(service::parse_target(method, target, body ? body : ""));
        *http_status = resp.status;
        *out_body = copy_out(resp.body);
    });
}

void scop_service_destroy(scop_service* svc) { delete svc; }

}  // extern "C"
