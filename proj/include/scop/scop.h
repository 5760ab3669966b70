#ifndef SCOP_SCOP_H
#define SCOP_SCOP_H

/*
 * C interface to the savings-plan tail-probability engine.
 *
 * Every fallible call returns a scop_status. On failure the message for the
 * calling thread is available from scop_last_error() until its next call.
 * Strings returned through char** are owned by the caller and released with
 * scop_string_free(). Handles are released with their *_destroy function;
 * passing NULL to any destroy function is a no-op.
 *
 * Thread safety: an engine or archive may be queried from several threads at
 * once. A service handle is fully thread-safe.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SCOP_BUILDING_LIBRARY)
#    define SCOP_API __declspec(dllexport)
#  else
#    define SCOP_API __declspec(dllimport)
#  endif
#else
#  define SCOP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum scop_status {
    SCOP_OK = 0,
    SCOP_INVALID_ARGUMENT = 1, /* null pointer or bad enum value */
    SCOP_VALIDATION = 2,       /* config or input failed validation */
    SCOP_DOMAIN = 3,           /* input outside the mathematical domain */
    SCOP_CONVERGENCE = 4,
    SCOP_IO = 5,
    SCOP_NOT_FOUND = 6,
    SCOP_STATE = 7, /* operation needs a state the object is not in */
    SCOP_INTERNAL = 8
} scop_status;

typedef enum scop_format { SCOP_FORMAT_JSON = 0, SCOP_FORMAT_CSV = 1 } scop_format;

typedef enum scop_coordinate { SCOP_COORD_WEALTH = 0, SCOP_COORD_VERHULST = 1 } scop_coordinate;

typedef struct scop_engine scop_engine;
typedef struct scop_archive scop_archive;
typedef struct scop_service scop_service;

/* Zero in any field means "take the config value". */
typedef struct scop_mc_options {
    int64_t paths;
    uint64_t seed;
    int32_t steps_per_year;
    int32_t coordinate; /* scop_coordinate */
    int32_t threads;
    int32_t has_seed; /* nonzero: use seed even when it is 0 */
} scop_mc_options;

SCOP_API const char* scop_engine_version(void);
SCOP_API const char* scop_last_error(void);
SCOP_API const char* scop_status_name(scop_status status);
SCOP_API void scop_string_free(char* s);

/* Engines: a validated plan config plus a decomposition cache. */
SCOP_API scop_status scop_engine_create(const char* config_json, scop_engine** out);
SCOP_API scop_status scop_engine_load(const char* config_path, scop_engine** out);
SCOP_API void scop_engine_destroy(scop_engine* engine);
SCOP_API scop_status scop_engine_config(const scop_engine* engine, char** out_json);

/* Either output pointer may be NULL. */
SCOP_API scop_status scop_probability(scop_engine* engine, double u0, double xi, double* p,
                                      double* p_raw);
SCOP_API scop_status scop_probability_report(scop_engine* engine, double u0, double xi,
                                             scop_format format, char** out);
SCOP_API scop_status scop_mc_report(scop_engine* engine, double u0, double xi,
                                    const scop_mc_options* options, scop_format format,
                                    char** out);
SCOP_API scop_status scop_diagnose_report(scop_engine* engine, double u0, double xi,
                                          scop_format format, char** out);

/* Surfaces. An empty or NULL timestamp stamps the build with the current time. */
SCOP_API scop_status scop_surface_build(scop_engine* engine, int threads, const char* timestamp,
                                        scop_archive** out);
SCOP_API scop_status scop_archive_read(const char* path, scop_archive** out);
SCOP_API scop_status scop_archive_write(const scop_archive* archive, const char* path);
SCOP_API void scop_archive_destroy(scop_archive* archive);
SCOP_API scop_status scop_surface_report(const scop_archive* archive, scop_format format,
                                         char** out);
/* levels == NULL selects the archive's configured confidence levels. */
SCOP_API scop_status scop_frontiers_report(const scop_archive* archive, const double* levels,
                                           size_t n_levels, scop_format format, char** out);
SCOP_API scop_status scop_solve_report(const scop_archive* archive, double xi, double alpha,
                                       scop_format format, char** out);

/* HTTP-shaped service. target is "path" or "path?query"; body may be NULL. */
SCOP_API scop_status scop_service_create(int build_workers, int build_threads,
                                         scop_service** out);
SCOP_API scop_status scop_service_add_archive(scop_service* service, const scop_archive* archive,
                                              char** out_plan_id);
SCOP_API scop_status scop_service_handle(scop_service* service, const char* method,
                                         const char* target, const char* body, int* http_status,
                                         char** out_body);
SCOP_API void scop_service_destroy(scop_service* service);

#ifdef __cplusplus
}
#endif

#endif /* SCOP_SCOP_H */
