// Command-line front end. Talks to the engine only through the C API so the
// shared library is exercised exactly as external callers see it.

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>
#include <scop/scop.h>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <pthread.h>
#include <string>
#include <thread>
#include <vector>

namespace {

// Carries a failed status out to main, which prints it and sets the exit code.
struct Failure {
    scop_status status;
    std::string message;
};

void check(scop_status st) {
    if (st != SCOP_OK) throw Failure{st, scop_last_error()};
}

struct EngineDeleter {
    void operator()(scop_engine* e) const { scop_engine_destroy(e); }
};
struct ArchiveDeleter {
    void operator()(scop_archive* a) const { scop_archive_destroy(a); }
};
struct ServiceDeleter {
    void operator()(scop_service* s) const { scop_service_destroy(s); }
};
using Engine = std::unique_ptr<scop_engine, EngineDeleter>;
using Archive = std::unique_ptr<scop_archive, ArchiveDeleter>;
using Service = std::unique_ptr<scop_service, ServiceDeleter>;

std::string take(char* s) {
    std::string out = s ? s : "";
    scop_string_free(s);
    return out;
}

Engine open_engine(const std::string& config_path) {
    scop_engine* e = nullptr;
    check(config_path.empty() ? scop_engine_create("{}", &e) : scop_engine_load(config_path.c_str(), &e));
    return Engine(e);
}

Archive open_archive(const std::string& path) {
    scop_archive* a = nullptr;
    check(scop_archive_read(path.c_str(), &a));
    return Archive(a);
}

scop_format format_of(const std::string& name) {
    return name == "csv" ? SCOP_FORMAT_CSV : SCOP_FORMAT_JSON;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Failure{SCOP_IO, "cannot open " + out_path + " for writing"};
    out << text;
    if (!out) throw Failure{SCOP_IO, "failed writing " + out_path};
}

std::vector<double> parse_levels(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = text.find(',', start);
        const auto token = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        char* end = nullptr;
        const double v = std::strtod(token.c_str(), &end);
        if (token.empty() || end != token.c_str() + token.size()) {
            throw Failure{SCOP_VALIDATION, "--levels must be comma-separated numbers"};
        }
        out.push_back(v);
        if (comma == std::string::npos) return out;
        start = comma + 1;
    }
}

struct Listen {
    std::string host = "127.0.0.1";
    int port = 8080;
};

Listen parse_listen(const std::string& text) {
    Listen l;
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) throw Failure{SCOP_VALIDATION, "listen address must be host:port"};
    l.host = text.substr(0, colon);
    const auto port = text.substr(colon + 1);
    char* end = nullptr;
    const long p = std::strtol(port.c_str(), &end, 10);
    if (port.empty() || end != port.c_str() + port.size() || p < 0 || p > 65535) {
        throw Failure{SCOP_VALIDATION, "listen port must be an integer in [0, 65535]"};
    }
    l.port = static_cast<int>(p);
    return l;
}

int serve(const std::vector<std::string>& archives, const std::vector<std::string>& configs,
          std::string listen, int threads) {
    if (listen.empty()) {
        const char* env = std::getenv("SCOP_LISTEN");
        listen = env ? env : "127.0.0.1:8080";
    }
    const Listen addr = parse_listen(listen);

    // Block termination signals so a dedicated thread can stop the server cleanly;
    // done first so every thread spawned below inherits the mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    scop_service* raw = nullptr;
    check(scop_service_create(1, threads, &raw));
    Service svc(raw);
    nlohmann::json plans = nlohmann::json::array();
    for (const auto& path : archives) {
        auto ar = open_archive(path);
        char* id = nullptr;
        check(scop_service_add_archive(svc.get(), ar.get(), &id));
        plans.push_back(take(id));
    }
    for (const auto& path : configs) {
        std::ifstream in(path);
        if (!in) throw Failure{SCOP_IO, "cannot open config file " + path};
        const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        int status = 0;
        char* resp = nullptr;
        check(scop_service_handle(svc.get(), "POST", "/plans", body.c_str(), &status, &resp));
        const auto doc = nlohmann::json::parse(take(resp));
        if (status >= 400) throw Failure{SCOP_VALIDATION, doc.value("message", "config rejected")};
        plans.push_back(doc.at("plan_id"));
    }

    httplib::Server server;
    server.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<size_t>(threads)); };
    auto handler = [&svc](const httplib::Request& req, httplib::Response& res) {
        int status = 500;
        char* body = nullptr;
        const std::string target = req.target.empty() ? req.path : req.target;
        const auto st = scop_service_handle(svc.get(), req.method.c_str(), target.c_str(),
                                            req.body.c_str(), &status, &body);
        if (st != SCOP_OK) {
            nlohmann::json err = {{"kind", "error"}, {"engine_version", scop_engine_version()},
                                  {"error", scop_status_name(st)}, {"message", scop_last_error()}};
            res.status = 500;
            res.set_content(err.dump() + "\n", "application/json");
            return;
        }
        res.status = status;
        res.set_content(take(body), "application/json");
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Put(".*", handler);
    server.Delete(".*", handler);

    int port = addr.port;
    if (port == 0) {
        port = server.bind_to_any_port(addr.host);
    } else if (!server.bind_to_port(addr.host, port)) {
        port = -1;
    }
    if (port < 0) throw Failure{SCOP_IO, "cannot listen on " + listen};

    std::thread stopper([&server, signals] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
    });
    nlohmann::json ready = {{"kind", "listening"}, {"engine_version", scop_engine_version()},
                            {"host", addr.host}, {"port", port}, {"plans", plans}};
    std::cout << ready.dump() << std::endl;
    server.listen_after_bind();
    // Wake the stopper if the server exited on its own.
    pthread_kill(stopper.native_handle(), SIGTERM);
    stopper.join();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral tail probabilities and savings-plan frontiers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", scop_engine_version());

    std::string config_path;
    std::string out_path;
    std::string format = "json";
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::optional<std::uint64_t> seed;
    double u0 = 0.0;
    double xi = 0.0;
    double alpha = 0.0;

    auto add_common = [&](CLI::App* cmd, bool with_config) {
        if (with_config) cmd->add_option("--config", config_path, "plan config JSON (defaults if omitted)")->check(CLI::ExistingFile);
        cmd->add_option("--out", out_path, "write output here instead of stdout");
        cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"json", "csv"}));
        cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    };

    auto* surface = app.add_subcommand("surface", "build a probability surface and write its archive");
    add_common(surface, true);
    std::string csv_path;
    std::string timestamp;
    surface->add_option("--csv", csv_path, "also export the surface as CSV");
    surface->add_option("--timestamp", timestamp, "fixed creation stamp for reproducible archives");
    surface->get_option("--out")->required()->description("archive path");

    auto* frontiers = app.add_subcommand("frontiers", "extract frontiers from an archive");
    std::string archive_path;
    std::string levels_text;
    frontiers->add_option("archive", archive_path, "surface archive")->required()->check(CLI::ExistingFile);
    frontiers->add_option("--levels", levels_text, "comma-separated confidence levels");
    add_common(frontiers, false);

    auto* solve = app.add_subcommand("solve", "smallest u0 reaching confidence alpha at xi");
    solve->add_option("archive", archive_path, "surface archive")->required()->check(CLI::ExistingFile);
    solve->add_option("--xi", xi, "contribution growth rate")->required();
    solve->add_option("--alpha", alpha, "tail probability level")->required();
    add_common(solve, false);

    auto* export_cmd = app.add_subcommand("export", "print an archive's surface matrix");
    export_cmd->add_option("archive", archive_path, "surface archive")->required()->check(CLI::ExistingFile);
    add_common(export_cmd, false);

    auto* probability = app.add_subcommand("probability", "tail probability at one control point");
    add_common(probability, true);
    probability->add_option("--u0", u0, "initial contribution rate")->required();
    probability->add_option("--xi", xi, "contribution growth rate")->required();

    auto* mc = app.add_subcommand("mc", "Monte Carlo tail estimate");
    add_common(mc, true);
    std::int64_t paths = 0;
    int steps_per_year = 0;
    std::string coordinate = "wealth";
    mc->add_option("--u0", u0, "initial contribution rate")->required();
    mc->add_option("--xi", xi, "contribution growth rate")->required();
    mc->add_option("--paths", paths, "number of paths")->check(CLI::PositiveNumber);
    mc->add_option("--seed", seed, "base seed");
    mc->add_option("--steps-per-year", steps_per_year, "time steps per year")->check(CLI::PositiveNumber);
    mc->add_option("--coordinate", coordinate, "simulated variable")->check(CLI::IsMember({"wealth", "verhulst"}));

    auto* diagnose = app.add_subcommand("diagnose", "series truncation and asymptotic diagnostics");
    add_common(diagnose, true);
    diagnose->add_option("--u0", u0, "initial contribution rate")->required();
    diagnose->add_option("--xi", xi, "contribution growth rate")->required();

    auto* serve_cmd = app.add_subcommand("serve", "run the HTTP service");
    std::vector<std::string> archives;
    std::vector<std::string> configs;
    std::string listen;
    serve_cmd->add_option("--archive", archives, "preload a surface archive")->check(CLI::ExistingFile);
    serve_cmd->add_option("--config", configs, "register a plan config")->check(CLI::ExistingFile);
    serve_cmd->add_option("--listen", listen, "host:port (default $SCOP_LISTEN or 127.0.0.1:8080)");
    serve_cmd->add_option("--threads", threads, "request and build worker threads")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto fmt = format_of(format);
        if (*surface) {
            auto engine = open_engine(config_path);
            scop_archive* raw = nullptr;
            check(scop_surface_build(engine.get(), threads, timestamp.c_str(), &raw));
            Archive ar(raw);
            check(scop_archive_write(ar.get(), out_path.c_str()));
            if (!csv_path.empty()) {
                char* csv = nullptr;
                check(scop_surface_report(ar.get(), SCOP_FORMAT_CSV, &csv));
                emit(take(csv), csv_path);
            }
        } else if (*frontiers) {
            auto ar = open_archive(archive_path);
            std::vector<double> levels;
            if (!levels_text.empty()) levels = parse_levels(levels_text);
            char* text = nullptr;
            check(scop_frontiers_report(ar.get(), levels_text.empty() ? nullptr : levels.data(),
                                        levels.size(), fmt, &text));
            emit(take(text), out_path);
        } else if (*solve) {
            auto ar = open_archive(archive_path);
            char* text = nullptr;
            check(scop_solve_report(ar.get(), xi, alpha, fmt, &text));
            emit(take(text), out_path);
        } else if (*export_cmd) {
            auto ar = open_archive(archive_path);
            char* text = nullptr;
            check(scop_surface_report(ar.get(), fmt, &text));
            emit(take(text), out_path);
        } else if (*probability) {
            auto engine = open_engine(config_path);
            char* text = nullptr;
            check(scop_probability_report(engine.get(), u0, xi, fmt, &text));
            emit(take(text), out_path);
        } else if (*mc) {
            auto engine = open_engine(config_path);
            scop_mc_options opts{};
            opts.paths = paths;
            opts.steps_per_year = steps_per_year;
            opts.coordinate = coordinate == "verhulst" ? SCOP_COORD_VERHULST : SCOP_COORD_WEALTH;
            opts.threads = threads;
            if (seed) {
                opts.seed = *seed;
                opts.has_seed = 1;
            }
            char* text = nullptr;
            check(scop_mc_report(engine.get(), u0, xi, &opts, fmt, &text));
            emit(take(text), out_path);
        } else if (*diagnose) {
            auto engine = open_engine(config_path);
            char* text = nullptr;
            check(scop_diagnose_report(engine.get(), u0, xi, fmt, &text));
            emit(take(text), out_path);
        } else if (*serve_cmd) {
            return serve(archives, configs, listen, threads);
        }
    } catch (const Failure& f) {
        nlohmann::json err = {{"kind", "error"},
                              {"engine_version", scop_engine_version()},
                              {"error", scop_status_name(f.status)},
                              {"message", f.message}};
        std::cerr << err.dump() << std::endl;
        return static_cast<int>(f.status);
    }
    return 0;
}
