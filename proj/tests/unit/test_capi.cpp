// Black-box checks of libscop and the scop_cli binary.
#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "scop/scop.h"

using nlohmann::json;

namespace {

const std::string kData = SCOP_TEST_DATA;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code = -1;
    std::string out;
};

Run run_cli(const std::string& args) {
    const std::string cmd = std::string(SCOP_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string take(char* s) {
    std::string out = s ? s : "";
    scop_string_free(s);
    return out;
}

// `scop_cli serve` on an ephemeral port; stopped with SIGTERM on destruction.
class Server {
public:
    explicit Server(const std::vector<std::string>& extra) {
        int fds[2];
        REQUIRE(pipe(fds) == 0);
        pid_ = fork();
        REQUIRE(pid_ >= 0);
        if (pid_ == 0) {
            dup2(fds[1], STDOUT_FILENO);
            close(fds[0]);
            close(fds[1]);
            std::vector<std::string> args{SCOP_CLI, "serve", "--listen", "127.0.0.1:0", "--threads", "8"};
            args.insert(args.end(), extra.begin(), extra.end());
            std::vector<char*> argv;
            for (auto& a : args) argv.push_back(a.data());
            argv.push_back(nullptr);
            execv(SCOP_CLI, argv.data());
            _exit(127);
        }
        close(fds[1]);
        std::string line;
        char c = 0;
        while (read(fds[0], &c, 1) == 1 && c != '\n') line += c;
        close(fds[0]);
        ready = json::parse(line);
        port = ready["port"];
    }
    ~Server() {
        kill(pid_, SIGTERM);
        int status = 0;
        waitpid(pid_, &status, 0);
        exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    json ready;
    int port = 0;
    int exit_code = -1;

private:
    pid_t pid_ = -1;
};

}  // namespace

TEST_CASE("status names and null arguments") {
    CHECK(std::string(scop_status_name(SCOP_DOMAIN)) == "domain");
    CHECK(std::string(scop_engine_version()).rfind("scop ", 0) == 0);
    scop_engine* e = nullptr;
    CHECK(scop_engine_create(nullptr, &e) == SCOP_INVALID_ARGUMENT);
    CHECK(std::string(scop_last_error()).find("config_json") != std::string::npos);
    CHECK(scop_engine_create("{\"nope\":1}", &e) == SCOP_VALIDATION);
    CHECK(scop_engine_load("/nonexistent.json", &e) == SCOP_IO);
    CHECK(scop_probability(nullptr, 1.0, 0.03, nullptr, nullptr) == SCOP_INVALID_ARGUMENT);
    scop_archive* a = nullptr;
    CHECK(scop_archive_read("/nonexistent.scop", &a) == SCOP_IO);
    scop_engine_destroy(nullptr);
    scop_archive_destroy(nullptr);
    scop_service_destroy(nullptr);
}

TEST_CASE("engine calls agree with their reports") {
    scop_engine* e = nullptr;
    REQUIRE(scop_engine_create("{}", &e) == SCOP_OK);
    double p = -1.0;
    double raw = -1.0;
    REQUIRE(scop_probability(e, 40000.0, 0.03, &p, &raw) == SCOP_OK);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    char* out = nullptr;
    REQUIRE(scop_probability_report(e, 40000.0, 0.03, SCOP_FORMAT_JSON, &out) == SCOP_OK);
    const auto doc = json::parse(take(out));
    CHECK(doc["p"].get<double>() == p);
    CHECK(doc["p_raw"].get<double>() == raw);
    CHECK(scop_probability(e, -5.0, 0.03, &p, nullptr) == SCOP_DOMAIN);
    // Far outside the plan window the backward series cannot settle.
    CHECK(scop_probability(e, 1e9, 0.03, &p, nullptr) == SCOP_CONVERGENCE);
    CHECK(scop_probability_report(e, 40000.0, 0.03, static_cast<scop_format>(7), &out) ==
          SCOP_INVALID_ARGUMENT);
    REQUIRE(scop_engine_config(e, &out) == SCOP_OK);
    CHECK(json::parse(take(out))["solver"]["basis_size"] == 150);

    scop_mc_options opts{};
    opts.paths = 4096;
    opts.coordinate = 5;
    CHECK(scop_mc_report(e, 40000.0, 0.03, &opts, SCOP_FORMAT_JSON, &out) == SCOP_INVALID_ARGUMENT);
    scop_engine_destroy(e);
}

TEST_CASE("archives through the C API") {
    scop_engine* e = nullptr;
    REQUIRE(scop_engine_load((kData + "/small_plan.json").c_str(), &e) == SCOP_OK);
    scop_archive* a = nullptr;
    REQUIRE(scop_surface_build(e, 2, "2026-01-01T00:00:00Z", &a) == SCOP_OK);
    const std::string path = "test_capi_small.scop";
    REQUIRE(scop_archive_write(a, path.c_str()) == SCOP_OK);
    scop_archive* b = nullptr;
    REQUIRE(scop_archive_read(path.c_str(), &b) == SCOP_OK);
    char* s1 = nullptr;
    char* s2 = nullptr;
    REQUIRE(scop_surface_report(a, SCOP_FORMAT_JSON, &s1) == SCOP_OK);
    REQUIRE(scop_surface_report(b, SCOP_FORMAT_JSON, &s2) == SCOP_OK);
    CHECK(take(s1) == take(s2));
    const double levels[] = {0.3};
    REQUIRE(scop_frontiers_report(b, levels, 1, SCOP_FORMAT_JSON, &s1) == SCOP_OK);
    CHECK(json::parse(take(s1))["frontiers"].size() == 1);
    const double bad[] = {1.3};
    CHECK(scop_frontiers_report(b, bad, 1, SCOP_FORMAT_JSON, &s1) == SCOP_VALIDATION);
    REQUIRE(scop_solve_report(b, 0.03, 0.5, SCOP_FORMAT_CSV, &s1) == SCOP_OK);
    CHECK(take(s1).rfind("field,value\n", 0) == 0);

    scop_service* svc = nullptr;
    REQUIRE(scop_service_create(1, 1, &svc) == SCOP_OK);
    char* id = nullptr;
    REQUIRE(scop_service_add_archive(svc, b, &id) == SCOP_OK);
    const std::string plan_id = take(id);
    int status = 0;
    REQUIRE(scop_service_handle(svc, "GET", ("/plans/" + plan_id + "/surface").c_str(), nullptr,
                                &status, &s1) == SCOP_OK);
    CHECK(status == 200);
    REQUIRE(scop_surface_report(b, SCOP_FORMAT_JSON, &s2) == SCOP_OK);
    CHECK(take(s1) == take(s2));
    REQUIRE(scop_service_handle(svc, "GET", "/missing", nullptr, &status, &s1) == SCOP_OK);
    CHECK(status == 404);
    take(s1);
    scop_service_destroy(svc);
    scop_archive_destroy(a);
    scop_archive_destroy(b);
    scop_engine_destroy(e);
    std::remove(path.c_str());
}

TEST_CASE("CLI output matches the library") {
    scop_engine* e = nullptr;
    REQUIRE(scop_engine_create("{}", &e) == SCOP_OK);
    char* out = nullptr;
    REQUIRE(scop_probability_report(e, 40000.0, 0.03, SCOP_FORMAT_JSON, &out) == SCOP_OK);
    const std::string lib = take(out);
    const auto cli = run_cli("probability --u0 40000 --xi 0.03");
    CHECK(cli.code == 0);
    CHECK(cli.out == lib);
    REQUIRE(scop_probability_report(e, 40000.0, 0.03, SCOP_FORMAT_CSV, &out) == SCOP_OK);
    CHECK(run_cli("probability --u0 40000 --xi 0.03 --format csv").out == take(out));
    scop_engine_destroy(e);

    CHECK(run_cli("probability --u0=-5 --xi 0.03").code == SCOP_DOMAIN);
    CHECK(run_cli("probability --u0 1e9 --xi 0.03").code == SCOP_CONVERGENCE);
    CHECK(run_cli("probability --u0 40000").code != 0);
    CHECK(run_cli("--version").out.find("scop ") != std::string::npos);
}

TEST_CASE("CLI Monte Carlo is deterministic") {
    const std::string args = "mc --u0 40000 --xi 0.03 --paths 8192 --steps-per-year 52 --seed 5";
    const auto a = run_cli(args + " --threads 1");
    const auto b = run_cli(args + " --threads 3");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(json::parse(a.out)["seed"] == 5);
}

TEST_CASE("CLI surface, frontiers, solve and export") {
    const std::string ar = "test_capi_cli.scop";
    const std::string csv = "test_capi_cli.csv";
    const auto built = run_cli("surface --config " + kData + "/small_plan.json --timestamp 2026-01-01T00:00:00Z --out " +
                               ar + " --csv " + csv + " --threads 2");
    REQUIRE(built.code == 0);
    CHECK(slurp(csv).rfind("y,u0,xi,p,p_raw\n", 0) == 0);
    const std::string fr = "test_capi_frontiers.json";
    REQUIRE(run_cli("frontiers " + ar + " --levels 0.3 --out " + fr).code == 0);
    const auto doc = json::parse(slurp(fr));
    CHECK(doc["frontiers"].size() == 1);
    CHECK(doc["frontiers"][0]["alpha"] == 0.3);
    CHECK(json::parse(run_cli("solve " + ar + " --xi 0.03 --alpha 0.5").out)["kind"] == "solve");
    CHECK(run_cli("solve " + ar + " --xi 0.03 --alpha 1.5").code == SCOP_VALIDATION);
    CHECK(json::parse(run_cli("export " + ar).out)["kind"] == "surface");
    // Rebuilding with the same stamp reproduces the archive bit for bit.
    const std::string ar2 = "test_capi_cli2.scop";
    REQUIRE(run_cli("surface --config " + kData + "/small_plan.json --timestamp 2026-01-01T00:00:00Z --out " + ar2)
                .code == 0);
    CHECK(slurp(ar) == slurp(ar2));
    for (const auto& f : {ar, ar2, csv, fr}) std::remove(f.c_str());
}

TEST_CASE("HTTP service serves the same bytes as the CLI") {
    const std::string ar = "test_capi_http.scop";
    REQUIRE(run_cli("surface --config " + kData + "/small_plan.json --timestamp 2026-01-01T00:00:00Z --out " + ar)
                .code == 0);
    Server server({"--archive", ar});
    REQUIRE(server.ready["plans"].size() == 1);
    const std::string plan_id = server.ready["plans"][0];
    httplib::Client client("127.0.0.1", server.port);

    const auto health = client.Get("/healthz");
    REQUIRE(health);
    CHECK(health->status == 200);

    const auto prob = client.Get("/plans/" + plan_id + "/probability?u0=40000&xi=0.03");
    REQUIRE(prob);
    CHECK(prob->status == 200);
    CHECK(prob->body ==
          run_cli("probability --config " + kData + "/small_plan.json --u0 40000 --xi 0.03").out);
    const auto surf = client.Get("/plans/" + plan_id + "/surface");
    REQUIRE(surf);
    CHECK(surf->body == run_cli("export " + ar).out);
    const auto fr = client.Get("/plans/" + plan_id + "/frontiers?levels=0.3");
    REQUIRE(fr);
    CHECK(fr->body == run_cli("frontiers " + ar + " --levels 0.3").out);

    const auto missing = client.Get("/plans/nope");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    const auto posted = client.Post("/plans", "{}", "application/json");
    REQUIRE(posted);
    CHECK(posted->status == 201);

    std::atomic<int> bad{0};
    std::vector<std::thread> clients;
    for (int t = 0; t < 64; ++t) {
        clients.emplace_back([&] {
            httplib::Client c("127.0.0.1", server.port);
            const auto r = c.Get("/plans/" + plan_id + "/probability?u0=40000&xi=0.03");
            if (!r || r->status != 200 || r->body != prob->body) ++bad;
        });
    }
    for (auto& th : clients) th.join();
    CHECK(bad == 0);
    std::remove(ar.c_str());
}
