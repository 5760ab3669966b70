#include "service/service.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "common/errors.hpp"

namespace scop::service {

using nlohmann::json;

namespace {

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start < path.size()) {
        const auto slash = path.find('/', start);
        const auto end = slash == std::string::npos ? path.size() : slash;
        if (end > start) parts.push_back(path.substr(start, end - start));
        start = end + 1;
    }
    return parts;
}

double query_number(const Request& req, const char* key) {
    const auto it = req.query.find(key);
    if (it == req.query.end()) throw ValidationError(std::string("missing query parameter ") + key);
    const std::string& text = it->second;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
        throw ValidationError(std::string("query parameter ") + key + " must be a number");
    }
    return v;
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string percent_decode(const std::string& text) {
    std::string out;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '+') {
            out += ' ';
        } else if (c == '%' && i + 2 < text.size() && hex_digit(text[i + 1]) >= 0 &&
                   hex_digit(text[i + 2]) >= 0) {
            out += static_cast<char>(hex_digit(text[i + 1]) * 16 + hex_digit(text[i + 2]));
            i += 2;
        } else {
            out += c;
        }
    }
    return out;
}

Response reply(int status, const json& payload) {
    return {status, payload.dump() + '\n'};
}

}  // namespace

Request parse_target(const std::string& method, const std::string& target, std::string body) {
    Request req;
    req.method = method;
    req.body = std::move(body);
    const auto qpos = target.find('?');
    req.path = percent_decode(target.substr(0, qpos));
    if (qpos == std::string::npos) return req;
    const std::string query = target.substr(qpos + 1);
    std::size_t start = 0;
    while (start < query.size()) {
        const auto amp = query.find('&', start);
        const auto end = amp == std::string::npos ? query.size() : amp;
        const auto pair = query.substr(start, end - start);
        if (!pair.empty()) {
            const auto eq = pair.find('=');
            req.query[percent_decode(pair.substr(0, eq))] =
                eq == std::string::npos ? std::string{} : percent_decode(pair.substr(eq + 1));
        }
        start = end + 1;
    }
    return req;
}

const char* to_string(JobState state) {
    switch (state) {
        case JobState::queued: return "queued";
        case JobState::running: return "running";
        case JobState::done: return "done";
        case JobState::failed: return "failed";
    }
    return "unknown";
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {
    const int n = std::max(1, options_.build_workers);
    for (int i = 0; i < n; ++i) workers_.emplace_back([this] { worker_loop(); });
}

Service::~Service() {
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    work_cv_.notify_all();
    for (auto& t : workers_) t.join();
}

std::string Service::register_plan(const PlanConfig& config) {
    validate(config);
    const std::string hash = config_hash(config);
    const std::string id = "plan-" + hash;
    std::lock_guard lock(mutex_);
    if (!plans_.count(id)) {
        auto plan = std::make_shared<Plan>();
        plan->config = config;
        plan->hash = hash;
        plans_.emplace(id, std::move(plan));
    }
    return id;
}

std::string Service::add_archive(SurfaceArchive archive) {
    const std::string id = register_plan(archive.config);
    auto snap = std::make_shared<const Snapshot>(std::move(archive));
    std::lock_guard lock(mutex_);
    plans_.at(id)->snapshot = std::move(snap);
    return id;
}

std::string Service::start_build(const std::string& plan_id) {
    std::lock_guard lock(mutex_);
    const auto it = plans_.find(plan_id);
    if (it == plans_.end()) throw NotFoundError("unknown plan " + plan_id);
    auto& plan = *it->second;
    if (!plan.pending_job.empty()) return plan.pending_job;
    char buf[32];
    std::snprintf(buf, sizeof buf, "job-%06llu", static_cast<unsigned long long>(++job_counter_));
    Job job;
    job.id = buf;
    job.plan_id = plan_id;
    jobs_.emplace(job.id, job);
    plan.pending_job = job.id;
    queue_.push_back(job.id);
    work_cv_.notify_one();
    return job.id;
}

JobState Service::wait(const std::string& job_id) {
    std::unique_lock lock(mutex_);
    const auto it = jobs_.find(job_id);
    if (it == jobs_.end()) throw NotFoundError("unknown job " + job_id);
    done_cv_.wait(lock, [&] {
        return it->second.state == JobState::done || it->second.state == JobState::failed;
    });
    return it->second.state;
}

void Service::worker_loop() {
    for (;;) {
        std::string job_id;
        PlanConfig config;
        std::string plan_id;
        {
            std::unique_lock lock(mutex_);
            work_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (stopping_) return;
            job_id = queue_.front();
            queue_.pop_front();
            auto& job = jobs_.at(job_id);
            job.state = JobState::running;
            plan_id = job.plan_id;
            config = plans_.at(plan_id)->config;
        }
        std::shared_ptr<const Snapshot> snap;
        std::string error;
        try {
            snap = std::make_shared<const Snapshot>(
                build_archive(config, options_.build_threads, options_.timestamp, &cache_));
        } catch (const std::exception& e) {
            error = e.what();
        }
        {
            std::lock_guard lock(mutex_);
            auto& job = jobs_.at(job_id);
            auto& plan = *plans_.at(plan_id);
            if (snap) {
                plan.snapshot = std::move(snap);
                job.state = JobState::done;
            } else {
                job.state = JobState::failed;
                job.error = error;
            }
            plan.pending_job.clear();
        }
        done_cv_.notify_all();
    }
}

Service::PlanView Service::find_plan(const std::string& plan_id) const {
    std::lock_guard lock(mutex_);
    const auto it = plans_.find(plan_id);
    if (it == plans_.end()) throw NotFoundError("unknown plan " + plan_id);
    return {it->second->config, it->second->hash, it->second->snapshot};
}

json Service::plan_json(const std::string& plan_id, const PlanView& view) const {
    json out = {{"kind", "plan"}, {"engine_version", kEngineVersion}};
    out["plan_id"] = plan_id;
    out["config_hash"] = view.hash;
    out["config"] = to_json(view.config);
    out["surface_built"] = static_cast<bool>(view.snapshot);
    return out;
}

json Service::job_json(const Job& job) const {
    json out = {{"kind", "job"}, {"engine_version", kEngineVersion}};
    out["job_id"] = job.id;
    out["plan_id"] = job.plan_id;
    out["state"] = to_string(job.state);
    out["error"] = job.error.empty() ? json(nullptr) : json(job.error);
    return out;
}

std::string Service::next_correlation_id() {
    std::lock_guard lock(mutex_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "corr-%08llx",
                  static_cast<unsigned long long>(++correlation_counter_));
    return buf;
}

Response Service::handle(const Request& request) {
    try {
        return dispatch(request);
    } catch (const ValidationError& e) {
        return reply(400, error_payload("validation", e.what(), next_correlation_id()));
    } catch (const DomainError& e) {
        return reply(400, error_payload("domain", e.what(), next_correlation_id()));
    } catch (const NotFoundError& e) {
        return reply(404, error_payload("not_found", e.what(), next_correlation_id()));
    } catch (const StateError& e) {
        return reply(409, error_payload("conflict", e.what(), next_correlation_id()));
    } catch (const std::exception& e) {
        return reply(500, error_payload("internal", e.what(), next_correlation_id()));
    }
}

Response Service::dispatch(const Request& req) {
    const auto parts = split_path(req.path);
    auto method_not_allowed = [&] {
        return reply(405, error_payload("method_not_allowed",
                                        req.method + " not supported on " + req.path,
                                        next_correlation_id()));
    };
    if (parts.size() == 1 && parts[0] == "healthz") {
        if (req.method != "GET") return method_not_allowed();
        std::size_t n = 0;
        {
            std::lock_guard lock(mutex_);
            n = plans_.size();
        }
        json out = {{"kind", "health"}, {"engine_version", kEngineVersion}};
        out["status"] = "ok";
        out["plans"] = n;
        return reply(200, out);
    }
    if (!parts.empty() && parts[0] == "plans") {
        if (parts.size() == 1) {
            if (req.method != "POST") return method_not_allowed();
            const auto config = parse_config_text(req.body.empty() ? "{}" : req.body);
            const std::string id = register_plan(config);
            return reply(201, plan_json(id, find_plan(id)));
        }
        if (parts.size() == 2) {
            if (req.method != "GET") return method_not_allowed();
            return reply(200, plan_json(parts[1], find_plan(parts[1])));
        }
        if (parts.size() == 3) return route_plan(req, parts[1], parts[2]);
    }
    if (parts.size() == 2 && parts[0] == "jobs") {
        if (req.method != "GET") return method_not_allowed();
        std::lock_guard lock(mutex_);
        const auto it = jobs_.find(parts[1]);
        if (it == jobs_.end()) throw NotFoundError("unknown job " + parts[1]);
        return reply(200, job_json(it->second));
    }
    throw NotFoundError("no route for " + req.path);
}

Response Service::route_plan(const Request& req, const std::string& plan_id,
                             const std::string& action) {
    const auto view = find_plan(plan_id);
    auto snapshot = [&] {
        if (!view.snapshot) throw StateError("surface for " + plan_id + " has not been built");
        return view.snapshot;
    };
    if (action == "surface" && req.method == "POST") {
        const std::string job_id = start_build(plan_id);
        std::lock_guard lock(mutex_);
        return reply(202, job_json(jobs_.at(job_id)));
    }
    if (req.method != "GET") {
        return reply(405, error_payload("method_not_allowed",
                                        req.method + " not supported on " + req.path,
                                        next_correlation_id()));
    }
    if (action == "surface") return reply(200, surface_payload(snapshot()->archive));
    if (action == "frontiers") {
        std::optional<std::vector<double>> levels;
        if (const auto it = req.query.find("levels"); it != req.query.end()) {
            levels = parse_levels(it->second);
        }
        return reply(200, frontiers_payload(*snapshot(), levels));
    }
    if (action == "probability") {
        return reply(200, probability_payload(view.config, query_number(req, "u0"),
                                              query_number(req, "xi"), &cache_));
    }
    if (action == "solve") {
        return reply(200, solve_payload(*snapshot(), query_number(req, "xi"),
                                        query_number(req, "alpha"), &cache_));
    }
    if (action == "diagnose") {
        return reply(200, diagnose_payload(view.config, query_number(req, "u0"),
                                           query_number(req, "xi"), &cache_));
    }
    throw NotFoundError("no route for " + req.path);
}

}  // namespace scop::service
