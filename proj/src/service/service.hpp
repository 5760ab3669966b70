#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "service/payloads.hpp"

namespace scop::service {

struct Request {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

/// Splits "path?a=1&b=x%2Cy" into path and percent-decoded query pairs.
Request parse_target(const std::string& method, const std::string& target,
                     std::string body = {});

struct Response {
    int status = 200;
    std::string body;
};

struct ServiceOptions {
    /// Concurrent surface builds.
    int build_workers = 1;
    /// Threads inside each build.
    int build_threads = 1;
    /// Fixed creation stamp for built surfaces; empty means wall clock.
    std::string timestamp;
};

enum class JobState { queued, running, done, failed };

const char* to_string(JobState state);

/// Plan registry and HTTP-shaped router. Surfaces are immutable snapshots;
/// a finished build replaces the plan's snapshot pointer under the registry
/// lock, so readers see either the old or the new surface, never a mix.
class Service {
public:
    explicit Service(ServiceOptions options = {});
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Returns the plan id; registering an identical config again is a no-op.
    std::string register_plan(const PlanConfig& config);
    std::string add_archive(SurfaceArchive archive);

    /// Starts a build and returns its job id, or the pending job for the plan.
    std::string start_build(const std::string& plan_id);
    /// Blocks until the job leaves the queue; returns its final state.
    JobState wait(const std::string& job_id);

    Response handle(const Request& request);

    [[nodiscard]] spectral::DecompositionCache& cache() { return cache_; }

private:
    struct Plan {
        PlanConfig config;
        std::string hash;
        std::shared_ptr<const Snapshot> snapshot;
        std::string pending_job;
    };
    struct Job {
        std::string id;
        std::string plan_id;
        JobState state = JobState::queued;
        std::string error;
    };

    Response dispatch(const Request& request);
    Response route_plan(const Request& request, const std::string& plan_id,
                        const std::string& action);
    struct PlanView {
        PlanConfig config;
        std::string hash;
        std::shared_ptr<const Snapshot> snapshot;
    };
    PlanView find_plan(const std::string& plan_id) const;
    nlohmann::json plan_json(const std::string& plan_id, const PlanView& view) const;
    nlohmann::json job_json(const Job& job) const;
    void worker_loop();
    std::string next_correlation_id();

    ServiceOptions options_;
    spectral::DecompositionCache cache_;

    mutable std::mutex mutex_;
    std::condition_variable work_cv_;
    std::condition_variable done_cv_;
    std::map<std::string, std::shared_ptr<Plan>> plans_;
    std::map<std::string, Job> jobs_;
    std::deque<std::string> queue_;
    std::uint64_t job_counter_ = 0;
    std::uint64_t correlation_counter_ = 0;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

}  // namespace scop::service
