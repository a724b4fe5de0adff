#include "secureml/bridge/bridge.hpp"

namespace secureml::bridge {

namespace {

using Clock = std::chrono::steady_clock;

void busy_wait(std::chrono::microseconds d) {
    const auto end = Clock::now() + d;
    while (Clock::now() < end) {
    }
}

std::uint64_t request_id(std::size_t thread, std::size_t step) {
    return (static_cast<std::uint64_t>(thread) << 32) | static_cast<std::uint64_t>(step + 1);
}

} // namespace

ServiceQueue::ServiceQueue(std::size_t capacity, std::size_t workers, ServiceExecutor& exec)
    : capacity_(capacity), exec_(exec) {
    workers_.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i)
        workers_.emplace_back(&ServiceQueue::worker_loop, this);
}

ServiceQueue::~ServiceQueue() {
    close();
    for (auto& w : workers_) w.join();
}

std::uint64_t ServiceQueue::submit(SyscallRequest req) {
    std::lock_guard lock(mu_);
    if (closed_) throw Error("service queue closed");
    if (requests_.size() >= capacity_) throw QueueFull(capacity_);
    if (req.id == 0) req.id = next_id_++;
    req.submitted_at = Clock::now();
    const std::uint64_t id = req.id;
    requests_.push_back(std::move(req));
    request_cv_.notify_one();
    return id;
}

std::optional<SyscallResponse> ServiceQueue::try_take() {
    std::lock_guard lock(mu_);
    if (responses_.empty()) return std::nullopt;
    SyscallResponse r = std::move(responses_.front());
    responses_.pop_front();
    return r;
}

SyscallResponse ServiceQueue::take_wait() {
    std::unique_lock lock(mu_);
    response_cv_.wait(lock, [&] { return !responses_.empty() || closed_; });
    if (responses_.empty()) throw Error("service queue closed");
    SyscallResponse r = std::move(responses_.front());
    responses_.pop_front();
    return r;
}

std::size_t ServiceQueue::depth() const {
    std::lock_guard lock(mu_);
    return requests_.size();
}

void ServiceQueue::close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    request_cv_.notify_all();
    response_cv_.notify_all();
}

void ServiceQueue::worker_loop() {
    for (;;) {
        SyscallRequest req;
        {
            std::unique_lock lock(mu_);
            request_cv_.wait(lock, [&] { return !requests_.empty() || closed_; });
            if (requests_.empty()) return; // closed and drained
            req = std::move(requests_.front());
            requests_.pop_front();
        }
        SyscallResponse resp = exec_.execute(req);
        {
            std::lock_guard lock(mu_);
            responses_.push_back(std::move(resp));
            response_cv_.notify_all();
        }
    }
}

RunResult Bridge::run_async(const std::vector<Script>& workload, ServiceExecutor& exec) {
    if (cfg_.workers == 0) throw Error("async run needs at least one service worker");

    struct AppThread {
        const Script* script = nullptr;
        std::size_t next = 0; // next request index to submit
        bool done = false;
    };

    ServiceQueue queue(cfg_.queue_capacity, cfg_.workers, exec);
    RunResult out;
    std::vector<AppThread> threads(workload.size());
    std::deque<std::size_t> ready; // FIFO: front = longest waiting
    std::map<std::uint64_t, std::size_t> waiting_on;
    std::size_t live = 0;

    for (std::size_t t = 0; t < workload.size(); ++t) {
        threads[t].script = &workload[t];
        if (workload[t].empty()) {
            threads[t].done = true;
        } else {
            ready.push_back(t);
            ++live;
        }
    }

    const auto started = Clock::now();

    auto complete = [&](SyscallResponse resp) {
        const auto it = waiting_on.find(resp.id);
        const std::size_t t = it->second;
        waiting_on.erase(it);
        out.log.push_back({RunEvent::What::Complete, t, resp.id});
        out.responses.emplace(resp.id, std::move(resp));
        if (threads[t].next == threads[t].script->size()) {
            threads[t].done = true; // script exhausted
            --live;
        } else {
            ready.push_back(t); // woken thread goes to the back of the FIFO
        }
    };

    while (live > 0) {
        while (auto resp = queue.try_take()) complete(std::move(*resp));
        if (live == 0) break; // the drain may have finished the last thread

        if (!ready.empty()) {
            const std::size_t t = ready.front();
            ready.pop_front();
            ++out.stats.context_switches;
            out.log.push_back({RunEvent::What::Switch, t, 0});

            AppThread& app = threads[t];
            SyscallRequest req = (*app.script)[app.next];
            req.id = request_id(t, app.next);
            try {
                queue.submit(req);
            } catch (const QueueFull&) {
                ready.push_back(t); // backpressure: stay runnable, retry later
                continue;
            }
            out.log.push_back({RunEvent::What::Submit, t, req.id});
            waiting_on.emplace(req.id, t);
            ++app.next;
            continue;
        }

        // Nothing runnable: wait in-enclave up to the spin budget.
        const auto spin_start = Clock::now();
        bool got = false;
        while (Clock::now() - spin_start < cfg_.spin_budget) {
            if (auto resp = queue.try_take()) {
                complete(std::move(*resp));
                got = true;
                break;
            }
        }
        if (got) continue;

        // Still dry: one simulated enclave exit, then block outside.
        ++out.stats.transitions;
        out.log.push_back({RunEvent::What::Transition, 0, 0});
        busy_wait(cfg_.transition_cost);
        complete(queue.take_wait());
    }

    out.stats.completed = out.responses.size();
    out.stats.wall_time =
        std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - started);
    return out;
}

RunResult Bridge::run_baseline_sync(const std::vector<Script>& workload, ServiceExecutor& exec) {
    RunResult out;
    const auto started = Clock::now();

    for (std::size_t t = 0; t < workload.size(); ++t) {
        for (std::size_t i = 0; i < workload[t].size(); ++i) {
            SyscallRequest req = workload[t][i];
            req.id = request_id(t, i);
            req.submitted_at = Clock::now();

            ++out.stats.transitions; // exit
            busy_wait(cfg_.transition_cost);
            SyscallResponse resp = exec.execute(req);
            ++out.stats.transitions; // re-entry
            busy_wait(cfg_.transition_cost);

            out.responses.emplace(req.id, std::move(resp));
        }
    }

    out.stats.completed = out.responses.size();
    out.stats.wall_time =
        std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - started);
    return out;
}

} // namespace secureml::bridge
