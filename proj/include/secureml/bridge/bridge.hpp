#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "secureml/bridge/executor.hpp"
#include "secureml/common/error.hpp"

namespace secureml::bridge {

class QueueFull : public Error {
public:
    explicit QueueFull(std::size_t capacity)
        : Error("syscall queue full (capacity " + std::to_string(capacity) + ")") {}
};

// Shared bounded request queue drained by service worker threads that live
// outside the simulated enclave; completions come back on a response queue.
// Submitting charges no enclave transition — that is the entire point.
class ServiceQueue {
public:
    ServiceQueue(std::size_t capacity, std::size_t workers, ServiceExecutor& exec);
    ~ServiceQueue();
    ServiceQueue(const ServiceQueue&) = delete;
    ServiceQueue& operator=(const ServiceQueue&) = delete;

    // Assigns an id when the request carries 0; returns the id.
    std::uint64_t submit(SyscallRequest req); // throws QueueFull

    std::optional<SyscallResponse> try_take();
    SyscallResponse take_wait(); // throws Error if closed and drained

    std::size_t depth() const; // requests waiting for a worker
    void close();

private:
    void worker_loop();

    const std::size_t capacity_;
    ServiceExecutor& exec_;

    mutable std::mutex mu_;
    std::condition_variable request_cv_;
    std::condition_variable response_cv_;
    std::deque<SyscallRequest> requests_;
    std::deque<SyscallResponse> responses_;
    bool closed_ = false;
    std::uint64_t next_id_ = 1;

    std::vector<std::thread> workers_;
};

struct SchedulerStats {
    std::uint64_t transitions = 0;      // simulated enclave exits
    std::uint64_t context_switches = 0; // user-level thread dispatches
    std::uint64_t completed = 0;
    std::chrono::microseconds wall_time{0};
};

struct RunEvent {
    enum class What : std::uint8_t { Switch, Submit, Complete, Transition };
    What what;
    std::uint64_t thread = 0;  // app-thread index (Switch/Submit/Complete)
    std::uint64_t request = 0; // request id (Submit/Complete)
};

struct RunResult {
    SchedulerStats stats;
    std::map<std::uint64_t, SyscallResponse> responses; // by request id
    std::vector<RunEvent> log;                          // async runs only
};

// One app thread's scripted requests, executed in order; each submission
// blocks the thread until its response arrives.
using Script = std::vector<SyscallRequest>;

struct BridgeConfig {
    std::size_t workers = 2;            // service threads outside the enclave
    std::size_t queue_capacity = 1024;
    std::chrono::microseconds spin_budget{50};     // in-enclave wait before exiting
    std::chrono::microseconds transition_cost{10}; // busy-wait per simulated transition
};

// M:N user-level scheduler: N scripted app threads multiplexed on the one
// thread that calls run_async, M service workers outside. The scheduler
// dispatches the longest-waiting runnable thread (FIFO); when none is
// runnable it spins up to the budget, then charges one simulated enclave
// transition and waits outside for a completion.
//
// The baseline charges two transitions (exit + re-entry) around every
// request and executes it inline, like a conventional synchronous ecall.
//
// Request ids are assigned deterministically from (thread, step), so the two
// modes yield directly comparable response maps for the same workload.
class Bridge {
public:
    explicit Bridge(BridgeConfig cfg = {}) : cfg_(cfg) {}

    RunResult run_async(const std::vector<Script>& workload, ServiceExecutor& exec);
    RunResult run_baseline_sync(const std::vector<Script>& workload, ServiceExecutor& exec);

    const BridgeConfig& config() const { return cfg_; }

private:
    BridgeConfig cfg_;
};

} // namespace secureml::bridge
