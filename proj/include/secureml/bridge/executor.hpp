#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "secureml/common/bytes.hpp"
#include "secureml/common/error.hpp"

namespace secureml::bridge {

struct SyscallRequest {
    enum class Kind : std::uint8_t { Nop, Sleep, ReadFile, WriteFile };

    std::uint64_t id = 0; // 0 = assign me one
    Kind kind = Kind::Nop;
    std::chrono::microseconds sleep{0}; // Sleep
    std::string path;                   // ReadFile / WriteFile
    Bytes data;                         // WriteFile
    std::chrono::steady_clock::time_point submitted_at{};
};

struct SyscallResponse {
    std::uint64_t id = 0;
    bool ok = false;
    Bytes result;      // file contents for ReadFile, empty otherwise
    std::string error; // set when !ok
    std::chrono::steady_clock::time_point completed_at{};
};

// Executes one request outside the simulated enclave. Implementations must be
// safe for concurrent calls from multiple service workers.
class ServiceExecutor {
public:
    virtual ~ServiceExecutor() = default;
    virtual SyscallResponse execute(const SyscallRequest& req) = 0;
};

// Performs the requests for real: sleeps sleep, file requests resolve under a
// root directory. Paths must be relative and may not contain "..".
class RealExecutor : public ServiceExecutor {
public:
    explicit RealExecutor(std::filesystem::path root);
    SyscallResponse execute(const SyscallRequest& req) override;

private:
    std::filesystem::path root_;
};

// Test instrument: every request parks until the test releases its id, which
// makes completion order a scripted input rather than a race.
class ManualExecutor : public ServiceExecutor {
public:
    SyscallResponse execute(const SyscallRequest& req) override;

    // Blocks until `count` requests are parked.
    void wait_parked(std::size_t count);
    // Ids currently parked and not yet released, ascending.
    std::vector<std::uint64_t> parked_ids();
    // Completes the given parked request with an empty ok result; returns
    // once its worker has resumed, so releases take effect in call order.
    void release(std::uint64_t id);

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::map<std::uint64_t, bool> parked_; // id -> released
};

} // namespace secureml::bridge
