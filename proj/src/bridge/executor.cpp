#include "secureml/bridge/executor.hpp"

#include <thread>

#include "secureml/common/fileio.hpp"

namespace secureml::bridge {

namespace {

bool path_escapes(const std::string& path) {
    if (path.empty() || path.front() == '/') return true;
    std::size_t pos = 0;
    while (pos < path.size()) {
        std::size_t next = path.find('/', pos);
        if (next == std::string::npos) next = path.size();
        if (path.substr(pos, next - pos) == "..") return true;
        pos = next + 1;
    }
    return false;
}

SyscallResponse fail(std::uint64_t id, const std::string& error) {
    SyscallResponse r;
    r.id = id;
    r.ok = false;
    r.error = error;
    r.completed_at = std::chrono::steady_clock::now();
    return r;
}

} // namespace

RealExecutor::RealExecutor(std::filesystem::path root) : root_(std::move(root)) {}

SyscallResponse RealExecutor::execute(const SyscallRequest& req) {
    SyscallResponse r;
    r.id = req.id;
    r.ok = true;
    try {
        switch (req.kind) {
        case SyscallRequest::Kind::Nop:
            break;
        case SyscallRequest::Kind::Sleep:
            std::this_thread::sleep_for(req.sleep);
            break;
        case SyscallRequest::Kind::ReadFile:
            if (path_escapes(req.path)) return fail(req.id, "path escapes root");
            r.result = read_file(root_ / req.path);
            break;
        case SyscallRequest::Kind::WriteFile:
            if (path_escapes(req.path)) return fail(req.id, "path escapes root");
            std::filesystem::create_directories((root_ / req.path).parent_path());
            write_file(root_ / req.path, req.data);
            break;
        }
    } catch (const std::exception& e) {
        return fail(req.id, e.what());
    }
    r.completed_at = std::chrono::steady_clock::now();
    return r;
}

SyscallResponse ManualExecutor::execute(const SyscallRequest& req) {
    std::unique_lock lock(mu_);
    parked_.emplace(req.id, false);
    cv_.notify_all();
    cv_.wait(lock, [&] { return parked_.at(req.id); });
    parked_.erase(req.id);
    cv_.notify_all(); // unblocks release()'s wait

    SyscallResponse r;
    r.id = req.id;
    r.ok = true;
    r.completed_at = std::chrono::steady_clock::now();
    return r;
}

void ManualExecutor::wait_parked(std::size_t count) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] {
        std::size_t waiting = 0;
        for (const auto& [id, released] : parked_)
            if (!released) ++waiting;
        return waiting >= count;
    });
}

std::vector<std::uint64_t> ManualExecutor::parked_ids() {
    std::lock_guard lock(mu_);
    std::vector<std::uint64_t> ids;
    for (const auto& [id, released] : parked_)
        if (!released) ids.push_back(id);
    return ids;
}

void ManualExecutor::release(std::uint64_t id) {
    std::unique_lock lock(mu_);
    auto it = parked_.find(id);
    if (it == parked_.end()) throw Error("request " + std::to_string(id) + " is not parked");
    it->second = true;
    cv_.notify_all();
    // Return only once the worker has resumed, so back-to-back releases
    // complete in release order.
    cv_.wait(lock, [&] { return parked_.count(id) == 0; });
}

} // namespace secureml::bridge
