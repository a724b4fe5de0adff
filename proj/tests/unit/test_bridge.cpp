#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <thread>

#include "secureml/bridge/bridge.hpp"
#include "secureml/bridge/executor.hpp"
#include "secureml/common/fileio.hpp"

#include "support/test_util.hpp"

using namespace secureml;
using namespace secureml::bridge;
using namespace std::chrono_literals;

namespace {

SyscallRequest nop() {
    return {};
}

SyscallRequest sleep_req(std::chrono::microseconds d) {
    SyscallRequest r;
    r.kind = SyscallRequest::Kind::Sleep;
    r.sleep = d;
    return r;
}

SyscallRequest write_req(std::string path, Bytes data) {
    SyscallRequest r;
    r.kind = SyscallRequest::Kind::WriteFile;
    r.path = std::move(path);
    r.data = std::move(data);
    return r;
}

SyscallRequest read_req(std::string path) {
    SyscallRequest r;
    r.kind = SyscallRequest::Kind::ReadFile;
    r.path = std::move(path);
    return r;
}

bool same_responses(const RunResult& a, const RunResult& b) {
    if (a.responses.size() != b.responses.size()) return false;
    for (const auto& [id, ra] : a.responses) {
        const auto it = b.responses.find(id);
        if (it == b.responses.end()) return false;
        const SyscallResponse& rb = it->second;
        if (ra.ok != rb.ok || ra.result != rb.result || ra.error != rb.error) return false;
    }
    return true;
}

} // namespace

TEST_SUITE("service_queue") {
    TEST_CASE("bounded queue refuses request 1025 with default bounds") {
        ManualExecutor exec;
        ServiceQueue queue(1024, /*workers=*/0, exec); // nothing drains
        for (int i = 0; i < 1024; ++i) (void)queue.submit(nop());
        CHECK(queue.depth() == 1024);
        CHECK_THROWS_AS(queue.submit(nop()), QueueFull);
    }

    TEST_CASE("explicit ids are preserved, zero ids get assigned") {
        ManualExecutor exec;
        ServiceQueue queue(8, 0, exec);
        SyscallRequest r = nop();
        r.id = 42;
        CHECK(queue.submit(r) == 42);
        CHECK(queue.submit(nop()) != 0);
    }

    TEST_CASE("close unblocks take_wait and refuses new submissions") {
        ManualExecutor exec;
        ServiceQueue queue(8, 0, exec);
        std::thread closer([&] {
            std::this_thread::sleep_for(20ms);
            queue.close();
        });
        CHECK_THROWS_AS(queue.take_wait(), Error);
        closer.join();
        CHECK_THROWS_AS(queue.submit(nop()), Error);
    }
}

TEST_SUITE("real_executor") {
    TEST_CASE("write then read round trips; errors are reported not thrown") {
        testutil::TempDir dir;
        RealExecutor exec(dir.path());

        SyscallRequest w = write_req("a/b/data.bin", to_bytes("payload"));
        w.id = 1;
        CHECK(exec.execute(w).ok);

        SyscallRequest r = read_req("a/b/data.bin");
        r.id = 2;
        const SyscallResponse got = exec.execute(r);
        CHECK(got.ok);
        CHECK(got.result == to_bytes("payload"));

        SyscallRequest missing = read_req("no/such/file");
        missing.id = 3;
        const SyscallResponse bad = exec.execute(missing);
        CHECK_FALSE(bad.ok);
        CHECK(!bad.error.empty());
    }

    TEST_CASE("escaping paths are refused") {
        testutil::TempDir dir;
        RealExecutor exec(dir.path());
        for (const char* p : {"../outside", "/etc/passwd", "a/../../b", ""}) {
            SyscallRequest r = read_req(p);
            r.id = 9;
            const SyscallResponse got = exec.execute(r);
            CHECK_FALSE(got.ok);
        }
    }
}

TEST_SUITE("scheduler") {
    TEST_CASE("a nop completes with an empty ok result") {
        testutil::TempDir dir;
        RealExecutor exec(dir.path());
        Bridge bridge({.workers = 1});
        const RunResult out = bridge.run_async({{nop()}}, exec);
        REQUIRE(out.responses.size() == 1);
        const auto& resp = out.responses.begin()->second;
        CHECK(resp.ok);
        CHECK(resp.result.empty());
        CHECK(out.stats.completed == 1);
    }

    TEST_CASE("sleeps from two app threads overlap under async") {
        testutil::TempDir dir;
        RealExecutor exec(dir.path());
        Bridge bridge({.workers = 2});
        const std::vector<Script> workload = {{sleep_req(20ms)}, {sleep_req(20ms)}};

        const RunResult async = bridge.run_async(workload, exec);
        const RunResult sync = bridge.run_baseline_sync(workload, exec);

        // Sequential floor: the sync baseline really sleeps twice.
        CHECK(sync.stats.wall_time >= 40ms);
        // Overlap: both sleeps in flight at once, plus generous scheduling slack.
        CHECK(async.stats.wall_time < 35ms);
        CHECK(async.stats.wall_time < sync.stats.wall_time);
    }

    TEST_CASE("no transitions while any app thread is runnable") {
        testutil::TempDir dir;
        RealExecutor exec(dir.path());
        Bridge bridge({.workers = 2, .spin_budget = 2s});
        std::vector<Script> workload(2);
        for (int i = 0; i < 50; ++i) {
            workload[0].push_back(nop());
            workload[1].push_back(nop());
        }
        const RunResult out = bridge.run_async(workload, exec);
        CHECK(out.stats.completed == 100);
        // Every dry spell resolves within the huge spin budget, so the run
        // never pays for an enclave exit.
        CHECK(out.stats.transitions == 0);
    }

    TEST_CASE("all threads blocked with zero spin budget charges one transition") {
        ManualExecutor exec;
        Bridge bridge({.workers = 1, .spin_budget = 0us, .transition_cost = 0us});
        RunResult out;
        std::thread runner([&] { out = bridge.run_async({{nop()}}, exec); });
        exec.wait_parked(1);
        exec.release(exec.parked_ids().at(0));
        runner.join();
        CHECK(out.stats.transitions == 1);
        CHECK(out.stats.completed == 1);
    }

    TEST_CASE("fifo dispatch follows completion arrival order") {
        ManualExecutor exec;
        Bridge bridge({.workers = 4, .transition_cost = 0us});
        const std::vector<Script> workload(4, Script{nop(), nop()});

        RunResult out;
        std::thread runner([&] { out = bridge.run_async(workload, exec); });

        auto release_in_order = [&](const std::vector<std::uint64_t>& threads_order,
                                    std::uint64_t step) {
            for (std::uint64_t t : threads_order) {
                exec.release((t << 32) | step);
                std::this_thread::sleep_for(2ms); // let the response land in the queue
            }
        };

        exec.wait_parked(4); // all first requests in service
        const std::vector<std::uint64_t> first_order = {2, 0, 3, 1};
        release_in_order(first_order, 1);
        exec.wait_parked(4); // all second requests in service
        release_in_order({1, 3, 0, 2}, 2);
        runner.join();

        // The longest-waiting thread runs first: second-step submissions must
        // follow the order in which the first completions arrived.
        std::vector<std::uint64_t> second_submit_order;
        for (const RunEvent& e : out.log)
            if (e.what == RunEvent::What::Submit && (e.request & 0xffffffffull) == 2)
                second_submit_order.push_back(e.thread);
        CHECK(second_submit_order == first_order);
        CHECK(out.stats.completed == 8);
    }

    TEST_CASE("a full queue applies backpressure instead of losing work") {
        ManualExecutor exec;
        Bridge bridge({.workers = 1, .queue_capacity = 1, .transition_cost = 0us});
        const std::vector<Script> workload(3, Script{nop()});

        RunResult out;
        std::thread runner([&] { out = bridge.run_async(workload, exec); });
        for (int released = 0; released < 3; ++released) {
            exec.wait_parked(1);
            exec.release(exec.parked_ids().at(0));
        }
        runner.join();

        CHECK(out.stats.completed == 3);
        for (const auto& [id, resp] : out.responses) CHECK(resp.ok);
    }

    TEST_CASE("async and sync produce identical results; async needs fewer transitions") {
        testutil::TempDir sync_dir;
        testutil::TempDir async_dir;
        RealExecutor sync_exec(sync_dir.path());
        RealExecutor async_exec(async_dir.path());

        std::vector<Script> workload(4);
        for (std::size_t t = 0; t < workload.size(); ++t) {
            for (int i = 0; i < 25; ++i) {
                const std::string path = "t" + std::to_string(t) + "/f" + std::to_string(i);
                workload[t].push_back(write_req(path, to_bytes("v" + std::to_string(i))));
                workload[t].push_back(read_req(path));
            }
        }

        Bridge bridge({.workers = 2, .transition_cost = 0us});
        const RunResult async = bridge.run_async(workload, async_exec);
        const RunResult sync = bridge.run_baseline_sync(workload, sync_exec);

        CHECK(async.stats.completed == 200);
        CHECK(sync.stats.completed == 200);
        CHECK(sync.stats.transitions == 400); // two per request, always
        CHECK(async.stats.transitions < sync.stats.transitions);
        CHECK(same_responses(async, sync));

        // The files the two runs produced are byte-identical too.
        for (std::size_t t = 0; t < workload.size(); ++t) {
            for (int i = 0; i < 25; ++i) {
                const std::string path = "t" + std::to_string(t) + "/f" + std::to_string(i);
                CHECK(read_file(sync_dir.path() / path) == read_file(async_dir.path() / path));
            }
        }
    }

    TEST_CASE("transition dominance holds across randomized workloads") {
        std::mt19937_64 rng(20240817);
        for (int trial = 0; trial < 10; ++trial) {
            testutil::TempDir sync_dir;
            testutil::TempDir async_dir;
            RealExecutor sync_exec(sync_dir.path());
            RealExecutor async_exec(async_dir.path());

            std::vector<Script> workload(3);
            for (std::size_t t = 0; t < workload.size(); ++t) {
                std::size_t files = 0;
                const std::size_t len = 10 + rng() % 20;
                for (std::size_t i = 0; i < len; ++i) {
                    switch (rng() % 4) {
                    case 0:
                        workload[t].push_back(nop());
                        break;
                    case 1:
                        workload[t].push_back(
                            sleep_req(std::chrono::microseconds(rng() % 200)));
                        break;
                    case 2:
                        workload[t].push_back(
                            write_req("t" + std::to_string(t) + "/f" + std::to_string(files++),
                                      testutil::random_bytes(rng, 1 + rng() % 64)));
                        break;
                    default:
                        if (files == 0) {
                            workload[t].push_back(nop());
                        } else {
                            workload[t].push_back(read_req("t" + std::to_string(t) + "/f" +
                                                           std::to_string(rng() % files)));
                        }
                        break;
                    }
                }
            }

            Bridge bridge({.workers = 2, .transition_cost = 0us});
            const RunResult async = bridge.run_async(workload, async_exec);
            const RunResult sync = bridge.run_baseline_sync(workload, sync_exec);
            CHECK(async.stats.transitions <= sync.stats.transitions);
            CHECK(same_responses(async, sync));
        }
    }
}
