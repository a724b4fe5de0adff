// secureml: operator surface for the attestation service, shielded storage,
// and attested ML workloads. Every subcommand is single-shot except
// `cas serve` and `worker run --role ps`, which run until signalled or done.
//
// Output discipline: machine-parseable single-line JSON on stdout for
// results, single-line JSON on stderr for failures. Secret bytes never reach
// either stream. Exit codes: 0 success, 1 runtime failure, 2 usage.

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "secureml/bridge/bridge.hpp"
#include "secureml/cas/client.hpp"
#include "secureml/cas/errors.hpp"
#include "secureml/cas/policy.hpp"
#include "secureml/cas/service.hpp"
#include "secureml/cas/store.hpp"
#include "secureml/common/fileio.hpp"
#include "secureml/common/hex.hpp"
#include "secureml/crypto/random.hpp"
#include "secureml/enclave/device.hpp"
#include "secureml/enclave/measurement.hpp"
#include "secureml/enclave/sealing.hpp"
#include "secureml/enclave/trust_root.hpp"
#include "secureml/enclave/verify.hpp"
#include "secureml/fsshield/freshness.hpp"
#include "secureml/fsshield/shield.hpp"
#include "secureml/ml/dataset.hpp"
#include "secureml/ml/fedavg.hpp"
#include "secureml/ml/mlp.hpp"
#include "secureml/ml/model.hpp"
#include "secureml/ml/ps.hpp"
#include "secureml/netshield/channel.hpp"

namespace {

using namespace secureml;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

void emit(const json& j) {
    std::cout << j.dump() << "\n" << std::flush;
}

// Usage problems discovered after flag parsing (role-specific requirements).
class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(what) {}
};

// The process's own identity: a digest over this binary's bytes plus the
// session name it runs under, the closest honest analog of a loaded-code
// measurement available without hardware.
enclave::Measurement self_measurement(const std::string& config) {
    return enclave::measure(read_file("/proc/self/exe"), to_bytes(config));
}

// The attestation service seals its store to its own binary and device, the
// same discipline it imposes on workers' checkpoints.
enclave::SealingKey store_sealing_key(const enclave::SimulatedDevice& dev) {
    return enclave::derive_sealing_key(dev.device_secret, self_measurement("cas-store"),
                                       cas::Store::kSealingLabel);
}

fsshield::FileKey key_from_file(const std::string& path) {
    const Bytes raw = read_file(path);
    if (raw.size() != crypto::kAeadKeyLen)
        throw Error("key file must hold exactly 32 raw bytes, got " +
                    std::to_string(raw.size()));
    return crypto::aead_key_from(raw);
}

const Bytes& provisioned(const cas::SecretBundle& b, const std::string& name) {
    const auto it = b.secrets.find(name);
    if (it == b.secrets.end())
        throw Error("session did not provision a secret named '" + name + "'");
    return it->second;
}

std::string hexid(const crypto::Digest& d) {
    return to_hex(BytesView(d.data(), d.size()));
}

// ---------------------------------------------------------------- device ---

struct DeviceInitOpts {
    std::string out;
    std::string trust_root;
};

void cmd_device_init(const DeviceInitOpts& o) {
    const enclave::SimulatedDevice dev = enclave::SimulatedDevice::generate();
    dev.save_file(o.out);
    enclave::TrustRoot root;
    if (std::filesystem::exists(o.trust_root)) root = enclave::TrustRoot::load_file(o.trust_root);
    root.register_device(dev.key.device_id, dev.key.key);
    root.save_file(o.trust_root);
    emit({{"device", o.out},
          {"device_id", to_hex(BytesView(dev.key.device_id.data(), dev.key.device_id.size()))},
          {"trust_root", o.trust_root},
          {"registered_devices", root.size()}});
}

struct MeasureOpts {
    std::string session;
};

void cmd_worker_measure(const MeasureOpts& o) {
    emit({{"session", o.session}, {"measurement", self_measurement(o.session).hex()}});
}

// ------------------------------------------------------------------- cas ---

struct CasCommonOpts {
    std::string store;
    std::string device;
};

struct CasInitOpts : CasCommonOpts {
    std::string authority = "cas-authority";
    std::string root_cert_out;
};

void cmd_cas_init(const CasInitOpts& o) {
    const auto dev = enclave::SimulatedDevice::load_file(o.device);
    if (std::filesystem::exists(o.store)) throw Error("store file already exists: " + o.store);
    const cas::Store store = cas::Store::create(o.authority);
    store.save(o.store, store_sealing_key(dev));
    if (!o.root_cert_out.empty()) write_file(o.root_cert_out, store.root_cert_pem());
    emit({{"store", o.store}, {"authority", o.authority}});
}

struct SessionCreateOpts : CasCommonOpts {
    std::string policy;
};

void cmd_session_create(const SessionCreateOpts& o) {
    const auto dev = enclave::SimulatedDevice::load_file(o.device);
    const enclave::SealingKey key = store_sealing_key(dev);
    cas::Store store = cas::Store::load(o.store, key);
    store.attach(o.store, key);
    const cas::SessionPolicy policy = cas::SessionPolicy::load_file(o.policy);
    const cas::SessionId id = store.create_session(policy);
    emit({{"session", policy.name}, {"session_id", hexid(id)}});
}

struct CasServeOpts : CasCommonOpts {
    std::string trust_root;
    std::string listen = "127.0.0.1:0";
    std::string root_cert_out;
};

// Wakes the blocked serve loop from SIGINT/SIGTERM via a self-pipe; signal
// handlers may only write.
int g_signal_pipe_wr = -1;

extern "C" void on_terminate_signal(int) {
    const char byte = 0;
    const ssize_t ignored = ::write(g_signal_pipe_wr, &byte, 1);
    (void)ignored;
}

void cmd_cas_serve(const CasServeOpts& o) {
    const auto dev = enclave::SimulatedDevice::load_file(o.device);
    const enclave::SealingKey key = store_sealing_key(dev);
    cas::Store store = cas::Store::load(o.store, key);
    store.attach(o.store, key); // audit + counter mutations persist as they happen
    const enclave::TrustRoot devices = enclave::TrustRoot::load_file(o.trust_root);
    const std::string root_pem = store.root_cert_pem();

    cas::CasService service(std::move(store), devices, o.listen);
    if (!o.root_cert_out.empty()) write_file(o.root_cert_out, root_pem);

    int pipefd[2];
    if (::pipe(pipefd) != 0) throw IoError("cannot create signal pipe");
    g_signal_pipe_wr = pipefd[1];
    struct sigaction sa = {};
    sa.sa_handler = on_terminate_signal;
    ::sigaction(SIGTERM, &sa, nullptr);
    ::sigaction(SIGINT, &sa, nullptr);

    emit({{"ready", true}, {"port", service.port()}});
    char byte;
    while (::read(pipefd[0], &byte, 1) < 0 && errno == EINTR) {
    }
    service.stop();
    ::close(pipefd[0]);
    ::close(pipefd[1]);
}

// ---------------------------------------------------------------- shield ---

struct ShieldOpts {
    std::string root;
    std::string path;
    std::string in;
    std::string key_file;
    std::string mode = "encrypt";
    std::uint32_t chunk_size = fsshield::kDefaultChunkSize;
};

void cmd_shield_encrypt(const ShieldOpts& o) {
    const fsshield::FileKey key = key_from_file(o.key_file);
    const Bytes data = read_file(o.in);
    fsshield::WriteOptions opts;
    opts.chunk_size = o.chunk_size;
    if (o.mode == "encrypt")
        opts.mode = fsshield::Mode::EncryptAuth;
    else if (o.mode == "auth")
        opts.mode = fsshield::Mode::AuthOnly;
    else
        throw UsageError("--mode must be encrypt or auth");
    const fsshield::ChunkManifest m = fsshield::shield_write(o.root, o.path, data, key, opts);
    emit({{"path", o.path}, {"bytes", data.size()}, {"chunks", m.chunks.size()}});
}

void cmd_shield_verify(const ShieldOpts& o) {
    fsshield::shield_verify(o.root, o.path, key_from_file(o.key_file));
    emit({{"path", o.path}, {"ok", true}});
}

// ---------------------------------------------------------------- worker ---

struct WorkerRunOpts {
    std::string role;
    std::string session;
    std::string cas_addr;
    std::string cas_root; // service root certificate PEM file
    std::string device;
    std::string peer; // defaults to own session name

    // infer + ps
    std::string root;       // shield directory
    std::string model_path; // shield-relative
    bool freshness = false;

    // infer
    std::string input;
    std::uint32_t limit = 0;

    // ps
    std::string listen = "127.0.0.1:0";
    std::uint32_t steps = 500;
    std::uint32_t workers = 1;
    std::uint32_t checkpoint_every = 50;

    // worker
    std::string ps_addr;
    std::string shard;
    std::uint32_t worker_id = 0;

    // shared training knobs
    std::uint32_t batch = 100;
    float lr = 0.0005f;
};

void require_flag(const std::string& value, const char* flag, const char* role) {
    if (value.empty())
        throw UsageError(std::string(flag) + " is required for --role " + role);
}

void run_role_infer(const WorkerRunOpts& o, cas::CasClient& client,
                    const cas::SecretBundle& bundle, const enclave::SimulatedDevice& dev) {
    require_flag(o.root, "--root", "infer");
    require_flag(o.model_path, "--model-path", "infer");
    require_flag(o.input, "--input", "infer");

    const fsshield::FileKey key = crypto::aead_key_from(provisioned(bundle, "data-key"));
    std::optional<cas::RemoteCounterClient> counters;
    if (o.freshness) counters.emplace(client, dev.key.device_id);
    const ml::ModelArtifact model = ml::load_model_shielded(
        o.root, o.model_path, key, counters ? &*counters : nullptr);
    const ml::DatasetShard data = ml::load_dataset(o.input);

    const std::size_t n = o.limit == 0 ? data.size() : std::min<std::size_t>(o.limit, data.size());
    for (std::size_t i = 0; i < n; ++i) {
        const ml::Scores s = ml::infer(model, {data.row(i), data.dim});
        emit({{"index", i}, {"label", s.label}, {"probs", s.probs}});
    }
    emit({{"done", true}, {"count", n}, {"model_version", model.version}});
}

void run_role_ps(const WorkerRunOpts& o, cas::CasClient& client, const cas::SecretBundle& bundle,
                 const enclave::SimulatedDevice& dev) {
    require_flag(o.root, "--root", "ps");
    require_flag(o.model_path, "--model-path", "ps");

    const fsshield::FileKey key = crypto::aead_key_from(provisioned(bundle, "data-key"));
    const netshield::TlsIdentity identity = netshield::TlsIdentity::from_provisioned(
        provisioned(bundle, "tls-identity"), bundle.root_cert_pem);

    std::optional<cas::RemoteCounterClient> counters;
    if (o.freshness) counters.emplace(client, dev.key.device_id);
    fsshield::CounterClient* fresh = counters ? &*counters : nullptr;
    ml::ModelArtifact model = ml::load_model_shielded(o.root, o.model_path, key, fresh);

    netshield::PeerPolicy policy;
    policy.allowed_peers = {o.peer.empty() ? o.session : o.peer};
    netshield::Listener listener(o.listen, identity, policy);
    emit({{"ready", true}, {"port", listener.port()}, {"start_version", model.version}});

    ml::PsConfig cfg;
    cfg.train.batch_size = o.batch;
    cfg.train.learning_rate = o.lr;
    cfg.train.steps = o.steps;
    cfg.expected_workers = o.workers;
    cfg.checkpoint =
        ml::CheckpointConfig{o.root, o.model_path, key, fresh, o.checkpoint_every};
    const ml::PsResult result = ml::serve_training(listener, std::move(model), cfg);
    emit({{"done", true},
          {"rounds_completed", result.rounds_completed},
          {"final_version", result.model.version}});
}

void run_role_worker(const WorkerRunOpts& o, const cas::SecretBundle& bundle) {
    require_flag(o.ps_addr, "--ps", "worker");
    require_flag(o.shard, "--shard", "worker");

    const netshield::TlsIdentity identity = netshield::TlsIdentity::from_provisioned(
        provisioned(bundle, "tls-identity"), bundle.root_cert_pem);
    const ml::DatasetShard data = ml::load_dataset(o.shard);

    netshield::ConnectOptions opts;
    opts.identity = identity;
    opts.root_pem = bundle.root_cert_pem;
    netshield::PeerPolicy policy;
    policy.allowed_peers = {o.peer.empty() ? o.session : o.peer};
    netshield::Channel channel = netshield::connect(o.ps_addr, opts, policy);

    ml::TrainConfig cfg;
    cfg.batch_size = o.batch;
    const std::uint64_t version = ml::worker_train_loop(channel, data, o.worker_id, cfg);
    emit({{"done", true}, {"final_version", version}});
}

void cmd_worker_run(const WorkerRunOpts& o) {
    if (o.role != "ps" && o.role != "worker" && o.role != "infer")
        throw UsageError("--role must be ps, worker, or infer");

    // Attest first; only a provisioned worker ever touches a protected
    // artifact, and a rejection aborts before any payload work.
    const auto dev = enclave::SimulatedDevice::load_file(o.device);
    cas::CasClient client = cas::CasClient::dial(o.cas_addr, read_text_file(o.cas_root));
    const cas::SecretBundle bundle =
        client.attest(o.session, self_measurement(o.session), dev.key);

    if (o.role == "infer")
        run_role_infer(o, client, bundle, dev);
    else if (o.role == "ps")
        run_role_ps(o, client, bundle, dev);
    else
        run_role_worker(o, bundle);
}

// ----------------------------------------------------- local model tools ---

struct InferOpts {
    std::string model;
    std::string input;
    std::uint32_t limit = 0;
};

void cmd_infer(const InferOpts& o) {
    const ml::ModelArtifact model = ml::load_model(o.model);
    const ml::DatasetShard data = ml::load_dataset(o.input);
    const std::size_t n = o.limit == 0 ? data.size() : std::min<std::size_t>(o.limit, data.size());
    for (std::size_t i = 0; i < n; ++i) {
        const ml::Scores s = ml::infer(model, {data.row(i), data.dim});
        emit({{"index", i}, {"label", s.label}, {"probs", s.probs}});
    }
    emit({{"done", true}, {"count", n}, {"model_version", model.version}});
}

struct FedavgOpts {
    std::vector<std::string> inputs;
    std::vector<std::uint64_t> counts;
    std::string out;
};

void cmd_fedavg(const FedavgOpts& o) {
    if (!o.counts.empty() && o.counts.size() != o.inputs.size())
        throw UsageError("--counts must list one sample count per input");
    std::vector<ml::FedInput> inputs;
    for (std::size_t i = 0; i < o.inputs.size(); ++i)
        inputs.push_back(
            {ml::load_model(o.inputs[i]), o.counts.empty() ? 1 : o.counts[i]});
    const ml::ModelArtifact avg = ml::federated_average(inputs);
    ml::save_model(o.out, avg);
    emit({{"inputs", o.inputs.size()}, {"out", o.out}, {"version", avg.version}});
}

// ----------------------------------------------------------------- bench ---

struct BenchAttestOpts {
    double wan_ms = 70.0;
    int trials = 5;
};

void cmd_bench_attest(const BenchAttestOpts& o) {
    // Self-contained rig: one device, one session, a live service on
    // loopback. The CAS column times the full client experience (TLS dial,
    // quote, provision); the simulated-remote column times the same
    // verification decision behind the configured WAN latency.
    const enclave::SimulatedDevice dev = enclave::SimulatedDevice::generate();
    enclave::TrustRoot devices;
    devices.register_device(dev.key.device_id, dev.key.key);
    const enclave::Measurement m = self_measurement("bench-attest");

    cas::Store store = cas::Store::create("bench-authority");
    cas::SessionPolicy policy;
    policy.name = "bench";
    policy.allowed_measurements = {m};
    policy.secrets.push_back({"data-key", cas::SecretKind::SymmetricKey256,
                              cas::ValueSource::GeneratedByCas, {}});
    policy.secrets.push_back({"tls-identity", cas::SecretKind::TlsIdentity,
                              cas::ValueSource::GeneratedByCas, {}});
    store.create_session(policy);
    const std::string root_pem = store.root_cert_pem();
    cas::CasService service(std::move(store), devices, "127.0.0.1:0");
    const std::string addr = "127.0.0.1:" + std::to_string(service.port());

    std::vector<double> cas_ms, ias_ms, local_ms;
    for (int t = 0; t < o.trials; ++t) {
        const auto t0 = Clock::now();
        cas::CasClient client = cas::CasClient::dial(addr, root_pem);
        (void)client.attest("bench", m, dev.key);
        cas_ms.push_back(ms_between(t0, Clock::now()));
        client.close();
    }

    const enclave::Quote quote =
        enclave::generate_quote(m, enclave::ReportData::from(to_bytes("bench")), dev.key);
    enclave::RemoteSimConfig remote;
    remote.wan_latency = std::chrono::milliseconds(static_cast<std::int64_t>(o.wan_ms));
    for (int t = 0; t < o.trials; ++t) {
        const auto t0 = Clock::now();
        if (!enclave::verify_quote_remote_sim(quote, {m}, devices, remote).accepted)
            throw Error("bench quote unexpectedly rejected");
        ias_ms.push_back(ms_between(t0, Clock::now()));
    }
    for (int t = 0; t < o.trials; ++t) {
        const auto t0 = Clock::now();
        if (!enclave::verify_quote_local(quote, {m}, devices).accepted)
            throw Error("bench quote unexpectedly rejected");
        local_ms.push_back(ms_between(t0, Clock::now()));
    }
    service.stop();

    const double cas_med = median(cas_ms);
    const double ias_med = median(ias_ms);
    emit({{"schema", 1},
          {"bench", "attest"},
          {"wan_ms", o.wan_ms},
          {"trials", o.trials},
          {"cas_total_ms", cas_med},
          {"ias_total_ms", ias_med},
          {"local_verify_ms", median(local_ms)},
          {"speedup", ias_med / cas_med}});
}

struct BenchFsshieldOpts {
    double size_mb = 42.0;
    int trials = 3;
    std::string dir; // scratch; defaults to a fresh temp directory
};

void cmd_bench_fsshield(const BenchFsshieldOpts& o) {
    namespace fs = std::filesystem;
    fs::path scratch = o.dir.empty()
                           ? fs::temp_directory_path() / ("secureml-bench-" +
                                                          std::to_string(::getpid()))
                           : fs::path(o.dir);
    fs::create_directories(scratch);

    // Square hidden layer sized so the encoded model hits the target size.
    const auto target = static_cast<std::uint64_t>(o.size_mb * 1024 * 1024);
    auto n = static_cast<std::uint32_t>(std::sqrt(static_cast<double>(target) / 4.0));
    while (static_cast<std::uint64_t>(n) * n * 4 > target && n > 1) --n;
    const ml::ModelArtifact model = ml::ModelArtifact::seeded({n, n, 16}, 42);

    const fs::path plain = scratch / "model-plain.bin";
    ml::save_model(plain, model);
    const fsshield::FileKey key = crypto::random_key();
    ml::save_model_shielded(scratch, "model-shielded.bin", model, key);
    const std::uint64_t bytes = fs::file_size(plain);

    // A fixed probe batch classified after each load proves the two paths
    // agree bit for bit while we time them.
    const ml::DatasetShard probe = ml::make_blobs(8, n, 4, 7);
    auto classify = [&](const ml::ModelArtifact& mm) {
        std::vector<std::uint32_t> labels;
        for (std::size_t i = 0; i < probe.size(); ++i)
            labels.push_back(ml::infer(mm, {probe.row(i), probe.dim}).label);
        return labels;
    };

    std::vector<double> plain_ms, shield_ms;
    std::vector<std::uint32_t> plain_labels, shield_labels;
    for (int t = 0; t < o.trials; ++t) {
        auto t0 = Clock::now();
        const ml::ModelArtifact mp = ml::load_model(plain);
        plain_ms.push_back(ms_between(t0, Clock::now()));
        plain_labels = classify(mp);

        t0 = Clock::now();
        const ml::ModelArtifact msh = ml::load_model_shielded(scratch, "model-shielded.bin", key);
        shield_ms.push_back(ms_between(t0, Clock::now()));
        shield_labels = classify(msh);
    }
    if (o.dir.empty()) fs::remove_all(scratch);

    const double p = median(plain_ms);
    const double s = median(shield_ms);
    emit({{"schema", 1},
          {"bench", "fsshield"},
          {"model_bytes", bytes},
          {"trials", o.trials},
          {"plain_load_ms", p},
          {"shield_load_ms", s},
          {"overhead_pct", (s - p) / p * 100.0},
          {"outputs_identical", plain_labels == shield_labels}});
}

struct BenchSyscallsOpts {
    std::uint32_t threads = 4;
    std::uint32_t requests = 1000;
    std::uint32_t transition_cost_us = 10;
    std::uint32_t spin_budget_us = 50;
    std::uint32_t workers = 2;
    std::string mode = "both";
};

void cmd_bench_syscalls(const BenchSyscallsOpts& o) {
    if (o.mode != "both" && o.mode != "async" && o.mode != "sync")
        throw UsageError("--mode must be async, sync, or both");

    std::vector<bridge::Script> workload(o.threads);
    for (std::uint32_t t = 0; t < o.threads; ++t)
        for (std::uint32_t r = 0; r < o.requests; ++r) {
            bridge::SyscallRequest req;
            req.kind = bridge::SyscallRequest::Kind::Nop;
            workload[t].push_back(req);
        }

    const auto scratch = std::filesystem::temp_directory_path();
    bridge::RealExecutor exec(scratch);
    bridge::BridgeConfig cfg;
    cfg.workers = o.workers;
    cfg.spin_budget = std::chrono::microseconds(o.spin_budget_us);
    cfg.transition_cost = std::chrono::microseconds(o.transition_cost_us);
    bridge::Bridge b(cfg);

    json out = {{"schema", 1},          {"bench", "syscalls"},
                {"threads", o.threads}, {"requests_per_thread", o.requests},
                {"workers", o.workers}, {"transition_cost_us", o.transition_cost_us}};
    std::optional<bridge::RunResult> sync, async;
    if (o.mode != "async") {
        sync = b.run_baseline_sync(workload, exec);
        out["sync"] = {{"transitions", sync->stats.transitions},
                       {"wall_ms", sync->stats.wall_time.count() / 1000.0},
                       {"completed", sync->stats.completed}};
    }
    if (o.mode != "sync") {
        async = b.run_async(workload, exec);
        out["async"] = {{"transitions", async->stats.transitions},
                        {"context_switches", async->stats.context_switches},
                        {"wall_ms", async->stats.wall_time.count() / 1000.0},
                        {"completed", async->stats.completed}};
    }
    if (sync && async) {
        bool identical = sync->responses.size() == async->responses.size();
        if (identical)
            for (const auto& [id, resp] : sync->responses) {
                const auto it = async->responses.find(id);
                if (it == async->responses.end() || it->second.ok != resp.ok ||
                    it->second.result != resp.result) {
                    identical = false;
                    break;
                }
            }
        out["identical_results"] = identical;
        out["transition_ratio"] =
            static_cast<double>(sync->stats.transitions) /
            static_cast<double>(std::max<std::uint64_t>(async->stats.transitions, 1));
    }
    emit(out);
}

// ------------------------------------------------------------------ main ---

std::string reason_for(const std::exception& e) {
    if (dynamic_cast<const UsageError*>(&e)) return "Usage";
    if (dynamic_cast<const cas::AttestationRejected*>(&e)) return "AttestationRejected";
    if (dynamic_cast<const cas::UnknownSession*>(&e)) return "UnknownSession";
    if (dynamic_cast<const cas::ChannelBindingMismatch*>(&e)) return "ChannelBindingMismatch";
    if (dynamic_cast<const cas::DuplicateSession*>(&e)) return "DuplicateSession";
    if (dynamic_cast<const cas::InvalidPolicy*>(&e)) return "InvalidPolicy";
    if (dynamic_cast<const cas::StaleCounter*>(&e)) return "StaleCounter";
    if (dynamic_cast<const cas::DuplicateScope*>(&e)) return "DuplicateScope";
    if (dynamic_cast<const cas::UnknownScope*>(&e)) return "UnknownScope";
    if (dynamic_cast<const cas::StoreCorrupt*>(&e)) return "StoreCorrupt";
    if (dynamic_cast<const cas::AuditChainBroken*>(&e)) return "AuditChainBroken";
    if (dynamic_cast<const fsshield::FreshnessError*>(&e)) return "FreshnessError";
    if (dynamic_cast<const fsshield::IntegrityError*>(&e)) return "IntegrityError";
    if (dynamic_cast<const ml::TrainAborted*>(&e)) return "TrainAborted";
    if (dynamic_cast<const ml::ShapeMismatch*>(&e)) return "ShapeMismatch";
    if (dynamic_cast<const ml::ModelFormatError*>(&e)) return "ModelFormatError";
    if (dynamic_cast<const ml::DatasetFormatError*>(&e)) return "DatasetFormatError";
    if (dynamic_cast<const netshield::HandshakeError*>(&e)) return "HandshakeError";
    if (dynamic_cast<const netshield::PeerClosed*>(&e)) return "PeerClosed";
    if (dynamic_cast<const netshield::FrameTooLarge*>(&e)) return "FrameTooLarge";
    if (dynamic_cast<const DecodeError*>(&e)) return "DecodeError";
    if (dynamic_cast<const IoError*>(&e)) return "IoError";
    if (dynamic_cast<const Error*>(&e)) return "Error";
    return "Exception";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"secure ML workbench: attestation, shielded storage, attested training"};
    app.require_subcommand(1);

    // device init
    DeviceInitOpts device_init;
    CLI::App* dev = app.add_subcommand("device", "simulated device identities");
    dev->require_subcommand(1);
    CLI::App* dev_init = dev->add_subcommand("init", "create a device and register it");
    dev_init->add_option("--out", device_init.out, "device file to write")->required();
    dev_init->add_option("--trust-root", device_init.trust_root,
                         "trust root to create or extend")->required();
    dev_init->callback([&] { cmd_device_init(device_init); });

    // worker measure / worker run
    MeasureOpts measure;
    WorkerRunOpts wr;
    CLI::App* worker = app.add_subcommand("worker", "attested workloads");
    worker->require_subcommand(1);
    CLI::App* worker_measure =
        worker->add_subcommand("measure", "print this binary's measurement for a session");
    worker_measure->add_option("--session", measure.session, "session name")->required();
    worker_measure->callback([&] { cmd_worker_measure(measure); });

    CLI::App* worker_run = worker->add_subcommand("run", "attest, get provisioned, run a role");
    worker_run->add_option("--role", wr.role, "ps | worker | infer")->required();
    worker_run->add_option("--session", wr.session, "session to attest under")->required();
    worker_run->add_option("--cas", wr.cas_addr, "attestation service host:port")->required();
    worker_run->add_option("--cas-root", wr.cas_root, "service root certificate PEM")->required();
    worker_run->add_option("--device", wr.device, "device file")->required();
    worker_run->add_option("--peer", wr.peer, "peer common name (default: session name)");
    worker_run->add_option("--root", wr.root, "shield directory (infer, ps)");
    worker_run->add_option("--model-path", wr.model_path, "shield-relative model path");
    worker_run->add_flag("--freshness", wr.freshness, "anchor reads/writes to service counters");
    worker_run->add_option("--input", wr.input, "dataset shard to classify (infer)");
    worker_run->add_option("--limit", wr.limit, "classify at most this many rows");
    worker_run->add_option("--listen", wr.listen, "bind address (ps)");
    worker_run->add_option("--steps", wr.steps, "target model version (ps)");
    worker_run->add_option("--workers", wr.workers, "worker connections to expect (ps)");
    worker_run->add_option("--checkpoint-every", wr.checkpoint_every, "rounds per checkpoint");
    worker_run->add_option("--ps", wr.ps_addr, "parameter server host:port (worker)");
    worker_run->add_option("--shard", wr.shard, "local dataset shard file (worker)");
    worker_run->add_option("--worker-id", wr.worker_id, "unique id within the run (worker)");
    worker_run->add_option("--batch", wr.batch, "batch size per round");
    worker_run->add_option("--lr", wr.lr, "learning rate (ps)");
    worker_run->callback([&] { cmd_worker_run(wr); });

    // cas init / session create / cas serve
    CasInitOpts cas_init;
    CasServeOpts cas_serve;
    CLI::App* cas_cmd = app.add_subcommand("cas", "configuration and attestation service");
    cas_cmd->require_subcommand(1);
    CLI::App* cas_init_cmd = cas_cmd->add_subcommand("init", "create a sealed store");
    cas_init_cmd->add_option("--store", cas_init.store, "store file to create")->required();
    cas_init_cmd->add_option("--device", cas_init.device, "device file")->required();
    cas_init_cmd->add_option("--authority", cas_init.authority, "root CA common name");
    cas_init_cmd->add_option("--root-cert-out", cas_init.root_cert_out,
                             "write the root certificate PEM here");
    cas_init_cmd->callback([&] { cmd_cas_init(cas_init); });

    CLI::App* cas_serve_cmd = cas_cmd->add_subcommand("serve", "serve attestation and counters");
    cas_serve_cmd->add_option("--store", cas_serve.store, "sealed store file")->required();
    cas_serve_cmd->add_option("--device", cas_serve.device, "device file")->required();
    cas_serve_cmd->add_option("--trust-root", cas_serve.trust_root, "trusted device registry")
        ->required();
    cas_serve_cmd->add_option("--listen", cas_serve.listen, "bind address (default ephemeral)");
    cas_serve_cmd->add_option("--root-cert-out", cas_serve.root_cert_out,
                              "write the root certificate PEM here");
    cas_serve_cmd->callback([&] { cmd_cas_serve(cas_serve); });

    SessionCreateOpts session_create;
    CLI::App* session = app.add_subcommand("session", "session policies");
    session->require_subcommand(1);
    CLI::App* session_create_cmd = session->add_subcommand("create", "add a session to a store");
    session_create_cmd->add_option("--store", session_create.store, "sealed store file")
        ->required();
    session_create_cmd->add_option("--device", session_create.device, "device file")->required();
    session_create_cmd->add_option("--policy", session_create.policy, "policy JSON file")
        ->required();
    session_create_cmd->callback([&] { cmd_session_create(session_create); });

    // shield encrypt / verify
    ShieldOpts shield;
    CLI::App* shield_cmd = app.add_subcommand("shield", "protected file storage");
    shield_cmd->require_subcommand(1);
    CLI::App* shield_enc = shield_cmd->add_subcommand("encrypt", "write a file through the shield");
    shield_enc->add_option("--root", shield.root, "shield directory")->required();
    shield_enc->add_option("--path", shield.path, "shield-relative destination")->required();
    shield_enc->add_option("--in", shield.in, "plaintext input file")->required();
    shield_enc->add_option("--key-file", shield.key_file, "32-byte key file")->required();
    shield_enc->add_option("--mode", shield.mode, "encrypt | auth");
    shield_enc->add_option("--chunk-size", shield.chunk_size, "chunk size in bytes");
    shield_enc->callback([&] { cmd_shield_encrypt(shield); });
    CLI::App* shield_ver = shield_cmd->add_subcommand("verify", "authenticate a shielded file");
    shield_ver->add_option("--root", shield.root, "shield directory")->required();
    shield_ver->add_option("--path", shield.path, "shield-relative path")->required();
    shield_ver->add_option("--key-file", shield.key_file, "32-byte key file")->required();
    shield_ver->callback([&] { cmd_shield_verify(shield); });

    // infer / fedavg
    InferOpts infer;
    CLI::App* infer_cmd = app.add_subcommand("infer", "classify a shard with a plaintext model");
    infer_cmd->add_option("--model", infer.model, "model file")->required();
    infer_cmd->add_option("--input", infer.input, "dataset shard file")->required();
    infer_cmd->add_option("--limit", infer.limit, "classify at most this many rows");
    infer_cmd->callback([&] { cmd_infer(infer); });

    FedavgOpts fedavg;
    CLI::App* fedavg_cmd = app.add_subcommand("fedavg", "average locally trained models");
    fedavg_cmd->add_option("--inputs", fedavg.inputs, "model files")->required()->expected(-1);
    fedavg_cmd->add_option("--counts", fedavg.counts, "per-model sample counts");
    fedavg_cmd->add_option("--out", fedavg.out, "output model file")->required();
    fedavg_cmd->callback([&] { cmd_fedavg(fedavg); });

    // bench
    BenchAttestOpts ba;
    BenchFsshieldOpts bf;
    BenchSyscallsOpts bs;
    CLI::App* bench = app.add_subcommand("bench", "performance measurements");
    bench->require_subcommand(1);
    CLI::App* bench_attest = bench->add_subcommand("attest", "local service vs simulated remote");
    bench_attest->add_option("--wan-ms", ba.wan_ms, "one-way WAN latency to simulate");
    bench_attest->add_option("--trials", ba.trials, "timing repetitions")
        ->check(CLI::PositiveNumber);
    bench_attest->callback([&] { cmd_bench_attest(ba); });
    CLI::App* bench_fs = bench->add_subcommand("fsshield", "shielded vs plaintext model loads");
    bench_fs->add_option("--size-mb", bf.size_mb, "synthetic model size");
    bench_fs->add_option("--trials", bf.trials, "timing repetitions")->check(CLI::PositiveNumber);
    bench_fs->add_option("--dir", bf.dir, "scratch directory (default: temp)");
    bench_fs->callback([&] { cmd_bench_fsshield(bf); });
    CLI::App* bench_sys = bench->add_subcommand("syscalls", "async bridge vs synchronous calls");
    bench_sys->add_option("--threads", bs.threads, "app threads")->check(CLI::PositiveNumber);
    bench_sys->add_option("--requests", bs.requests, "requests per thread")
        ->check(CLI::PositiveNumber);
    bench_sys->add_option("--transition-cost-us", bs.transition_cost_us,
                          "cost charged per simulated enclave transition");
    bench_sys->add_option("--spin-budget-us", bs.spin_budget_us, "in-enclave spin before exiting");
    bench_sys->add_option("--workers", bs.workers, "service threads")->check(CLI::PositiveNumber);
    bench_sys->add_option("--mode", bs.mode, "async | sync | both");
    bench_sys->callback([&] { cmd_bench_syscalls(bs); });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help and friends
        std::cerr << json{{"error", "Usage"}, {"detail", e.what()}}.dump() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << json{{"error", "Usage"}, {"detail", e.what()}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", reason_for(e)}, {"detail", e.what()}}.dump() << "\n";
        return 1;
    }
}
