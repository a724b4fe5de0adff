#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include "secureml/crypto/certs.hpp"
#include "secureml/crypto/random.hpp"
#include "secureml/fsshield/freshness.hpp"
#include "secureml/ml/mlp.hpp"
#include "secureml/ml/ps.hpp"
#include "secureml/netshield/channel.hpp"

#include "support/test_util.hpp"

using namespace secureml;
using namespace secureml::ml;

namespace {

// One CA for the whole binary: the server is "ps", every worker is "worker",
// and each side admits only the other's name.
struct TlsEnv {
    crypto::CertAuthority ca = crypto::CertAuthority::generate("train-root");

    netshield::TlsIdentity identity(const std::string& cn) const {
        const crypto::IssuedCert leaf = ca.issue_leaf(cn, -300, 3600);
        return {leaf.cert_pem, leaf.key_pem, ca.cert_pem()};
    }

    netshield::Listener listen() const {
        netshield::PeerPolicy policy;
        policy.allowed_peers = {"worker"};
        return netshield::Listener("127.0.0.1:0", identity("ps"), policy);
    }

    netshield::Channel dial(std::uint16_t port) const {
        netshield::ConnectOptions opts;
        opts.identity = identity("worker");
        opts.root_pem = ca.cert_pem();
        netshield::PeerPolicy policy;
        policy.allowed_peers = {"ps"};
        return netshield::connect("127.0.0.1:" + std::to_string(port), opts, policy);
    }
};

bool same_bytes(const ModelArtifact& a, const ModelArtifact& b) {
    return a.encode() == b.encode();
}

} // namespace

TEST_CASE("one worker reproduces the single-process loop bit for bit") {
    TlsEnv tls;
    const ModelArtifact start = ModelArtifact::seeded({4, 8, 3}, 7, 0.3f);
    const DatasetShard data = make_blobs(150, 4, 3, 9);
    TrainConfig cfg;
    cfg.batch_size = 32;
    cfg.steps = 12;
    const ModelArtifact oracle = sgd_run(start, data, cfg);

    netshield::Listener listener = tls.listen();
    const std::uint16_t port = listener.port();
    PsResult result;
    std::thread server([&] {
        PsConfig ps;
        ps.train = cfg;
        ps.expected_workers = 1;
        result = serve_training(listener, start, ps);
    });
    netshield::Channel ch = tls.dial(port);
    const std::uint64_t final_version = worker_train_loop(ch, data, 0, cfg);
    server.join();

    CHECK(final_version == 12);
    CHECK(result.rounds_completed == 12);
    CHECK(result.model.version == 12);
    CHECK(same_bytes(result.model, oracle));
}

TEST_CASE("two workers match the pooled-gradient oracle exactly") {
    TlsEnv tls;
    const ModelArtifact start = ModelArtifact::seeded({4, 8, 3}, 20, 0.3f);
    const DatasetShard all = make_blobs(180, 4, 3, 21);
    const DatasetShard shard1 = all.slice(0, 100);
    const DatasetShard shard2 = all.slice(100, 80);
    TrainConfig cfg;
    cfg.batch_size = 32;
    cfg.steps = 10;

    // Oracle 1 mirrors the server's pooling: per-shard sums added in worker
    // order, one update from the grand total. This must match to the bit.
    ModelArtifact pooled = start;
    for (std::uint64_t round = 0; round < cfg.steps; ++round) {
        const BatchRange r1 = batch_for_step(round, shard1.size(), cfg.batch_size);
        const BatchRange r2 = batch_for_step(round, shard2.size(), cfg.batch_size);
        GradientUpdate u1 = train_step(pooled, shard1, r1.first, r1.count);
        const GradientUpdate u2 = train_step(pooled, shard2, r2.first, r2.count);
        for (std::size_t l = 0; l < u1.grads.size(); ++l) {
            for (std::size_t p = 0; p < u1.grads[l].W.size(); ++p)
                u1.grads[l].W[p] += u2.grads[l].W[p];
            for (std::size_t p = 0; p < u1.grads[l].b.size(); ++p)
                u1.grads[l].b[p] += u2.grads[l].b[p];
        }
        apply_update(pooled, u1.grads, u1.sample_count + u2.sample_count, cfg.learning_rate);
    }

    // Oracle 2 trains on the union batch sample by sample; it differs from
    // the pooled sum only in float fold order, so it agrees approximately.
    ModelArtifact unioned = start;
    for (std::uint64_t round = 0; round < cfg.steps; ++round) {
        const BatchRange r1 = batch_for_step(round, shard1.size(), cfg.batch_size);
        const BatchRange r2 = batch_for_step(round, shard2.size(), cfg.batch_size);
        const DatasetShard batch = DatasetShard::concat(
            {shard1.slice(r1.first, r1.count), shard2.slice(r2.first, r2.count)});
        const GradientUpdate u = train_step(unioned, batch, 0, batch.size());
        apply_update(unioned, u.grads, u.sample_count, cfg.learning_rate);
    }

    netshield::Listener listener = tls.listen();
    const std::uint16_t port = listener.port();
    PsResult result;
    std::thread server([&] {
        PsConfig ps;
        ps.train = cfg;
        ps.expected_workers = 2;
        result = serve_training(listener, start, ps);
    });
    // Higher id connects first: ordering must come from ids, not arrival.
    std::thread w2([&] {
        netshield::Channel ch = tls.dial(port);
        worker_train_loop(ch, shard2, 2, cfg);
    });
    std::thread w1([&] {
        netshield::Channel ch = tls.dial(port);
        worker_train_loop(ch, shard1, 1, cfg);
    });
    w1.join();
    w2.join();
    server.join();

    CHECK(same_bytes(result.model, pooled));
    for (std::size_t l = 0; l < result.model.layers.size(); ++l)
        for (std::size_t p = 0; p < result.model.layers[l].W.size(); ++p)
            CHECK(result.model.layers[l].W[p] ==
                  doctest::Approx(unioned.layers[l].W[p]).epsilon(1e-4));
}

TEST_CASE("a dead worker aborts the run; a fresh one resumes from the checkpoint") {
    TlsEnv tls;
    testutil::TempDir dir;
    const fsshield::FileKey key = crypto::random_key();
    fsshield::LocalCounterClient counters;

    const ModelArtifact start = ModelArtifact::seeded({2, 16, 2}, 17, 0.5f);
    const DatasetShard data = make_blobs(200, 2, 2, 31, 5.0f, 0.5f);
    TrainConfig cfg;
    cfg.batch_size = 100;
    cfg.steps = 10;
    const ModelArtifact oracle = sgd_run(start, data, cfg);
    const float loss_before = batch_loss(start, data, 0, data.size());

    PsConfig ps;
    ps.train = cfg;
    ps.expected_workers = 1;
    ps.checkpoint = CheckpointConfig{dir.path(), "ckpt/model.bin", key, &counters, 2};

    // Phase 1: the worker completes five rounds, then vanishes without a
    // goodbye. The server must abort at round 5, leaving the round-4
    // checkpoint as the last good state.
    netshield::Listener listener = tls.listen();
    std::thread dying([&, port = listener.port()] {
        netshield::Channel ch = tls.dial(port);
        ch.send_frame(encode_hello(1));
        for (int round = 0; round < 5; ++round) {
            ch.send_frame(encode_pull_weights());
            const ModelArtifact m = decode_weights(ch.recv_frame());
            const BatchRange r = batch_for_step(m.version, data.size(), cfg.batch_size);
            GradientUpdate u = train_step(m, data, r.first, r.count);
            u.worker_id = 1;
            u.step = m.version;
            ch.send_frame(encode_push_gradient(u));
        }
        ch.close();
    });
    std::uint64_t aborted_at = 0;
    try {
        serve_training(listener, start, ps);
        FAIL("server should have aborted");
    } catch (const TrainAborted& e) {
        aborted_at = e.round();
    }
    dying.join();
    CHECK(aborted_at == 5);

    // Phase 2: reload the checkpoint (freshness-checked) and finish with a
    // brand-new worker. Round 4 is recomputed, so the final bytes still
    // match the uninterrupted oracle.
    const ModelArtifact resumed = load_model_shielded(dir.path(), "ckpt/model.bin", key, &counters);
    CHECK(resumed.version == 4);

    netshield::Listener listener2 = tls.listen();
    const std::uint16_t port2 = listener2.port();
    PsResult result;
    std::thread server([&] { result = serve_training(listener2, resumed, ps); });
    netshield::Channel ch = tls.dial(port2);
    worker_train_loop(ch, data, 5, cfg);
    server.join();

    CHECK(result.rounds_completed == 6);
    CHECK(result.model.version == 10);
    CHECK(same_bytes(result.model, oracle));

    const float loss_after = batch_loss(result.model, data, 0, data.size());
    CHECK(loss_after < loss_before);

    // The final checkpoint on disk is the final model.
    const ModelArtifact last = load_model_shielded(dir.path(), "ckpt/model.bin", key, &counters);
    CHECK(same_bytes(last, result.model));
}

TEST_CASE("duplicate worker ids abort the greeting") {
    TlsEnv tls;
    netshield::Listener listener = tls.listen();
    const std::uint16_t port = listener.port();

    std::atomic<int> launched{0};
    auto clone = [&] {
        try {
            netshield::Channel ch = tls.dial(port);
            ch.send_frame(encode_hello(3));
            ++launched;
            (void)ch.recv_frame(); // blocks until the server tears down
        } catch (const Error&) {
        }
    };
    std::thread a(clone), b(clone);

    PsConfig ps;
    ps.train.steps = 4;
    ps.expected_workers = 2;
    CHECK_THROWS_AS(serve_training(listener, ModelArtifact::seeded({2, 2}, 1), ps), TrainAborted);
    a.join();
    b.join();
    CHECK(launched == 2);
}

TEST_CASE("a worker speaking out of turn is an error, not a hang") {
    TlsEnv tls;
    netshield::Listener listener = tls.listen();
    const std::uint16_t port = listener.port();

    std::thread rogue([&] {
        try {
            netshield::Channel ch = tls.dial(port);
            ch.send_frame(encode_hello(1));
            ch.send_frame(encode_ack(99)); // where a PullWeights belongs
            (void)ch.recv_frame();
        } catch (const Error&) {
        }
    });
    PsConfig ps;
    ps.train.steps = 2;
    ps.expected_workers = 1;
    CHECK_THROWS_AS(serve_training(listener, ModelArtifact::seeded({2, 2}, 1), ps), DecodeError);
    rogue.join();
}

TEST_CASE("a run whose target is already met just acknowledges") {
    TlsEnv tls;
    ModelArtifact start = ModelArtifact::seeded({3, 2}, 5);
    start.version = 8;
    TrainConfig cfg;
    cfg.steps = 8; // already there

    netshield::Listener listener = tls.listen();
    const std::uint16_t port = listener.port();
    PsResult result;
    std::thread server([&] {
        PsConfig ps;
        ps.train = cfg;
        ps.expected_workers = 1;
        result = serve_training(listener, start, ps);
    });
    netshield::Channel ch = tls.dial(port);
    const DatasetShard data = make_blobs(10, 3, 2, 2);
    const std::uint64_t v = worker_train_loop(ch, data, 0, cfg);
    server.join();
    CHECK(v == 8);
    CHECK(result.rounds_completed == 0);
    CHECK(same_bytes(result.model, start));
}
