#include "secureml/ml/ps.hpp"

#include <algorithm>

#include "secureml/common/codec.hpp"

namespace secureml::ml {
namespace {

BinaryWriter begin(PsMsgType t) {
    BinaryWriter w;
    w.u8(static_cast<std::uint8_t>(t));
    return w;
}

BinaryReader open(BytesView frame, PsMsgType expected) {
    BinaryReader r(frame);
    const auto got = static_cast<PsMsgType>(r.u8());
    if (got != expected) throw DecodeError("unexpected training message type");
    return r;
}

} // namespace

PsMsgType peek_ps_type(BytesView frame) {
    if (frame.empty()) throw DecodeError("empty frame");
    return static_cast<PsMsgType>(frame[0]);
}

Bytes encode_hello(std::uint32_t worker_id) {
    BinaryWriter w = begin(PsMsgType::Hello);
    w.u32(worker_id);
    return w.take();
}

std::uint32_t decode_hello(BytesView frame) {
    BinaryReader r = open(frame, PsMsgType::Hello);
    const std::uint32_t id = r.u32();
    r.expect_done();
    return id;
}

Bytes encode_pull_weights() {
    return begin(PsMsgType::PullWeights).take();
}

void decode_pull_weights(BytesView frame) {
    open(frame, PsMsgType::PullWeights).expect_done();
}

Bytes encode_weights(const ModelArtifact& m) {
    BinaryWriter w = begin(PsMsgType::Weights);
    w.u64(m.version);
    w.blob(m.encode());
    return w.take();
}

ModelArtifact decode_weights(BytesView frame) {
    BinaryReader r = open(frame, PsMsgType::Weights);
    const std::uint64_t version = r.u64();
    const Bytes body = r.blob();
    r.expect_done();
    ModelArtifact m = ModelArtifact::decode(body);
    if (m.version != version) throw DecodeError("weights frame version mismatch");
    return m;
}

Bytes encode_push_gradient(const GradientUpdate& u) {
    BinaryWriter w = begin(PsMsgType::PushGradient);
    w.u32(u.worker_id);
    w.u64(u.step);
    w.u64(u.sample_count);
    w.u32(static_cast<std::uint32_t>(u.grads.size()));
    for (const Layer& g : u.grads) {
        w.u32(static_cast<std::uint32_t>(g.W.size()));
        put_floats(w, g.W);
        w.u32(static_cast<std::uint32_t>(g.b.size()));
        put_floats(w, g.b);
    }
    return w.take();
}

GradientUpdate decode_push_gradient(BytesView frame) {
    BinaryReader r = open(frame, PsMsgType::PushGradient);
    GradientUpdate u;
    u.worker_id = r.u32();
    u.step = r.u64();
    u.sample_count = r.u64();
    const std::uint32_t layers = r.u32();
    if (layers > 64) throw DecodeError("too many gradient layers");
    u.grads.reserve(layers);
    for (std::uint32_t l = 0; l < layers; ++l) {
        Layer g;
        const std::uint32_t wn = r.u32();
        if (r.remaining() < std::size_t{wn} * 4) throw DecodeError("truncated gradient");
        g.W = get_floats(r, wn);
        const std::uint32_t bn = r.u32();
        if (r.remaining() < std::size_t{bn} * 4) throw DecodeError("truncated gradient");
        g.b = get_floats(r, bn);
        u.grads.push_back(std::move(g));
    }
    r.expect_done();
    return u;
}

Bytes encode_ack(std::uint64_t version) {
    BinaryWriter w = begin(PsMsgType::Ack);
    w.u64(version);
    return w.take();
}

std::uint64_t decode_ack(BytesView frame) {
    BinaryReader r = open(frame, PsMsgType::Ack);
    const std::uint64_t version = r.u64();
    r.expect_done();
    return version;
}

namespace {

void write_checkpoint(const CheckpointConfig& cp, const ModelArtifact& m) {
    fsshield::WriteOptions opts;
    opts.freshness = cp.freshness;
    save_model_shielded(cp.root, cp.path, m, cp.key, opts);
}

void check_gradient(const ModelArtifact& m, const GradientUpdate& u, std::uint64_t round,
                    std::uint32_t expected_worker) {
    if (u.step != round) throw TrainAborted(round, "gradient for a different round");
    if (u.worker_id != expected_worker) throw TrainAborted(round, "gradient from wrong worker");
    if (u.sample_count == 0) throw TrainAborted(round, "gradient with no samples");
    if (u.grads.size() != m.layers.size()) throw TrainAborted(round, "gradient shape mismatch");
    for (std::size_t l = 0; l < u.grads.size(); ++l)
        if (u.grads[l].W.size() != m.layers[l].W.size() ||
            u.grads[l].b.size() != m.layers[l].b.size())
            throw TrainAborted(round, "gradient shape mismatch");
}

} // namespace

PsResult serve_training(netshield::Listener& listener, ModelArtifact model, const PsConfig& cfg) {
    model.validate();
    if (cfg.expected_workers == 0) throw ShapeMismatch("a training run needs at least one worker");

    struct WorkerConn {
        std::uint32_t id;
        netshield::Channel ch;
    };
    std::vector<WorkerConn> workers;

    try {
        while (workers.size() < cfg.expected_workers) {
            netshield::Channel ch = listener.accept();
            const std::uint32_t id = decode_hello(ch.recv_frame());
            const bool taken = std::any_of(workers.begin(), workers.end(),
                                           [&](const WorkerConn& w) { return w.id == id; });
            if (taken) throw TrainAborted(model.version, "duplicate worker id");
            workers.push_back(WorkerConn{id, std::move(ch)});
        }
        std::sort(workers.begin(), workers.end(),
                  [](const WorkerConn& a, const WorkerConn& b) { return a.id < b.id; });

        PsResult out;
        for (std::uint64_t round = model.version; round < cfg.train.steps; ++round) {
            const Bytes weights = encode_weights(model);
            for (WorkerConn& w : workers) {
                decode_pull_weights(w.ch.recv_frame());
                w.ch.send_frame(weights);
            }

            // Pool in ascending worker id: sum-of-sums, applied once as the
            // mean over all samples of the round.
            std::vector<Layer> total;
            std::uint64_t samples = 0;
            for (WorkerConn& w : workers) {
                GradientUpdate u = decode_push_gradient(w.ch.recv_frame());
                check_gradient(model, u, round, w.id);
                samples += u.sample_count;
                if (total.empty()) {
                    total = std::move(u.grads);
                } else {
                    for (std::size_t l = 0; l < total.size(); ++l) {
                        for (std::size_t p = 0; p < total[l].W.size(); ++p)
                            total[l].W[p] += u.grads[l].W[p];
                        for (std::size_t p = 0; p < total[l].b.size(); ++p)
                            total[l].b[p] += u.grads[l].b[p];
                    }
                }
            }
            apply_update(model, total, samples, cfg.train.learning_rate);
            ++out.rounds_completed;
            if (cfg.checkpoint && cfg.checkpoint->every > 0 &&
                out.rounds_completed % cfg.checkpoint->every == 0)
                write_checkpoint(*cfg.checkpoint, model);
        }

        // Persist the final state before releasing anyone.
        if (cfg.checkpoint) write_checkpoint(*cfg.checkpoint, model);
        const Bytes ack = encode_ack(model.version);
        for (WorkerConn& w : workers) {
            decode_pull_weights(w.ch.recv_frame());
            w.ch.send_frame(ack);
        }
        out.model = std::move(model);
        return out;
    } catch (const netshield::PeerClosed&) {
        throw TrainAborted(model.version, "worker connection lost");
    } catch (const IoError& e) {
        throw TrainAborted(model.version, e.what());
    }
}

std::uint64_t worker_train_loop(netshield::Channel& channel, const DatasetShard& shard,
                                std::uint32_t worker_id, const TrainConfig& cfg) {
    shard.validate();
    channel.send_frame(encode_hello(worker_id));
    for (;;) {
        channel.send_frame(encode_pull_weights());
        const Bytes reply = channel.recv_frame();
        if (peek_ps_type(reply) == PsMsgType::Ack) return decode_ack(reply);
        const ModelArtifact m = decode_weights(reply);
        const BatchRange batch = batch_for_step(m.version, shard.size(), cfg.batch_size);
        GradientUpdate u = train_step(m, shard, batch.first, batch.count);
        u.worker_id = worker_id;
        u.step = m.version;
        channel.send_frame(encode_push_gradient(u));
    }
}

} // namespace secureml::ml
