#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "secureml/fsshield/freshness.hpp"
#include "secureml/fsshield/shield.hpp"
#include "secureml/ml/dataset.hpp"
#include "secureml/ml/mlp.hpp"
#include "secureml/ml/model.hpp"
#include "secureml/netshield/channel.hpp"

namespace secureml::ml {

// Synchronous parameter-server training over net-shield channels.
//
// A model's version counts the updates applied to it, so version doubles as
// the global step: a server started from a checkpoint at version 50 resumes
// at round 50 and its workers pick batch 50 next — no separate cursor to
// persist or to drift.
//
// Per round, in worker-id order: each worker sends PullWeights and receives
// Weights{version, model}; each sends back PushGradient for that round. The
// server pools the summed gradients (worker order, left to right), applies
// one update, and the next round begins. A pull after the final round is
// answered with Ack{final version} instead of Weights.

class TrainAborted : public Error {
public:
    TrainAborted(std::uint64_t round, const std::string& why)
        : Error("training aborted at round " + std::to_string(round) + ": " + why),
          round_(round) {}
    std::uint64_t round() const { return round_; }

private:
    std::uint64_t round_;
};

enum class PsMsgType : std::uint8_t {
    Hello = 1,        // worker_id; a worker's first frame
    PullWeights = 2,  // empty; request for the next round's weights
    Weights = 3,      // version + encoded model
    PushGradient = 4, // summed gradients for the round just received
    Ack = 5,          // final version; training is complete
};

PsMsgType peek_ps_type(BytesView frame);
Bytes encode_hello(std::uint32_t worker_id);
std::uint32_t decode_hello(BytesView frame);
Bytes encode_pull_weights();
void decode_pull_weights(BytesView frame);
Bytes encode_weights(const ModelArtifact& m);
ModelArtifact decode_weights(BytesView frame);
Bytes encode_push_gradient(const GradientUpdate& u);
GradientUpdate decode_push_gradient(BytesView frame);
Bytes encode_ack(std::uint64_t version);
std::uint64_t decode_ack(BytesView frame);

// Periodic fs-shield checkpointing of the server's model.
struct CheckpointConfig {
    std::filesystem::path root;
    std::string path; // shield-relative
    fsshield::FileKey key{};
    fsshield::CounterClient* freshness = nullptr;
    std::uint32_t every = 50; // rounds between checkpoints
};

struct PsConfig {
    TrainConfig train;                         // steps is the TARGET version
    std::uint32_t expected_workers = 1;
    std::optional<CheckpointConfig> checkpoint;
};

struct PsResult {
    ModelArtifact model;
    std::uint64_t rounds_completed = 0; // rounds run by this serve call
};

// Accepts `expected_workers` connections (first frame Hello, duplicate ids
// refused), runs rounds model.version → train.steps, checkpoints every
// `every` rounds and once after the last, then acknowledges every worker.
// A worker connection dying mid-run raises TrainAborted with the round
// reached; restart from the last checkpoint is the recovery path.
PsResult serve_training(netshield::Listener& listener, ModelArtifact model, const PsConfig& cfg);

// Worker half: Hello, then pull/compute/push until the server answers a pull
// with Ack. Batches are slices of `shard` chosen by the received version, so
// a worker needs no round cursor of its own. Returns the final version.
std::uint64_t worker_train_loop(netshield::Channel& channel, const DatasetShard& shard,
                                std::uint32_t worker_id, const TrainConfig& cfg);

} // namespace secureml::ml
