#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "secureml/ml/dataset.hpp"
#include "secureml/ml/model.hpp"

namespace secureml::ml {

// All arithmetic below is single-precision in a pinned sequential order:
// logit_j folds b[j] + W[j][0]*x[0] + W[j][1]*x[1] + ... left to right;
// softmax subtracts the running max, exponentiates, and normalizes by the
// left-to-right sum. No parallel or reordered reductions — two runs over the
// same bytes produce the same bytes, which is what makes the
// shielded-vs-plaintext equality testable at the bit level.

struct Scores {
    std::vector<float> probs; // softmax outputs, sum to 1
    std::uint32_t label = 0;  // argmax (lowest index wins ties)
};

// Forward pass: ReLU on hidden layers, softmax on the output layer.
Scores infer(const ModelArtifact& m, std::span<const float> x); // throws ShapeMismatch

// Mean cross-entropy loss over samples [first, first+count) of the shard.
float batch_loss(const ModelArtifact& m, const DatasetShard& d, std::size_t first,
                 std::size_t count);

struct TrainConfig {
    std::uint32_t batch_size = 100;
    float learning_rate = 0.0005f;
    std::uint32_t steps = 1;
    std::uint64_t seed = 0; // initialization seed where a model is created
};

// Summed (not averaged) gradients so a server can pool batches of different
// sizes exactly: the mean over the pool is sum-of-sums / total-count.
struct GradientUpdate {
    std::uint32_t worker_id = 0;
    std::uint64_t step = 0;
    std::vector<Layer> grads; // shapes match the model
    std::uint64_t sample_count = 0;
};

// Backpropagation of softmax cross-entropy over samples [first, first+count),
// accumulated sample by sample in order. Deterministic given (model, batch).
GradientUpdate train_step(const ModelArtifact& m, const DatasetShard& d, std::size_t first,
                          std::size_t count);

// w -= lr * (grad_sum / sample_count), elementwise, in place; bumps version.
void apply_update(ModelArtifact& m, const std::vector<Layer>& grad_sum,
                  std::uint64_t sample_count, float learning_rate);

// The batch the given step draws from a shard of `total` samples: batches
// walk the shard cyclically and a tail batch is simply shorter.
struct BatchRange {
    std::size_t first = 0;
    std::size_t count = 0;
};
BatchRange batch_for_step(std::uint64_t step, std::size_t total, std::uint32_t batch_size);

// Single-process SGD: the reference the distributed runs are compared
// against. Batches follow batch_for_step over the whole shard.
ModelArtifact sgd_run(ModelArtifact m, const DatasetShard& d, const TrainConfig& cfg);

} // namespace secureml::ml
