#include "secureml/ml/mlp.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace secureml::ml {
namespace {

// One layer forward: out_j = b[j] + sum_i W[j*in+i] * x[i], folded left to
// right. The only reduction in the hot path; its order is part of the
// contract.
void affine(const Layer& layer, std::span<const float> x, std::size_t in, std::size_t out,
            std::vector<float>& y) {
    y.resize(out);
    for (std::size_t j = 0; j < out; ++j) {
        float acc = layer.b[j];
        const float* row = layer.W.data() + j * in;
        for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
        y[j] = acc;
    }
}

void relu_inplace(std::vector<float>& v) {
    for (float& x : v) x = x > 0.0f ? x : 0.0f;
}

// Max-subtracted softmax; max and sum both fold left to right from index 0.
void softmax_inplace(std::vector<float>& v) {
    float m = v[0];
    for (std::size_t j = 1; j < v.size(); ++j) m = v[j] > m ? v[j] : m;
    float sum = 0.0f;
    for (float& x : v) {
        x = std::exp(x - m);
        sum += x;
    }
    for (float& x : v) x /= sum;
}

// Forward pass keeping every post-activation vector; acts[0] is the input,
// acts.back() the softmax output.
void forward(const ModelArtifact& m, std::span<const float> x,
             std::vector<std::vector<float>>& acts) {
    acts.resize(m.layers.size() + 1);
    acts[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        const std::size_t in = m.layer_dims[l];
        const std::size_t out = m.layer_dims[l + 1];
        affine(m.layers[l], acts[l], in, out, acts[l + 1]);
        if (l + 1 < m.layers.size())
            relu_inplace(acts[l + 1]);
        else
            softmax_inplace(acts[l + 1]);
    }
}

void check_input(const ModelArtifact& m, std::size_t dim) {
    if (m.layers.empty()) throw ShapeMismatch("model has no layers");
    if (dim != m.input_dim()) throw ShapeMismatch("input dimension does not match the model");
}

void check_batch(const DatasetShard& d, std::size_t first, std::size_t count) {
    if (count == 0) throw ShapeMismatch("empty batch");
    if (first >= d.size() || d.size() - first < count)
        throw ShapeMismatch("batch range exceeds the shard");
}

} // namespace

Scores infer(const ModelArtifact& m, std::span<const float> x) {
    check_input(m, x.size());
    std::vector<std::vector<float>> acts;
    forward(m, x, acts);
    Scores s;
    s.probs = std::move(acts.back());
    for (std::size_t j = 1; j < s.probs.size(); ++j)
        if (s.probs[j] > s.probs[s.label]) s.label = static_cast<std::uint32_t>(j);
    return s;
}

float batch_loss(const ModelArtifact& m, const DatasetShard& d, std::size_t first,
                 std::size_t count) {
    check_input(m, d.dim);
    check_batch(d, first, count);
    std::vector<std::vector<float>> acts;
    float total = 0.0f;
    for (std::size_t s = 0; s < count; ++s) {
        forward(m, {d.row(first + s), d.dim}, acts);
        const float p = acts.back()[d.labels[first + s]];
        // Clamp keeps the loss finite when a probability underflows to zero.
        total += -std::log(p > 1e-30f ? p : 1e-30f);
    }
    return total / static_cast<float>(count);
}

GradientUpdate train_step(const ModelArtifact& m, const DatasetShard& d, std::size_t first,
                          std::size_t count) {
    check_input(m, d.dim);
    check_batch(d, first, count);
    GradientUpdate u;
    u.sample_count = count;
    u.grads.reserve(m.layers.size());
    for (const Layer& l : m.layers) {
        Layer g;
        g.W.assign(l.W.size(), 0.0f);
        g.b.assign(l.b.size(), 0.0f);
        u.grads.push_back(std::move(g));
    }

    std::vector<std::vector<float>> acts;
    std::vector<float> delta, prev_delta;
    for (std::size_t s = 0; s < count; ++s) {
        forward(m, {d.row(first + s), d.dim}, acts);

        // Output layer: d(loss)/d(logit_j) = p_j - [j == label].
        delta = acts.back();
        delta[d.labels[first + s]] -= 1.0f;

        for (std::size_t l = m.layers.size(); l-- > 0;) {
            const std::size_t in = m.layer_dims[l];
            const std::size_t out = m.layer_dims[l + 1];
            const std::vector<float>& input = acts[l];
            Layer& g = u.grads[l];
            for (std::size_t j = 0; j < out; ++j) {
                g.b[j] += delta[j];
                float* grow = g.W.data() + j * in;
                for (std::size_t i = 0; i < in; ++i) grow[i] += delta[j] * input[i];
            }
            if (l == 0) break;
            // Back through the weights, then through the ReLU of layer l-1:
            // a zero activation means the unit was clamped, so its gradient
            // is dropped.
            prev_delta.assign(in, 0.0f);
            for (std::size_t j = 0; j < out; ++j) {
                const float* row = m.layers[l].W.data() + j * in;
                for (std::size_t i = 0; i < in; ++i) prev_delta[i] += delta[j] * row[i];
            }
            for (std::size_t i = 0; i < in; ++i)
                if (input[i] <= 0.0f) prev_delta[i] = 0.0f;
            delta = prev_delta;
        }
    }
    return u;
}

void apply_update(ModelArtifact& m, const std::vector<Layer>& grad_sum,
                  std::uint64_t sample_count, float learning_rate) {
    if (grad_sum.size() != m.layers.size()) throw ShapeMismatch("gradient layer count mismatch");
    if (sample_count == 0) throw ShapeMismatch("gradient with no samples");
    const float n = static_cast<float>(sample_count);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        Layer& layer = m.layers[l];
        const Layer& g = grad_sum[l];
        if (g.W.size() != layer.W.size() || g.b.size() != layer.b.size())
            throw ShapeMismatch("gradient shape mismatch");
        // Divide first, then scale: the server and the single-process loop
        // must hit the exact same float sequence.
        for (std::size_t p = 0; p < layer.W.size(); ++p) {
            const float mean = g.W[p] / n;
            layer.W[p] -= learning_rate * mean;
        }
        for (std::size_t p = 0; p < layer.b.size(); ++p) {
            const float mean = g.b[p] / n;
            layer.b[p] -= learning_rate * mean;
        }
    }
    ++m.version;
}

BatchRange batch_for_step(std::uint64_t step, std::size_t total, std::uint32_t batch_size) {
    if (total == 0 || batch_size == 0) throw ShapeMismatch("empty shard or batch size");
    BatchRange r;
    r.first = static_cast<std::size_t>((step * batch_size) % total);
    r.count = std::min<std::size_t>(batch_size, total - r.first);
    return r;
}

ModelArtifact sgd_run(ModelArtifact m, const DatasetShard& d, const TrainConfig& cfg) {
    for (std::uint64_t step = 0; step < cfg.steps; ++step) {
        const BatchRange r = batch_for_step(step, d.size(), cfg.batch_size);
        const GradientUpdate u = train_step(m, d, r.first, r.count);
        apply_update(m, u.grads, u.sample_count, cfg.learning_rate);
    }
    return m;
}

} // namespace secureml::ml
