#include "secureml/ml/fedavg.hpp"

#include <algorithm>

namespace secureml::ml {

ModelArtifact federated_average(const std::vector<FedInput>& inputs) {
    if (inputs.empty()) throw ShapeMismatch("no models to average");
    const ModelArtifact& first = inputs.front().model;
    double total_weight = 0.0;
    std::uint64_t max_version = 0;
    for (const FedInput& in : inputs) {
        if (in.sample_count == 0) throw ShapeMismatch("participant with no samples");
        if (in.model.layer_dims != first.layer_dims)
            throw ShapeMismatch("participant model shapes differ");
        in.model.validate();
        total_weight += static_cast<double>(in.sample_count);
        max_version = std::max(max_version, in.model.version);
    }

    ModelArtifact out = ModelArtifact::zeros(first.layer_dims);
    out.version = max_version + 1;
    for (std::size_t l = 0; l < out.layers.size(); ++l) {
        Layer& dst = out.layers[l];
        for (std::size_t p = 0; p < dst.W.size(); ++p) {
            double acc = 0.0;
            for (const FedInput& in : inputs)
                acc += static_cast<double>(in.model.layers[l].W[p]) *
                       static_cast<double>(in.sample_count);
            dst.W[p] = static_cast<float>(acc / total_weight);
        }
        for (std::size_t p = 0; p < dst.b.size(); ++p) {
            double acc = 0.0;
            for (const FedInput& in : inputs)
                acc += static_cast<double>(in.model.layers[l].b[p]) *
                       static_cast<double>(in.sample_count);
            dst.b[p] = static_cast<float>(acc / total_weight);
        }
    }
    return out;
}

} // namespace secureml::ml
