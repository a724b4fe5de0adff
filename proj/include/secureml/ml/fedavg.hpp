#pragma once

#include <cstdint>
#include <vector>

#include "secureml/ml/model.hpp"

namespace secureml::ml {

// One participant's locally trained model plus the sample count it was
// trained on; the count is the averaging weight.
struct FedInput {
    ModelArtifact model;
    std::uint64_t sample_count = 0;
};

// Sample-weighted parameter average. All inputs must share one shape and
// every sample count must be positive. Accumulation runs in double so the
// result is independent of how the per-input sums would round in float; the
// final value is rounded to float once. The output version is
// max(input versions) + 1.
ModelArtifact federated_average(const std::vector<FedInput>& inputs); // throws ShapeMismatch

} // namespace secureml::ml
