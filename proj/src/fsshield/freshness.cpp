#include "secureml/fsshield/freshness.hpp"

namespace secureml::fsshield {

std::uint64_t LocalCounterClient::advance(const std::string& scope) {
    std::lock_guard lock(mu_);
    return ++counters_[scope];
}

std::uint64_t LocalCounterClient::read(const std::string& scope) {
    std::lock_guard lock(mu_);
    auto it = counters_.find(scope);
    return it == counters_.end() ? 0 : it->second;
}

} // namespace secureml::fsshield
