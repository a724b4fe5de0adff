#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>

namespace secureml::fsshield {

// Source of monotonic counters used to pin a file's latest version. A write
// advances the counter for the file's scope and embeds the new value in the
// manifest; a read compares the embedded value against the stored one, so a
// replayed (older but correctly authenticated) manifest is detected.
class CounterClient {
public:
    virtual ~CounterClient() = default;

    // Registers the scope on first use and advances its counter by one.
    // Returns the value now stored.
    virtual std::uint64_t advance(const std::string& scope) = 0;

    // Current stored value; 0 if the scope was never written.
    virtual std::uint64_t read(const std::string& scope) = 0;
};

// Process-local counters, for single-node setups and tests. Durable
// deployments plug in a client backed by the attestation service instead.
class LocalCounterClient : public CounterClient {
public:
    std::uint64_t advance(const std::string& scope) override;
    std::uint64_t read(const std::string& scope) override;

private:
    std::mutex mu_;
    std::map<std::string, std::uint64_t> counters_;
};

} // namespace secureml::fsshield
