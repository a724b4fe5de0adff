#pragma once

#include <string>
#include <vector>

#include "secureml/common/error.hpp"

namespace secureml::fsshield {

enum class Mode : std::uint8_t {
    Passthrough = 0,
    AuthOnly = 1,
    EncryptAuth = 2,
};

const char* mode_name(Mode m);

struct PolicyEntry {
    std::string prefix;
    Mode mode = Mode::Passthrough;
    std::string key_name; // required for non-passthrough entries
};

struct Resolution {
    Mode mode = Mode::Passthrough;
    std::string key_name;
};

// Ordered prefix rules deciding how a path is handled. Longest matching
// prefix wins; unmatched paths pass through untouched.
class PathPolicy {
public:
    PathPolicy() = default;
    explicit PathPolicy(std::vector<PolicyEntry> entries);

    Resolution resolve(const std::string& path) const;

    const std::vector<PolicyEntry>& entries() const { return entries_; }

    // {"rules": [{"prefix": "...", "mode": "passthrough|auth-only|encrypt-auth",
    //             "key": "..."}]}
    static PathPolicy from_json(const std::string& json);
    static PathPolicy load_file(const std::string& path);

private:
    std::vector<PolicyEntry> entries_;
};

} // namespace secureml::fsshield
