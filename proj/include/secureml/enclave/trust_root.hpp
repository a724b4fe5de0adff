#pragma once

#include <map>
#include <optional>
#include <string>

#include "secureml/crypto/ed25519.hpp"
#include "secureml/enclave/quote.hpp"

namespace secureml::enclave {

// Static registry of device public keys. Loaded once at start, immutable
// afterwards; safe to share across threads.
class TrustRoot {
public:
    void register_device(const DeviceId& id, const crypto::Ed25519Key& public_key);
    std::optional<crypto::Ed25519Key> find(const DeviceId& id) const;
    bool empty() const { return devices_.empty(); }
    std::size_t size() const { return devices_.size(); }

    // JSON array of {"device_id": hex, "public_key": hex}.
    std::string to_json() const;
    static TrustRoot from_json(const std::string& json);
    static TrustRoot load_file(const std::string& path);
    void save_file(const std::string& path) const;

private:
    std::map<DeviceId, Bytes> devices_; // id -> raw public key
};

} // namespace secureml::enclave
