#pragma once

#include <cstdint>
#include <mutex>
#include <set>
#include <utility>

#include "secureml/crypto/aead.hpp"

namespace secureml::fsshield {

// Tracks every (key, nonce) pair handed to the AEAD so that an accidental
// reuse — which would be catastrophic for GCM — is caught immediately
// instead of silently weakening the ciphertext. Keys are tracked by a
// SHA-256-derived fingerprint, never by their raw bytes.
class NonceRegistry {
public:
    static NonceRegistry& global();

    // Throws Error if this exact pair was recorded before.
    void record(const crypto::AeadKey& key, const crypto::Nonce& nonce);

    std::size_t size() const;
    void reset(); // test support

private:
    using Fingerprint = std::uint64_t;
    static Fingerprint fingerprint(const crypto::AeadKey& key);

    mutable std::mutex mu_;
    std::set<std::pair<Fingerprint, crypto::Nonce>> seen_;
};

// Draws a fresh random nonce and records it in the global registry.
crypto::Nonce fresh_nonce(const crypto::AeadKey& key);

} // namespace secureml::fsshield
