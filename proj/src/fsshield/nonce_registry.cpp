#include "secureml/fsshield/nonce_registry.hpp"

#include <cstring>

#include "secureml/common/error.hpp"
#include "secureml/crypto/random.hpp"
#include "secureml/crypto/sha256.hpp"

namespace secureml::fsshield {

NonceRegistry& NonceRegistry::global() {
    static NonceRegistry instance;
    return instance;
}

NonceRegistry::Fingerprint NonceRegistry::fingerprint(const crypto::AeadKey& key) {
    const crypto::Digest d = crypto::sha256(BytesView(key.data(), key.size()));
    Fingerprint fp = 0;
    std::memcpy(&fp, d.data(), sizeof(fp));
    return fp;
}

void NonceRegistry::record(const crypto::AeadKey& key, const crypto::Nonce& nonce) {
    std::lock_guard lock(mu_);
    if (!seen_.emplace(fingerprint(key), nonce).second)
        throw Error("nonce reused under the same key");
}

std::size_t NonceRegistry::size() const {
    std::lock_guard lock(mu_);
    return seen_.size();
}

void NonceRegistry::reset() {
    std::lock_guard lock(mu_);
    seen_.clear();
}

crypto::Nonce fresh_nonce(const crypto::AeadKey& key) {
    crypto::Nonce n = crypto::random_nonce();
    NonceRegistry::global().record(key, n);
    return n;
}

} // namespace secureml::fsshield
