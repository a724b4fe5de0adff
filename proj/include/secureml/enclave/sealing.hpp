#pragma once

#include <string_view>

#include "secureml/crypto/aead.hpp"
#include "secureml/enclave/measurement.hpp"

namespace secureml::enclave {

// Key sealed persistent state is encrypted under. Derivation binds the key to
// both the device and the measurement, so the same code on a different device
// (or different code on the same device) cannot reopen the state.
struct SealingKey {
    crypto::AeadKey key{};
};

// HKDF-SHA-256 with salt = measurement digest, info = label.
SealingKey derive_sealing_key(BytesView device_secret, const Measurement& m,
                              std::string_view label);

} // namespace secureml::enclave
