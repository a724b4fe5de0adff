#pragma once

#include <array>

#include "secureml/common/bytes.hpp"
#include "secureml/common/error.hpp"

namespace secureml::crypto {

inline constexpr std::size_t kAeadKeyLen = 32;
inline constexpr std::size_t kNonceLen = 12;
inline constexpr std::size_t kTagLen = 16;

using AeadKey = std::array<std::uint8_t, kAeadKeyLen>;
using Nonce = std::array<std::uint8_t, kNonceLen>;
using Tag = std::array<std::uint8_t, kTagLen>;

class AeadTagMismatch : public Error {
public:
    AeadTagMismatch() : Error("aead: authentication tag mismatch") {}
};

struct Sealed {
    Bytes ciphertext;
    Tag tag;
};

// AES-256-GCM. The tag travels separately from the ciphertext because the
// file shield keeps tags in the manifest, not next to the chunk payload.
Sealed aead_encrypt(const AeadKey& key, const Nonce& nonce, BytesView plaintext, BytesView aad);
Bytes aead_decrypt(const AeadKey& key, const Nonce& nonce, BytesView ciphertext, const Tag& tag,
                   BytesView aad);

// Authenticate-only: tag over aad || data with empty ciphertext, so the data
// stays readable by outside tools.
Tag aead_mac(const AeadKey& key, const Nonce& nonce, BytesView data, BytesView aad);
bool aead_mac_verify(const AeadKey& key, const Nonce& nonce, BytesView data, const Tag& tag,
                     BytesView aad);

AeadKey aead_key_from(BytesView data);

} // namespace secureml::crypto
