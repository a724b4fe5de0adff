#include "secureml/enclave/sealing.hpp"

#include "secureml/common/error.hpp"
#include "secureml/crypto/hkdf.hpp"

namespace secureml::enclave {

SealingKey derive_sealing_key(BytesView device_secret, const Measurement& m,
                              std::string_view label) {
    if (label.empty()) throw Error("sealing label must be non-empty");
    Bytes out = crypto::hkdf_sha256(device_secret, m.digest, label, crypto::kAeadKeyLen);
    return SealingKey{crypto::aead_key_from(out)};
}

} // namespace secureml::enclave
