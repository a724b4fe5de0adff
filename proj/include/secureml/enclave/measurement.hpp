#pragma once

#include <compare>
#include <string>

#include "secureml/common/bytes.hpp"
#include "secureml/crypto/sha256.hpp"

namespace secureml::enclave {

// Identity of a simulated enclave: digest over the canonical encoding of the
// loaded code and configuration. Stands in for MRENCLAVE.
struct Measurement {
    crypto::Digest digest{};

    auto operator<=>(const Measurement&) const = default;

    std::string hex() const;
    static Measurement from_hex(const std::string& hex);
};

// digest = SHA-256(len(code) || code || len(config) || config), lengths as
// 8-byte big-endian. The length prefixes keep (code, config) unambiguous.
Measurement measure(BytesView code, BytesView config);

} // namespace secureml::enclave
