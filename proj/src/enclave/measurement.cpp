#include "secureml/enclave/measurement.hpp"

#include "secureml/common/codec.hpp"
#include "secureml/common/hex.hpp"

namespace secureml::enclave {

std::string Measurement::hex() const {
    return to_hex(digest);
}

Measurement Measurement::from_hex(const std::string& hex) {
    Bytes raw = secureml::from_hex(hex);
    if (raw.size() != crypto::kDigestLen) throw DecodeError("measurement must be 32 bytes");
    Measurement m;
    std::copy(raw.begin(), raw.end(), m.digest.begin());
    return m;
}

Measurement measure(BytesView code, BytesView config) {
    BinaryWriter w;
    w.u64(code.size());
    w.raw(code);
    w.u64(config.size());
    w.raw(config);
    return Measurement{crypto::sha256(w.bytes())};
}

} // namespace secureml::enclave
