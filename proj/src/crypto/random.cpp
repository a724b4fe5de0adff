#include "secureml/crypto/random.hpp"

#include <openssl/rand.h>

#include "secureml/common/error.hpp"

namespace secureml::crypto {

Bytes random_bytes(std::size_t n) {
    Bytes out(n);
    if (n > 0 && RAND_bytes(out.data(), static_cast<int>(n)) != 1)
        throw Error("rng failure");
    return out;
}

Nonce random_nonce() {
    Nonce out{};
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) throw Error("rng failure");
    return out;
}

AeadKey random_key() {
    AeadKey out{};
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) throw Error("rng failure");
    return out;
}

} // namespace secureml::crypto
