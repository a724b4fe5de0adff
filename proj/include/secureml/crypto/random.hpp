#pragma once

#include "secureml/common/bytes.hpp"
#include "secureml/crypto/aead.hpp"

namespace secureml::crypto {

Bytes random_bytes(std::size_t n);
Nonce random_nonce();
AeadKey random_key();

} // namespace secureml::crypto
