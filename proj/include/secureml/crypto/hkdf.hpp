#pragma once

#include <string_view>

#include "secureml/common/bytes.hpp"

namespace secureml::crypto {

// HKDF-SHA-256 (extract + expand), RFC 5869.
Bytes hkdf_sha256(BytesView ikm, BytesView salt, std::string_view info, std::size_t out_len);

} // namespace secureml::crypto
