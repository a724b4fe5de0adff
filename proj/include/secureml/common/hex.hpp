#pragma once

#include <string>
#include <string_view>

#include "secureml/common/bytes.hpp"

namespace secureml {

std::string to_hex(BytesView data);

// Throws DecodeError on odd length or non-hex characters.
Bytes from_hex(std::string_view hex);

} // namespace secureml
