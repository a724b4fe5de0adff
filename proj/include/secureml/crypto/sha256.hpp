#pragma once

#include <array>

#include "secureml/common/bytes.hpp"

namespace secureml::crypto {

inline constexpr std::size_t kDigestLen = 32;
using Digest = std::array<std::uint8_t, kDigestLen>;

Digest sha256(BytesView data);

// Incremental variant for hash chains.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(BytesView data);
    Digest finish();

private:
    void* ctx_;
};

} // namespace secureml::crypto
