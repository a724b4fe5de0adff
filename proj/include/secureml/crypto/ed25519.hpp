#pragma once

#include <memory>
#include <string>

#include "secureml/common/bytes.hpp"

using EVP_PKEY = struct evp_pkey_st;

namespace secureml::crypto {

inline constexpr std::size_t kEd25519KeyLen = 32;
inline constexpr std::size_t kEd25519SigLen = 64;

// Ed25519 keypair. Signatures are deterministic, which keeps canonical quote
// encodings byte-stable.
class Ed25519Key {
public:
    static Ed25519Key generate();
    static Ed25519Key from_private_raw(BytesView seed);
    static Ed25519Key from_public_raw(BytesView pub);
    static Ed25519Key from_private_pem(const std::string& pem);

    Bytes public_raw() const;
    Bytes private_raw() const; // throws if public-only
    std::string private_pem() const;
    bool has_private() const { return has_private_; }

    Bytes sign(BytesView msg) const;
    bool verify(BytesView msg, BytesView sig) const;

    EVP_PKEY* handle() const { return pkey_.get(); }

private:
    Ed25519Key(EVP_PKEY* pkey, bool has_private);
    std::shared_ptr<EVP_PKEY> pkey_;
    bool has_private_;
};

} // namespace secureml::crypto
