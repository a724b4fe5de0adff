#include "secureml/crypto/sha256.hpp"

#include <openssl/evp.h>

#include "secureml/common/error.hpp"

namespace secureml::crypto {

Digest sha256(BytesView data) {
    Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != kDigestLen)
        throw Error("sha256 failed");
    return out;
}

Sha256::Sha256() {
    auto* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 init failed");
    ctx_ = ctx;
}

Sha256::~Sha256() {
    EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
}

void Sha256::update(BytesView data) {
    if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size()) != 1)
        throw Error("sha256 update failed");
}

Digest Sha256::finish() {
    Digest out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), out.data(), &len) != 1 ||
        len != kDigestLen)
        throw Error("sha256 final failed");
    return out;
}

} // namespace secureml::crypto
