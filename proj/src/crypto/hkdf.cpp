#include "secureml/crypto/hkdf.hpp"

#include <openssl/evp.h>
#include <openssl/kdf.h>

#include <memory>

#include "secureml/common/error.hpp"

namespace secureml::crypto {

Bytes hkdf_sha256(BytesView ikm, BytesView salt, std::string_view info, std::size_t out_len) {
    std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)> ctx(
        EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr), EVP_PKEY_CTX_free);
    if (!ctx) throw Error("hkdf ctx alloc failed");

    if (EVP_PKEY_derive_init(ctx.get()) != 1 ||
        EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) != 1 ||
        EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), salt.data(), static_cast<int>(salt.size())) != 1 ||
        EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), static_cast<int>(ikm.size())) != 1 ||
        EVP_PKEY_CTX_add1_hkdf_info(ctx.get(),
                                    reinterpret_cast<const unsigned char*>(info.data()),
                                    static_cast<int>(info.size())) != 1)
        throw Error("hkdf setup failed");

    Bytes out(out_len);
    std::size_t len = out_len;
    if (EVP_PKEY_derive(ctx.get(), out.data(), &len) != 1 || len != out_len)
        throw Error("hkdf derive failed");
    return out;
}

} // namespace secureml::crypto
