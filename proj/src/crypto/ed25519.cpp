#include "secureml/crypto/ed25519.hpp"

#include <openssl/bio.h>
#include <openssl/evp.h>
#include <openssl/pem.h>

#include "secureml/common/error.hpp"

namespace secureml::crypto {

namespace {
using PkeyCtx = std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)>;
using MdCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;
} // namespace

Ed25519Key::Ed25519Key(EVP_PKEY* pkey, bool has_private)
    : pkey_(pkey, EVP_PKEY_free), has_private_(has_private) {
    if (!pkey_) throw Error("ed25519: null key");
}

Ed25519Key Ed25519Key::generate() {
    PkeyCtx ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_ED25519, nullptr), EVP_PKEY_CTX_free);
    EVP_PKEY* pkey = nullptr;
    if (!ctx || EVP_PKEY_keygen_init(ctx.get()) != 1 || EVP_PKEY_keygen(ctx.get(), &pkey) != 1)
        throw Error("ed25519 keygen failed");
    return Ed25519Key(pkey, true);
}

Ed25519Key Ed25519Key::from_private_raw(BytesView seed) {
    if (seed.size() != kEd25519KeyLen) throw Error("ed25519: bad private key length");
    EVP_PKEY* pkey =
        EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size());
    return Ed25519Key(pkey, true);
}

Ed25519Key Ed25519Key::from_public_raw(BytesView pub) {
    if (pub.size() != kEd25519KeyLen) throw Error("ed25519: bad public key length");
    EVP_PKEY* pkey =
        EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pub.data(), pub.size());
    return Ed25519Key(pkey, false);
}

Ed25519Key Ed25519Key::from_private_pem(const std::string& pem) {
    std::unique_ptr<BIO, decltype(&BIO_free)> bio(
        BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())), BIO_free);
    EVP_PKEY* pkey = PEM_read_bio_PrivateKey(bio.get(), nullptr, nullptr, nullptr);
    if (pkey == nullptr) throw Error("ed25519: PEM parse failed");
    return Ed25519Key(pkey, true);
}

Bytes Ed25519Key::public_raw() const {
    std::size_t len = kEd25519KeyLen;
    Bytes out(len);
    if (EVP_PKEY_get_raw_public_key(pkey_.get(), out.data(), &len) != 1 || len != kEd25519KeyLen)
        throw Error("ed25519: public key export failed");
    return out;
}

Bytes Ed25519Key::private_raw() const {
    if (!has_private_) throw Error("ed25519: no private key");
    std::size_t len = kEd25519KeyLen;
    Bytes out(len);
    if (EVP_PKEY_get_raw_private_key(pkey_.get(), out.data(), &len) != 1 || len != kEd25519KeyLen)
        throw Error("ed25519: private key export failed");
    return out;
}

std::string Ed25519Key::private_pem() const {
    if (!has_private_) throw Error("ed25519: no private key");
    std::unique_ptr<BIO, decltype(&BIO_free)> bio(BIO_new(BIO_s_mem()), BIO_free);
    if (!bio ||
        PEM_write_bio_PrivateKey(bio.get(), pkey_.get(), nullptr, nullptr, 0, nullptr, nullptr) !=
            1)
        throw Error("ed25519: PEM write failed");
    char* data = nullptr;
    long n = BIO_get_mem_data(bio.get(), &data);
    return std::string(data, static_cast<std::size_t>(n));
}

Bytes Ed25519Key::sign(BytesView msg) const {
    if (!has_private_) throw Error("ed25519: no private key");
    MdCtx ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, pkey_.get()) != 1)
        throw Error("ed25519 sign init failed");
    std::size_t len = kEd25519SigLen;
    Bytes sig(len);
    if (EVP_DigestSign(ctx.get(), sig.data(), &len, msg.data(), msg.size()) != 1 ||
        len != kEd25519SigLen)
        throw Error("ed25519 sign failed");
    return sig;
}

bool Ed25519Key::verify(BytesView msg, BytesView sig) const {
    if (sig.size() != kEd25519SigLen) return false;
    MdCtx ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, pkey_.get()) != 1)
        throw Error("ed25519 verify init failed");
    return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), msg.data(), msg.size()) == 1;
}

} // namespace secureml::crypto
