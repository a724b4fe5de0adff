#include "secureml/crypto/aead.hpp"

#include <openssl/evp.h>

#include <memory>

namespace secureml::crypto {

namespace {

using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

CipherCtx make_ctx(const AeadKey& key, const Nonce& nonce, bool encrypt) {
    CipherCtx ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
    if (!ctx) throw Error("aead: ctx alloc failed");
    auto init = encrypt ? EVP_EncryptInit_ex : EVP_DecryptInit_ex;
    if (init(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
        EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceLen, nullptr) != 1 ||
        init(ctx.get(), nullptr, nullptr, key.data(), nonce.data()) != 1)
        throw Error("aead: init failed");
    return ctx;
}

void feed_aad(EVP_CIPHER_CTX* ctx, BytesView aad, bool encrypt) {
    if (aad.empty()) return;
    int outl = 0;
    auto update = encrypt ? EVP_EncryptUpdate : EVP_DecryptUpdate;
    if (update(ctx, nullptr, &outl, aad.data(), static_cast<int>(aad.size())) != 1)
        throw Error("aead: aad failed");
}

} // namespace

Sealed aead_encrypt(const AeadKey& key, const Nonce& nonce, BytesView plaintext, BytesView aad) {
    auto ctx = make_ctx(key, nonce, true);
    feed_aad(ctx.get(), aad, true);

    Sealed out;
    out.ciphertext.resize(plaintext.size());
    int outl = 0;
    if (!plaintext.empty() &&
        EVP_EncryptUpdate(ctx.get(), out.ciphertext.data(), &outl, plaintext.data(),
                          static_cast<int>(plaintext.size())) != 1)
        throw Error("aead: encrypt failed");
    int finl = 0;
    if (EVP_EncryptFinal_ex(ctx.get(), out.ciphertext.data() + outl, &finl) != 1)
        throw Error("aead: encrypt final failed");
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagLen, out.tag.data()) != 1)
        throw Error("aead: tag export failed");
    return out;
}

Bytes aead_decrypt(const AeadKey& key, const Nonce& nonce, BytesView ciphertext, const Tag& tag,
                   BytesView aad) {
    auto ctx = make_ctx(key, nonce, false);
    feed_aad(ctx.get(), aad, false);

    Bytes out(ciphertext.size());
    int outl = 0;
    if (!ciphertext.empty() &&
        EVP_DecryptUpdate(ctx.get(), out.data(), &outl, ciphertext.data(),
                          static_cast<int>(ciphertext.size())) != 1)
        throw AeadTagMismatch();
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagLen,
                            const_cast<std::uint8_t*>(tag.data())) != 1)
        throw Error("aead: tag import failed");
    int finl = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + outl, &finl) != 1) throw AeadTagMismatch();
    return out;
}

Tag aead_mac(const AeadKey& key, const Nonce& nonce, BytesView data, BytesView aad) {
    auto ctx = make_ctx(key, nonce, true);
    feed_aad(ctx.get(), aad, true);
    feed_aad(ctx.get(), data, true);
    Bytes empty;
    int finl = 0;
    std::uint8_t sink[16];
    if (EVP_EncryptFinal_ex(ctx.get(), sink, &finl) != 1) throw Error("aead: mac failed");
    Tag tag{};
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagLen, tag.data()) != 1)
        throw Error("aead: tag export failed");
    return tag;
}

bool aead_mac_verify(const AeadKey& key, const Nonce& nonce, BytesView data, const Tag& tag,
                     BytesView aad) {
    auto ctx = make_ctx(key, nonce, false);
    feed_aad(ctx.get(), aad, false);
    feed_aad(ctx.get(), data, false);
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagLen,
                            const_cast<std::uint8_t*>(tag.data())) != 1)
        return false;
    int finl = 0;
    std::uint8_t sink[16];
    return EVP_DecryptFinal_ex(ctx.get(), sink, &finl) == 1;
}

AeadKey aead_key_from(BytesView data) {
    if (data.size() != kAeadKeyLen) throw Error("aead: key must be 32 bytes");
    AeadKey key{};
    std::copy(data.begin(), data.end(), key.begin());
    return key;
}

} // namespace secureml::crypto
