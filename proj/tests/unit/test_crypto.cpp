#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "secureml/common/codec.hpp"
#include "secureml/common/hex.hpp"
#include "secureml/crypto/aead.hpp"
#include "secureml/crypto/ed25519.hpp"
#include "secureml/crypto/hkdf.hpp"
#include "secureml/crypto/random.hpp"
#include "secureml/crypto/sha256.hpp"
#include "support/ref_sha256.hpp"
#include "support/test_util.hpp"

using namespace secureml;

TEST_CASE("sha256 agrees with independent reference") {
    std::mt19937_64 rng(42);
    for (std::size_t len : {0u, 1u, 55u, 56u, 64u, 65u, 1000u, 100000u}) {
        Bytes data = testutil::random_bytes(rng, len);
        auto ours = crypto::sha256(data);
        auto ref = refcrypto::sha256(data);
        CHECK(std::equal(ours.begin(), ours.end(), ref.begin()));
    }
}

TEST_CASE("hkdf agrees with independent reference") {
    Bytes ikm(32);
    for (int i = 0; i < 32; ++i) ikm[i] = static_cast<std::uint8_t>(i);
    Bytes salt = to_bytes("salt-value");
    for (std::size_t out_len : {16u, 32u, 64u, 100u}) {
        Bytes ours = crypto::hkdf_sha256(ikm, salt, "context-info", out_len);
        Bytes ref = refcrypto::hkdf_sha256(ikm, salt, "context-info", out_len);
        CHECK(ours == ref);
    }
}

TEST_CASE("aead round trip and frozen vector") {
    crypto::AeadKey key{};
    crypto::Nonce nonce{};
    for (int i = 0; i < 32; ++i) key[i] = static_cast<std::uint8_t>(i);
    for (int i = 0; i < 12; ++i) nonce[i] = static_cast<std::uint8_t>(i);
    Bytes aad = to_bytes("chunk-aad");
    Bytes pt = to_bytes("hello shield");

    auto sealed = crypto::aead_encrypt(key, nonce, pt, aad);
    // vector computed with an independent AES-GCM implementation
    Bytes expect = from_hex("2f67ba77aac5b173e424fbefaab334581a58ba03502e9a7339f8d29d");
    Bytes got = sealed.ciphertext;
    got.insert(got.end(), sealed.tag.begin(), sealed.tag.end());
    CHECK(got == expect);

    CHECK(crypto::aead_decrypt(key, nonce, sealed.ciphertext, sealed.tag, aad) == pt);
    CHECK_THROWS_AS(crypto::aead_decrypt(key, nonce, sealed.ciphertext, sealed.tag,
                                         to_bytes("other-aad")),
                    crypto::AeadTagMismatch);

    auto bad = sealed.ciphertext;
    bad[0] ^= 1;
    CHECK_THROWS_AS(crypto::aead_decrypt(key, nonce, bad, sealed.tag, aad),
                    crypto::AeadTagMismatch);
}

TEST_CASE("aead empty plaintext") {
    auto key = crypto::random_key();
    auto nonce = crypto::random_nonce();
    auto sealed = crypto::aead_encrypt(key, nonce, {}, to_bytes("ad"));
    CHECK(sealed.ciphertext.empty());
    CHECK(crypto::aead_decrypt(key, nonce, {}, sealed.tag, to_bytes("ad")).empty());
}

TEST_CASE("aead mac mode authenticates without encrypting") {
    auto key = crypto::random_key();
    auto nonce = crypto::random_nonce();
    Bytes data = to_bytes("plaintext stays readable");
    Bytes aad = to_bytes("position");
    auto tag = crypto::aead_mac(key, nonce, data, aad);
    CHECK(crypto::aead_mac_verify(key, nonce, data, tag, aad));

    Bytes tampered = data;
    tampered[3] ^= 0x40;
    CHECK_FALSE(crypto::aead_mac_verify(key, nonce, tampered, tag, aad));
    CHECK_FALSE(crypto::aead_mac_verify(key, nonce, data, tag, to_bytes("elsewhere")));
}

TEST_CASE("ed25519 sign/verify and determinism") {
    auto key = crypto::Ed25519Key::generate();
    Bytes msg = to_bytes("attestation evidence");
    auto sig1 = key.sign(msg);
    auto sig2 = key.sign(msg);
    CHECK(sig1 == sig2);
    CHECK(key.verify(msg, sig1));

    auto pub = crypto::Ed25519Key::from_public_raw(key.public_raw());
    CHECK(pub.verify(msg, sig1));
    Bytes bad = sig1;
    bad[17] ^= 0x01;
    CHECK_FALSE(pub.verify(msg, bad));

    auto restored = crypto::Ed25519Key::from_private_raw(key.private_raw());
    CHECK(restored.sign(msg) == sig1);

    auto from_pem = crypto::Ed25519Key::from_private_pem(key.private_pem());
    CHECK(from_pem.sign(msg) == sig1);
}

TEST_CASE("codec round trip and bounds") {
    BinaryWriter w;
    w.u8(0xab);
    w.u16(0x1234);
    w.u32(0xdeadbeef);
    w.u64(0x0102030405060708ull);
    w.str("hello");
    w.blob(to_bytes("payload"));

    BinaryReader r(w.bytes());
    CHECK(r.u8() == 0xab);
    CHECK(r.u16() == 0x1234);
    CHECK(r.u32() == 0xdeadbeef);
    CHECK(r.u64() == 0x0102030405060708ull);
    CHECK(r.str() == "hello");
    CHECK(r.blob() == to_bytes("payload"));
    CHECK(r.done());

    BinaryReader truncated(BytesView(w.bytes()).subspan(0, 3));
    truncated.u8();
    CHECK_THROWS_AS(truncated.u32(), DecodeError);

    // length prefix beyond remaining bytes must throw, not allocate
    BinaryWriter evil;
    evil.u32(0xffffffffu);
    BinaryReader er(evil.bytes());
    CHECK_THROWS_AS(er.blob(), DecodeError);
}

TEST_CASE("hex round trip") {
    std::mt19937_64 rng(7);
    Bytes data = testutil::random_bytes(rng, 33);
    CHECK(from_hex(to_hex(data)) == data);
    CHECK_THROWS_AS(from_hex("abc"), DecodeError);
    CHECK_THROWS_AS(from_hex("zz"), DecodeError);
}
