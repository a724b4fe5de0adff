#include "secureml/crypto/certs.hpp"

#include <openssl/bio.h>
#include <openssl/obj_mac.h>
#include <openssl/objects.h>
#include <openssl/pem.h>
#include <openssl/x509.h>
#include <openssl/x509v3.h>

#include <memory>
#include <mutex>

#include "secureml/common/error.hpp"
#include "secureml/crypto/random.hpp"

namespace secureml::crypto {

namespace {

using X509Ptr = std::unique_ptr<X509, decltype(&X509_free)>;
using BioPtr = std::unique_ptr<BIO, decltype(&BIO_free)>;

int measurement_nid() {
    static std::once_flag once;
    static int nid = NID_undef;
    std::call_once(once, [] {
        nid = OBJ_create(kMeasurementOid, "semlMeasurement", "enclave measurement digest");
    });
    if (nid == NID_undef) throw Error("x509: OID registration failed");
    return nid;
}

X509Ptr parse_cert(const std::string& pem) {
    BioPtr bio(BIO_new_mem_buf(pem.data(), static_cast<int>(pem.size())), BIO_free);
    X509Ptr cert(PEM_read_bio_X509(bio.get(), nullptr, nullptr, nullptr), X509_free);
    if (!cert) throw Error("x509: PEM parse failed");
    return cert;
}

std::string cert_to_pem(X509* cert) {
    BioPtr bio(BIO_new(BIO_s_mem()), BIO_free);
    if (!bio || PEM_write_bio_X509(bio.get(), cert) != 1) throw Error("x509: PEM write failed");
    char* data = nullptr;
    long n = BIO_get_mem_data(bio.get(), &data);
    return std::string(data, static_cast<std::size_t>(n));
}

void set_name(X509_NAME* name, const std::string& cn) {
    if (X509_NAME_add_entry_by_txt(name, "CN", MBSTRING_ASC,
                                   reinterpret_cast<const unsigned char*>(cn.c_str()), -1, -1,
                                   0) != 1)
        throw Error("x509: name set failed");
}

void set_random_serial(X509* cert) {
    Bytes serial = random_bytes(16);
    serial[0] &= 0x7f; // keep it positive
    std::unique_ptr<BIGNUM, decltype(&BN_free)> bn(
        BN_bin2bn(serial.data(), static_cast<int>(serial.size()), nullptr), BN_free);
    ASN1_INTEGER* asn1 = X509_get_serialNumber(cert);
    if (!bn || BN_to_ASN1_INTEGER(bn.get(), asn1) == nullptr)
        throw Error("x509: serial set failed");
}

void add_extension(X509* cert, X509* issuer, int nid, const char* value) {
    X509V3_CTX ctx;
    X509V3_set_ctx_nodb(&ctx);
    X509V3_set_ctx(&ctx, issuer, cert, nullptr, nullptr, 0);
    X509_EXTENSION* ext = X509V3_EXT_conf_nid(nullptr, &ctx, nid, value);
    if (ext == nullptr) throw Error("x509: extension failed");
    X509_add_ext(cert, ext, -1);
    X509_EXTENSION_free(ext);
}

void add_measurement_extension(X509* cert, const Digest& digest) {
    std::unique_ptr<ASN1_OCTET_STRING, decltype(&ASN1_OCTET_STRING_free)> os(
        ASN1_OCTET_STRING_new(), ASN1_OCTET_STRING_free);
    if (!os ||
        ASN1_OCTET_STRING_set(os.get(), digest.data(), static_cast<int>(digest.size())) != 1)
        throw Error("x509: measurement octets failed");
    X509_EXTENSION* ext =
        X509_EXTENSION_create_by_NID(nullptr, measurement_nid(), 0, os.get());
    if (ext == nullptr) throw Error("x509: measurement extension failed");
    X509_add_ext(cert, ext, -1);
    X509_EXTENSION_free(ext);
}

X509Ptr build_cert(const std::string& subject_cn, const std::string& issuer_cn,
                   EVP_PKEY* subject_key, std::int64_t not_before_s, std::int64_t not_after_s) {
    X509Ptr cert(X509_new(), X509_free);
    if (!cert) throw Error("x509: alloc failed");
    X509_set_version(cert.get(), 2);
    set_random_serial(cert.get());
    X509_gmtime_adj(X509_getm_notBefore(cert.get()), static_cast<long>(not_before_s));
    X509_gmtime_adj(X509_getm_notAfter(cert.get()), static_cast<long>(not_after_s));
    set_name(X509_get_subject_name(cert.get()), subject_cn);
    set_name(X509_get_issuer_name(cert.get()), issuer_cn);
    if (X509_set_pubkey(cert.get(), subject_key) != 1) throw Error("x509: pubkey set failed");
    return cert;
}

void sign_cert(X509* cert, EVP_PKEY* issuer_key) {
    // Ed25519 signs without a separate digest
    if (X509_sign(cert, issuer_key, nullptr) == 0) throw Error("x509: sign failed");
}

} // namespace

CertAuthority CertAuthority::generate(const std::string& common_name) {
    auto key = Ed25519Key::generate();
    CertAuthority ca;
    ca.key_pem_ = key.private_pem();
    auto cert = build_cert(common_name, common_name, key.handle(), -60, 10 * 365 * 86400L);
    add_extension(cert.get(), cert.get(), NID_basic_constraints, "critical,CA:TRUE");
    add_extension(cert.get(), cert.get(), NID_subject_key_identifier, "hash");
    sign_cert(cert.get(), key.handle());
    ca.cert_pem_ = cert_to_pem(cert.get());
    return ca;
}

CertAuthority CertAuthority::from_pem(const std::string& cert_pem, const std::string& key_pem) {
    CertAuthority ca;
    ca.cert_pem_ = cert_pem;
    ca.key_pem_ = key_pem;
    parse_cert(cert_pem);
    Ed25519Key::from_private_pem(key_pem);
    return ca;
}

IssuedCert CertAuthority::issue_leaf(const std::string& common_name, std::int64_t not_before_s,
                                     std::int64_t not_after_s,
                                     const std::optional<Digest>& measurement) const {
    auto issuer_cert = parse_cert(cert_pem_);
    auto issuer_key = Ed25519Key::from_private_pem(key_pem_);
    auto leaf_key = Ed25519Key::generate();

    std::string issuer_cn = x509_common_name(issuer_cert.get());
    auto cert =
        build_cert(common_name, issuer_cn, leaf_key.handle(), not_before_s, not_after_s);
    add_extension(cert.get(), issuer_cert.get(), NID_basic_constraints, "critical,CA:FALSE");
    if (measurement) add_measurement_extension(cert.get(), *measurement);
    sign_cert(cert.get(), issuer_key.handle());

    IssuedCert out;
    out.cert_pem = cert_to_pem(cert.get());
    out.key_pem = leaf_key.private_pem();
    return out;
}

std::string self_signed_cert(const Ed25519Key& key, const std::string& common_name,
                             std::int64_t not_after_s) {
    auto cert = build_cert(common_name, common_name, key.handle(), -60, not_after_s);
    sign_cert(cert.get(), key.handle());
    return cert_to_pem(cert.get());
}

std::string x509_common_name(X509* cert) {
    X509_NAME* name = X509_get_subject_name(cert);
    char buf[256] = {0};
    int n = X509_NAME_get_text_by_NID(name, NID_commonName, buf, sizeof(buf) - 1);
    if (n < 0) throw Error("x509: no common name");
    return std::string(buf, static_cast<std::size_t>(n));
}

std::optional<Digest> x509_measurement(X509* cert) {
    int idx = X509_get_ext_by_NID(cert, measurement_nid(), -1);
    if (idx < 0) return std::nullopt;
    X509_EXTENSION* ext = X509_get_ext(cert, idx);
    ASN1_OCTET_STRING* os = X509_EXTENSION_get_data(ext);
    if (os == nullptr || ASN1_STRING_length(os) != static_cast<int>(kDigestLen))
        throw Error("x509: malformed measurement extension");
    Digest d{};
    std::copy_n(ASN1_STRING_get0_data(os), kDigestLen, d.begin());
    return d;
}

std::string cert_common_name(const std::string& cert_pem) {
    return x509_common_name(parse_cert(cert_pem).get());
}

std::optional<Digest> cert_measurement(const std::string& cert_pem) {
    return x509_measurement(parse_cert(cert_pem).get());
}

bool verify_chain(const std::string& leaf_pem, const std::string& root_pem) {
    auto leaf = parse_cert(leaf_pem);
    auto root = parse_cert(root_pem);
    std::unique_ptr<X509_STORE, decltype(&X509_STORE_free)> store(X509_STORE_new(),
                                                                  X509_STORE_free);
    std::unique_ptr<X509_STORE_CTX, decltype(&X509_STORE_CTX_free)> ctx(X509_STORE_CTX_new(),
                                                                        X509_STORE_CTX_free);
    if (!store || !ctx || X509_STORE_add_cert(store.get(), root.get()) != 1 ||
        X509_STORE_CTX_init(ctx.get(), store.get(), leaf.get(), nullptr) != 1)
        throw Error("x509: verify setup failed");
    return X509_verify_cert(ctx.get()) == 1;
}

} // namespace secureml::crypto
