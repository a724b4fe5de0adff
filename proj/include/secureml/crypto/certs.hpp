#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "secureml/common/bytes.hpp"
#include "secureml/crypto/ed25519.hpp"
#include "secureml/crypto/sha256.hpp"

using X509 = struct x509_st;

namespace secureml::crypto {

// Private OID carrying the holder's measurement digest in issued leaves.
inline constexpr const char* kMeasurementOid = "1.3.6.1.4.1.56627.1.1";

struct IssuedCert {
    std::string cert_pem;
    std::string key_pem; // empty when the subject key was supplied by the caller
};

// Certificate authority backed by an Ed25519 key. CAS generates one at first
// start and keeps it in the sealed store; leaves for sessions are signed here,
// in-service, so no private key ever exists outside the store.
class CertAuthority {
public:
    static CertAuthority generate(const std::string& common_name);
    static CertAuthority from_pem(const std::string& cert_pem, const std::string& key_pem);

    const std::string& cert_pem() const { return cert_pem_; }
    const std::string& key_pem() const { return key_pem_; }

    // Issues a leaf with a fresh Ed25519 keypair. Validity is given as offsets
    // from now in seconds (not_before may be negative; an already-expired
    // window is allowed for tests).
    IssuedCert issue_leaf(const std::string& common_name, std::int64_t not_before_s,
                          std::int64_t not_after_s,
                          const std::optional<Digest>& measurement = std::nullopt) const;

private:
    CertAuthority() = default;
    std::string cert_pem_;
    std::string key_pem_;
};

std::string self_signed_cert(const Ed25519Key& key, const std::string& common_name,
                             std::int64_t not_after_s);

// Inspection helpers used by the peer-policy checks.
std::string cert_common_name(const std::string& cert_pem);
std::optional<Digest> cert_measurement(const std::string& cert_pem);
std::string x509_common_name(X509* cert);
std::optional<Digest> x509_measurement(X509* cert);
bool verify_chain(const std::string& leaf_pem, const std::string& root_pem);

} // namespace secureml::crypto
