#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "secureml/common/bytes.hpp"
#include "secureml/crypto/sha256.hpp"
#include "secureml/enclave/measurement.hpp"

namespace secureml::cas {

enum class SecretKind : std::uint8_t {
    SymmetricKey256 = 0,
    TlsIdentity = 1,
    OpaqueValue = 2,
};

enum class ValueSource : std::uint8_t {
    ProvidedByOperator = 0,
    GeneratedByCas = 1,
};

enum class InjectTarget : std::uint8_t {
    EnvVar = 0,
    VirtualFile = 1,
};

const char* secret_kind_name(SecretKind k);
const char* value_source_name(ValueSource s);
const char* inject_target_name(InjectTarget t);

struct SecretSpec {
    std::string name;
    SecretKind kind = SecretKind::SymmetricKey256;
    ValueSource source = ValueSource::GeneratedByCas;
    // Material for provided-by-operator secrets, supplied with the policy
    // file. Not part of the canonical encoding: the session id identifies the
    // policy, never the secret bytes.
    Bytes provided_value;
};

struct Injection {
    std::string secret;
    InjectTarget target = InjectTarget::EnvVar;
    std::string location; // env var name or virtual file path
};

using SessionId = crypto::Digest;

struct SessionPolicy {
    std::string name;
    std::vector<enclave::Measurement> allowed_measurements;
    std::vector<SecretSpec> secrets;
    std::vector<Injection> injections;
    std::vector<std::string> peers; // session names this session's workers may dial

    // Throws InvalidPolicy if any type invariant is violated.
    void validate() const;

    // Deterministic byte encoding, the preimage of the session id:
    //   str name
    //   u32 measurement count, then each 32-byte digest in ascending byte order
    //   u32 secret count, then per secret: str name, u8 kind, u8 source
    //   u32 injection count, then per injection: str secret, u8 target, str location
    //   u32 peer count, then each as str
    // (str = u16 big-endian length prefix; u32 big-endian.) Provided secret
    // values are deliberately excluded.
    Bytes canonical_encoding() const;
    SessionId id() const;

    static SessionPolicy from_json(const std::string& json);
    static SessionPolicy load_file(const std::string& path);
};

struct SecretBundle {
    std::string session;
    std::map<std::string, Bytes> secrets; // exactly the policy's declared secrets
    std::uint64_t issued_at = 0;
    // The service's root certificate rides outside the secrets map: it is not
    // a declared secret (and not secret at all), but every worker needs it to
    // authenticate peers whose leaves the service signed.
    std::string root_cert_pem;
};

} // namespace secureml::cas
