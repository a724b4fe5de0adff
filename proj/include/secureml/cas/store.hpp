#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "secureml/cas/audit.hpp"
#include "secureml/cas/policy.hpp"
#include "secureml/crypto/certs.hpp"
#include "secureml/enclave/quote.hpp"
#include "secureml/enclave/sealing.hpp"
#include "secureml/enclave/trust_root.hpp"

namespace secureml::cas {

struct CounterRecord {
    std::string scope;
    std::uint64_t value = 0;
    std::optional<enclave::DeviceId> last_writer;
    std::uint64_t updated_at = 0;
};

struct SessionRecord {
    SessionPolicy policy;
    SessionId id{};
    std::map<std::string, Bytes> secret_values; // materialized at creation
    std::uint64_t created_at = 0;
};

// The service's entire state: root CA, sessions with their materialized
// secrets, freshness counters and the audit chain. One logical writer — every
// mutating call holds the store mutex, so compare-and-advance is atomic with
// respect to concurrent callers. When attached to a file, each mutation is
// sealed and persisted (write-temp + rename) before it returns.
//
// Sealed file layout: "SMCS" magic, u8 version, 12-byte nonce, 16-byte tag,
// u32-prefixed ciphertext of the canonical store encoding; the magic and
// version are bound as AAD. The key is derive_sealing_key(device_secret,
// own measurement, "cas-store").
class Store {
public:
    static constexpr const char* kSealingLabel = "cas-store";
    static constexpr std::uint32_t kDefaultCertLifetimeDays = 90;

    // Movable (fresh mutex in the destination) so factories can return by
    // value; not copyable.
    Store(Store&& other) noexcept;
    Store& operator=(Store&& other) noexcept;
    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    // Fresh store: generates the root CA (CN = authority_name) immediately.
    static Store create(const std::string& authority_name);

    static Store load(const std::filesystem::path& path, const enclave::SealingKey& key);
    void save(const std::filesystem::path& path, const enclave::SealingKey& key) const;

    // Persist to this file after every mutation from now on.
    void attach(std::filesystem::path path, const enclave::SealingKey& key);

    SessionId create_session(SessionPolicy policy,
                             std::uint32_t cert_lifetime_days = kDefaultCertLifetimeDays);

    SecretBundle attest_and_provision(const SessionId& session, const enclave::Quote& quote,
                                      const crypto::Digest& channel_binding,
                                      const enclave::TrustRoot& devices);

    CounterRecord register_counter(const std::string& scope);
    std::uint64_t advance_counter(const std::string& scope, std::uint64_t expected_current,
                                  const enclave::DeviceId& writer);
    std::uint64_t read_counter(const std::string& scope) const;

    std::optional<SessionId> find_session_by_name(const std::string& name) const;
    bool has_session(const SessionId& id) const;
    std::vector<std::string> session_names() const;

    std::string root_cert_pem() const;
    crypto::CertAuthority authority() const;

    std::vector<AuditLogEntry> audit_entries() const;
    bool audit_chain_valid() const;

    // Canonical plaintext encoding (what gets sealed). Exposed for the store
    // round-trip and corruption tests.
    Bytes serialize() const;
    static Store deserialize(BytesView raw);

private:
    Store() = default;
    Bytes serialize_locked() const;
    void persist_locked() const;
    const SessionRecord& session_locked(const SessionId& id) const;

    mutable std::mutex mu_;
    std::string root_cert_pem_;
    std::string root_key_pem_;
    std::map<std::string, SessionRecord> sessions_; // keyed by session name
    std::map<std::string, CounterRecord> counters_;
    AuditLog audit_;

    std::optional<std::filesystem::path> attached_path_;
    enclave::SealingKey attached_key_{};
};

std::uint64_t unix_now();

} // namespace secureml::cas
