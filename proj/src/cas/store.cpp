#include "secureml/cas/store.hpp"

#include <ctime>

#include "secureml/cas/errors.hpp"
#include "secureml/common/codec.hpp"
#include "secureml/common/fileio.hpp"
#include "secureml/common/hex.hpp"
#include "secureml/crypto/aead.hpp"
#include "secureml/crypto/random.hpp"
#include "secureml/enclave/verify.hpp"

namespace secureml::cas {

namespace {

constexpr char kMagic[4] = {'S', 'M', 'C', 'S'};
constexpr std::uint8_t kVersion = 1;
constexpr std::int64_t kDaySeconds = 24 * 60 * 60;

Bytes store_aad() {
    BinaryWriter w;
    w.raw(BytesView(reinterpret_cast<const std::uint8_t*>(kMagic), sizeof(kMagic)));
    w.u8(kVersion);
    return std::move(w).take();
}

} // namespace

std::uint64_t unix_now() {
    return static_cast<std::uint64_t>(std::time(nullptr));
}

Store::Store(Store&& other) noexcept
    : root_cert_pem_(std::move(other.root_cert_pem_)),
      root_key_pem_(std::move(other.root_key_pem_)), sessions_(std::move(other.sessions_)),
      counters_(std::move(other.counters_)), audit_(std::move(other.audit_)),
      attached_path_(std::move(other.attached_path_)), attached_key_(other.attached_key_) {}

Store& Store::operator=(Store&& other) noexcept {
    if (this != &other) {
        root_cert_pem_ = std::move(other.root_cert_pem_);
        root_key_pem_ = std::move(other.root_key_pem_);
        sessions_ = std::move(other.sessions_);
        counters_ = std::move(other.counters_);
        audit_ = std::move(other.audit_);
        attached_path_ = std::move(other.attached_path_);
        attached_key_ = other.attached_key_;
    }
    return *this;
}

Store Store::create(const std::string& authority_name) {
    Store s;
    const crypto::CertAuthority ca = crypto::CertAuthority::generate(authority_name);
    s.root_cert_pem_ = ca.cert_pem();
    s.root_key_pem_ = ca.key_pem();
    return s;
}

void Store::attach(std::filesystem::path path, const enclave::SealingKey& key) {
    std::lock_guard lock(mu_);
    attached_path_ = std::move(path);
    attached_key_ = key;
    persist_locked();
}

SessionId Store::create_session(SessionPolicy policy, std::uint32_t cert_lifetime_days) {
    policy.validate();

    std::lock_guard lock(mu_);
    if (sessions_.count(policy.name)) throw DuplicateSession(policy.name);

    SessionRecord rec;
    rec.id = policy.id();
    rec.created_at = unix_now();

    const crypto::CertAuthority ca = crypto::CertAuthority::from_pem(root_cert_pem_, root_key_pem_);
    for (const auto& spec : policy.secrets) {
        Bytes value;
        if (spec.source == ValueSource::ProvidedByOperator) {
            value = spec.provided_value;
        } else {
            switch (spec.kind) {
            case SecretKind::SymmetricKey256:
            case SecretKind::OpaqueValue: {
                const Bytes k = crypto::random_bytes(32);
                value = k;
                break;
            }
            case SecretKind::TlsIdentity: {
                const crypto::IssuedCert leaf = ca.issue_leaf(
                    policy.name, 0, std::int64_t(cert_lifetime_days) * kDaySeconds);
                value = to_bytes(leaf.cert_pem + leaf.key_pem);
                break;
            }
            }
        }
        rec.secret_values[spec.name] = std::move(value);
    }

    const SessionId id = rec.id;
    // Audit details carry names and hashes only, never secret material.
    audit_.append(AuditEvent::SessionCreated,
                  "session=" + policy.name + " id=" + to_hex(id));
    rec.policy = std::move(policy);
    sessions_.emplace(rec.policy.name, std::move(rec));
    persist_locked();
    return id;
}

const SessionRecord& Store::session_locked(const SessionId& id) const {
    for (const auto& [name, rec] : sessions_)
        if (rec.id == id) return rec;
    throw UnknownSession();
}

SecretBundle Store::attest_and_provision(const SessionId& session, const enclave::Quote& quote,
                                         const crypto::Digest& channel_binding,
                                         const enclave::TrustRoot& devices) {
    std::lock_guard lock(mu_);
    const SessionRecord& rec = session_locked(session);

    const std::set<enclave::Measurement> allowed(rec.policy.allowed_measurements.begin(),
                                                 rec.policy.allowed_measurements.end());
    const enclave::VerificationResult v = enclave::verify_quote_local(quote, allowed, devices);
    if (!v.accepted) {
        audit_.append(AuditEvent::AttestRejected,
                      "session=" + rec.policy.name +
                          " reason=" + enclave::reject_reason_name(v.reason));
        persist_locked();
        throw AttestationRejected(v.reason);
    }

    // The quote must have been minted for this very TLS channel: its
    // report_data starts with the channel's exporter-derived binding value.
    if (!std::equal(channel_binding.begin(), channel_binding.end(),
                    quote.report_data.payload.begin())) {
        audit_.append(AuditEvent::AttestRejected,
                      "session=" + rec.policy.name + " reason=channel-binding-mismatch");
        persist_locked();
        throw ChannelBindingMismatch();
    }

    audit_.append(AuditEvent::AttestAccepted,
                  "session=" + rec.policy.name + " device=" + to_hex(quote.device_id));
    audit_.append(AuditEvent::SecretsIssued,
                  "session=" + rec.policy.name +
                      " count=" + std::to_string(rec.secret_values.size()));

    SecretBundle bundle;
    bundle.session = rec.policy.name;
    bundle.secrets = rec.secret_values;
    bundle.issued_at = unix_now();
    bundle.root_cert_pem = root_cert_pem_;
    persist_locked();
    return bundle;
}

CounterRecord Store::register_counter(const std::string& scope) {
    std::lock_guard lock(mu_);
    if (counters_.count(scope)) throw DuplicateScope(scope);
    CounterRecord rec;
    rec.scope = scope;
    rec.value = 0;
    rec.updated_at = unix_now();
    counters_.emplace(scope, rec);
    persist_locked();
    return rec;
}

std::uint64_t Store::advance_counter(const std::string& scope, std::uint64_t expected_current,
                                     const enclave::DeviceId& writer) {
    std::lock_guard lock(mu_);
    auto it = counters_.find(scope);
    if (it == counters_.end()) throw UnknownScope(scope);
    CounterRecord& rec = it->second;
    if (rec.value != expected_current) throw StaleCounter(rec.value);
    rec.value += 1;
    rec.last_writer = writer;
    rec.updated_at = unix_now();
    audit_.append(AuditEvent::CounterAdvanced,
                  "scope=" + scope + " value=" + std::to_string(rec.value) +
                      " writer=" + to_hex(writer));
    persist_locked();
    return rec.value;
}

std::uint64_t Store::read_counter(const std::string& scope) const {
    std::lock_guard lock(mu_);
    auto it = counters_.find(scope);
    if (it == counters_.end()) throw UnknownScope(scope);
    return it->second.value;
}

std::optional<SessionId> Store::find_session_by_name(const std::string& name) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(name);
    if (it == sessions_.end()) return std::nullopt;
    return it->second.id;
}

bool Store::has_session(const SessionId& id) const {
    std::lock_guard lock(mu_);
    for (const auto& [name, rec] : sessions_)
        if (rec.id == id) return true;
    return false;
}

std::vector<std::string> Store::session_names() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> names;
    for (const auto& [name, rec] : sessions_) names.push_back(name);
    return names;
}

std::string Store::root_cert_pem() const {
    std::lock_guard lock(mu_);
    return root_cert_pem_;
}

crypto::CertAuthority Store::authority() const {
    std::lock_guard lock(mu_);
    return crypto::CertAuthority::from_pem(root_cert_pem_, root_key_pem_);
}

std::vector<AuditLogEntry> Store::audit_entries() const {
    std::lock_guard lock(mu_);
    return audit_.entries();
}

bool Store::audit_chain_valid() const {
    std::lock_guard lock(mu_);
    return audit_.chain_valid();
}

Bytes Store::serialize() const {
    std::lock_guard lock(mu_);
    return serialize_locked();
}

Bytes Store::serialize_locked() const {
    BinaryWriter w;
    w.str(root_cert_pem_);
    w.str(root_key_pem_);

    w.u32(static_cast<std::uint32_t>(sessions_.size()));
    for (const auto& [name, rec] : sessions_) {
        const SessionPolicy& p = rec.policy;
        w.str(p.name);
        w.u32(static_cast<std::uint32_t>(p.allowed_measurements.size()));
        for (const auto& m : p.allowed_measurements)
            w.raw(BytesView(m.digest.data(), m.digest.size()));
        w.u32(static_cast<std::uint32_t>(p.secrets.size()));
        for (const auto& s : p.secrets) {
            w.str(s.name);
            w.u8(static_cast<std::uint8_t>(s.kind));
            w.u8(static_cast<std::uint8_t>(s.source));
            w.blob(s.provided_value);
        }
        w.u32(static_cast<std::uint32_t>(p.injections.size()));
        for (const auto& inj : p.injections) {
            w.str(inj.secret);
            w.u8(static_cast<std::uint8_t>(inj.target));
            w.str(inj.location);
        }
        w.u32(static_cast<std::uint32_t>(p.peers.size()));
        for (const auto& peer : p.peers) w.str(peer);

        w.raw(BytesView(rec.id.data(), rec.id.size()));
        w.u64(rec.created_at);
        w.u32(static_cast<std::uint32_t>(rec.secret_values.size()));
        for (const auto& [sname, value] : rec.secret_values) {
            w.str(sname);
            w.blob(value);
        }
    }

    w.u32(static_cast<std::uint32_t>(counters_.size()));
    for (const auto& [scope, rec] : counters_) {
        w.str(rec.scope);
        w.u64(rec.value);
        w.u8(rec.last_writer ? 1 : 0);
        if (rec.last_writer) w.raw(BytesView(rec.last_writer->data(), rec.last_writer->size()));
        w.u64(rec.updated_at);
    }

    const auto& entries = audit_.entries();
    w.u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
        w.u64(e.sequence);
        w.u8(static_cast<std::uint8_t>(e.event));
        w.str(e.detail);
        w.raw(BytesView(e.prev_hash.data(), e.prev_hash.size()));
        w.raw(BytesView(e.entry_hash.data(), e.entry_hash.size()));
    }
    return std::move(w).take();
}

Store Store::deserialize(BytesView raw) {
    Store s;
    try {
        BinaryReader r(raw);
        s.root_cert_pem_ = r.str();
        s.root_key_pem_ = r.str();

        const std::uint32_t n_sessions = r.u32();
        for (std::uint32_t i = 0; i < n_sessions; ++i) {
            SessionRecord rec;
            SessionPolicy& p = rec.policy;
            p.name = r.str();
            const std::uint32_t n_meas = r.u32();
            for (std::uint32_t j = 0; j < n_meas; ++j)
                p.allowed_measurements.push_back(enclave::Measurement{r.fixed<32>()});
            const std::uint32_t n_secrets = r.u32();
            for (std::uint32_t j = 0; j < n_secrets; ++j) {
                SecretSpec spec;
                spec.name = r.str();
                spec.kind = static_cast<SecretKind>(r.u8());
                spec.source = static_cast<ValueSource>(r.u8());
                spec.provided_value = r.blob();
                p.secrets.push_back(std::move(spec));
            }
            const std::uint32_t n_inject = r.u32();
            for (std::uint32_t j = 0; j < n_inject; ++j) {
                Injection inj;
                inj.secret = r.str();
                inj.target = static_cast<InjectTarget>(r.u8());
                inj.location = r.str();
                p.injections.push_back(std::move(inj));
            }
            const std::uint32_t n_peers = r.u32();
            for (std::uint32_t j = 0; j < n_peers; ++j) p.peers.push_back(r.str());

            rec.id = r.fixed<32>();
            rec.created_at = r.u64();
            const std::uint32_t n_values = r.u32();
            for (std::uint32_t j = 0; j < n_values; ++j) {
                std::string name = r.str();
                rec.secret_values[std::move(name)] = r.blob();
            }
            const std::string key = rec.policy.name;
            s.sessions_.emplace(key, std::move(rec));
        }

        const std::uint32_t n_counters = r.u32();
        for (std::uint32_t i = 0; i < n_counters; ++i) {
            CounterRecord rec;
            rec.scope = r.str();
            rec.value = r.u64();
            if (r.u8() != 0) rec.last_writer = r.fixed<enclave::kDeviceIdLen>();
            rec.updated_at = r.u64();
            const std::string key = rec.scope;
            s.counters_.emplace(key, std::move(rec));
        }

        const std::uint32_t n_audit = r.u32();
        std::vector<AuditLogEntry> entries;
        for (std::uint32_t i = 0; i < n_audit; ++i) {
            AuditLogEntry e;
            e.sequence = r.u64();
            e.event = static_cast<AuditEvent>(r.u8());
            e.detail = r.str();
            e.prev_hash = r.fixed<32>();
            e.entry_hash = r.fixed<32>();
            entries.push_back(std::move(e));
        }
        s.audit_.restore(std::move(entries));
        r.expect_done();
    } catch (const DecodeError& e) {
        throw StoreCorrupt(e.what());
    }

    if (!s.audit_.chain_valid()) throw AuditChainBroken();
    return s;
}

namespace {

void seal_to_file(const std::filesystem::path& path, const Bytes& plain,
                  const enclave::SealingKey& key) {
    const crypto::Nonce nonce = crypto::random_nonce();
    const crypto::Sealed sealed = crypto::aead_encrypt(key.key, nonce, plain, store_aad());

    BinaryWriter w;
    w.raw(BytesView(reinterpret_cast<const std::uint8_t*>(kMagic), sizeof(kMagic)));
    w.u8(kVersion);
    w.raw(BytesView(nonce.data(), nonce.size()));
    w.raw(BytesView(sealed.tag.data(), sealed.tag.size()));
    w.blob(sealed.ciphertext);
    write_file_atomic(path, std::move(w).take());
}

} // namespace

void Store::save(const std::filesystem::path& path, const enclave::SealingKey& key) const {
    seal_to_file(path, serialize(), key);
}

Store Store::load(const std::filesystem::path& path, const enclave::SealingKey& key) {
    const Bytes raw = read_file(path);

    Bytes ciphertext;
    crypto::Nonce nonce{};
    crypto::Tag tag{};
    try {
        BinaryReader r(raw);
        const auto magic = r.fixed<4>();
        if (!std::equal(magic.begin(), magic.end(),
                        reinterpret_cast<const std::uint8_t*>(kMagic)))
            throw StoreCorrupt("bad magic");
        if (r.u8() != kVersion) throw StoreCorrupt("unsupported version");
        nonce = r.fixed<crypto::kNonceLen>();
        tag = r.fixed<crypto::kTagLen>();
        ciphertext = r.blob();
        r.expect_done();
    } catch (const DecodeError& e) {
        throw StoreCorrupt(e.what());
    }

    Bytes plain;
    try {
        plain = crypto::aead_decrypt(key.key, nonce, ciphertext, tag, store_aad());
    } catch (const crypto::AeadTagMismatch&) {
        throw StoreCorrupt("authentication failed");
    }
    return deserialize(plain);
}

void Store::persist_locked() const {
    if (!attached_path_) return;
    seal_to_file(*attached_path_, serialize_locked(), attached_key_);
}

} // namespace secureml::cas
