#include "secureml/cas/audit.hpp"

#include "secureml/common/codec.hpp"

namespace secureml::cas {

const char* audit_event_name(AuditEvent e) {
    switch (e) {
    case AuditEvent::SessionCreated: return "SessionCreated";
    case AuditEvent::AttestAccepted: return "AttestAccepted";
    case AuditEvent::AttestRejected: return "AttestRejected";
    case AuditEvent::SecretsIssued: return "SecretsIssued";
    case AuditEvent::CounterAdvanced: return "CounterAdvanced";
    }
    return "?";
}

crypto::Digest audit_chain_hash(const crypto::Digest& prev_hash, AuditEvent event,
                                const std::string& detail, std::uint64_t sequence) {
    BinaryWriter w;
    w.raw(BytesView(prev_hash.data(), prev_hash.size()));
    w.u8(static_cast<std::uint8_t>(event));
    w.str(detail);
    w.u64(sequence);
    return crypto::sha256(w.bytes());
}

const AuditLogEntry& AuditLog::append(AuditEvent event, std::string detail) {
    AuditLogEntry e;
    e.sequence = entries_.size();
    e.event = event;
    e.detail = std::move(detail);
    e.prev_hash = head();
    e.entry_hash = audit_chain_hash(e.prev_hash, e.event, e.detail, e.sequence);
    entries_.push_back(std::move(e));
    return entries_.back();
}

bool AuditLog::chain_valid() const {
    crypto::Digest prev{};
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const AuditLogEntry& e = entries_[i];
        if (e.sequence != i) return false;
        if (e.prev_hash != prev) return false;
        if (e.entry_hash != audit_chain_hash(e.prev_hash, e.event, e.detail, e.sequence))
            return false;
        prev = e.entry_hash;
    }
    return true;
}

crypto::Digest AuditLog::head() const {
    return entries_.empty() ? crypto::Digest{} : entries_.back().entry_hash;
}

} // namespace secureml::cas
