#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "secureml/crypto/sha256.hpp"

namespace secureml::cas {

enum class AuditEvent : std::uint8_t {
    SessionCreated = 0,
    AttestAccepted = 1,
    AttestRejected = 2,
    SecretsIssued = 3,
    CounterAdvanced = 4,
};

const char* audit_event_name(AuditEvent e);

struct AuditLogEntry {
    std::uint64_t sequence = 0;
    AuditEvent event = AuditEvent::SessionCreated;
    std::string detail;
    crypto::Digest prev_hash{};
    crypto::Digest entry_hash{};
};

// entry_hash = SHA-256(prev_hash ‖ u8 event ‖ str detail ‖ u64 sequence),
// with the genesis prev_hash all zero. Any truncation, reorder or edit of the
// log breaks the chain on recomputation.
crypto::Digest audit_chain_hash(const crypto::Digest& prev_hash, AuditEvent event,
                                const std::string& detail, std::uint64_t sequence);

class AuditLog {
public:
    const AuditLogEntry& append(AuditEvent event, std::string detail);

    const std::vector<AuditLogEntry>& entries() const { return entries_; }
    bool chain_valid() const;

    // Tip of the chain (genesis zeroes when empty).
    crypto::Digest head() const;

    // Raw mutation for deserialization; the caller re-validates the chain.
    void restore(std::vector<AuditLogEntry> entries) { entries_ = std::move(entries); }

private:
    std::vector<AuditLogEntry> entries_;
};

} // namespace secureml::cas
