#pragma once

#include <cstdint>
#include <string>

#include "secureml/common/error.hpp"
#include "secureml/enclave/verify.hpp"

namespace secureml::cas {

class DuplicateSession : public Error {
public:
    explicit DuplicateSession(const std::string& name)
        : Error("session '" + name + "' already exists") {}
};

class InvalidPolicy : public Error {
public:
    explicit InvalidPolicy(const std::string& reason) : Error("invalid policy: " + reason) {}
};

class UnknownSession : public Error {
public:
    UnknownSession() : Error("unknown session") {}
};

class AttestationRejected : public Error {
public:
    explicit AttestationRejected(enclave::RejectReason reason)
        : Error(std::string("attestation rejected: ") + enclave::reject_reason_name(reason)),
          reason_(reason) {}
    enclave::RejectReason reason() const { return reason_; }

private:
    enclave::RejectReason reason_;
};

// The quote authenticated, but it was not minted for this TLS channel: its
// report_data does not carry the channel's binding value. Accepting it would
// allow replaying a captured quote over an attacker-controlled connection.
class ChannelBindingMismatch : public Error {
public:
    ChannelBindingMismatch() : Error("quote is not bound to this channel") {}
};

class DuplicateScope : public Error {
public:
    explicit DuplicateScope(const std::string& scope)
        : Error("counter scope '" + scope + "' already registered") {}
};

class UnknownScope : public Error {
public:
    explicit UnknownScope(const std::string& scope)
        : Error("counter scope '" + scope + "' not registered") {}
};

// Compare-and-advance lost: the stored value is returned so the caller can
// tell an honest race (stored slightly ahead) from a rollback attempt.
class StaleCounter : public Error {
public:
    explicit StaleCounter(std::uint64_t stored)
        : Error("stale counter: stored value is " + std::to_string(stored)), stored_(stored) {}
    std::uint64_t stored_value() const { return stored_; }

private:
    std::uint64_t stored_;
};

class StoreCorrupt : public Error {
public:
    explicit StoreCorrupt(const std::string& what) : Error("store corrupt: " + what) {}
};

class AuditChainBroken : public Error {
public:
    AuditChainBroken() : Error("audit log hash chain does not verify") {}
};

} // namespace secureml::cas
