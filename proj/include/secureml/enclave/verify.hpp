#pragma once

#include <chrono>
#include <set>
#include <string>

#include "secureml/enclave/quote.hpp"
#include "secureml/enclave/trust_root.hpp"

namespace secureml::enclave {

enum class RejectReason {
    BadSignature,
    UnknownDevice,
    MeasurementNotAllowed,
};

struct VerificationResult {
    bool accepted = false;
    RejectReason reason = RejectReason::BadSignature; // meaningful only when rejected

    static VerificationResult accept() { return {true, RejectReason::BadSignature}; }
    static VerificationResult reject(RejectReason r) { return {false, r}; }
};

const char* reject_reason_name(RejectReason r);

VerificationResult verify_quote_local(const Quote& q, const std::set<Measurement>& expected,
                                      const TrustRoot& root);

// Same decision procedure as the local path, preceded by simulated WAN round
// trips to a remote verifier: each round trip blocks for two latency legs.
struct RemoteSimConfig {
    std::chrono::milliseconds wan_latency{0};
    int round_trips = 2;
};

VerificationResult verify_quote_remote_sim(const Quote& q, const std::set<Measurement>& expected,
                                           const TrustRoot& root, const RemoteSimConfig& cfg);

} // namespace secureml::enclave
