#include "secureml/enclave/verify.hpp"

#include <thread>

#include "secureml/common/error.hpp"

namespace secureml::enclave {

const char* reject_reason_name(RejectReason r) {
    switch (r) {
    case RejectReason::BadSignature: return "BadSignature";
    case RejectReason::UnknownDevice: return "UnknownDevice";
    case RejectReason::MeasurementNotAllowed: return "MeasurementNotAllowed";
    }
    return "Unknown";
}

VerificationResult verify_quote_local(const Quote& q, const std::set<Measurement>& expected,
                                      const TrustRoot& root) {
    if (root.empty()) throw Error("trust root is empty");
    auto device_key = root.find(q.device_id);
    if (!device_key) return VerificationResult::reject(RejectReason::UnknownDevice);
    if (!device_key->verify(q.signed_view(), q.signature))
        return VerificationResult::reject(RejectReason::BadSignature);
    if (expected.find(q.measurement) == expected.end())
        return VerificationResult::reject(RejectReason::MeasurementNotAllowed);
    return VerificationResult::accept();
}

VerificationResult verify_quote_remote_sim(const Quote& q, const std::set<Measurement>& expected,
                                           const TrustRoot& root, const RemoteSimConfig& cfg) {
    if (cfg.wan_latency.count() < 0) throw Error("negative wan latency");
    for (int rt = 0; rt < cfg.round_trips; ++rt) {
        std::this_thread::sleep_for(cfg.wan_latency); // request leg
        std::this_thread::sleep_for(cfg.wan_latency); // response leg
    }
    return verify_quote_local(q, expected, root);
}

} // namespace secureml::enclave
