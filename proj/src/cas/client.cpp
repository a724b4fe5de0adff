#include "secureml/cas/client.hpp"

#include "secureml/cas/errors.hpp"
#include "secureml/cas/service.hpp"
#include "secureml/cas/wire.hpp"

namespace secureml::cas {

namespace {

enclave::RejectReason parse_reject_reason(const std::string& name) {
    using enclave::RejectReason;
    for (RejectReason r : {RejectReason::BadSignature, RejectReason::UnknownDevice,
                           RejectReason::MeasurementNotAllowed}) {
        if (name == enclave::reject_reason_name(r)) return r;
    }
    throw DecodeError("unknown rejection reason: " + name);
}

// Maps an error frame back to the exception the store threw on the service
// side. `scope` is the counter scope of the request, where one applies.
[[noreturn]] void raise(const wire::ErrorReply& e, const std::string& scope = {}) {
    constexpr std::string_view kRejectedPrefix = "AttestationRejected:";
    if (e.kind == "UnknownSession") throw UnknownSession();
    if (e.kind == "ChannelBindingMismatch") throw ChannelBindingMismatch();
    if (e.kind.rfind(kRejectedPrefix, 0) == 0)
        throw AttestationRejected(parse_reject_reason(e.kind.substr(kRejectedPrefix.size())));
    if (e.kind == "DuplicateScope") throw DuplicateScope(scope);
    if (e.kind == "UnknownScope") throw UnknownScope(scope);
    if (e.kind == "StaleCounter") throw StaleCounter(e.value);
    throw Error("service error [" + e.kind + "]: " + e.message);
}

} // namespace

CasClient CasClient::dial(const std::string& addr, const std::string& root_pem) {
    netshield::ConnectOptions options;
    options.root_pem = root_pem;
    netshield::PeerPolicy policy;
    policy.allowed_peers = {kServiceCommonName};
    return CasClient(netshield::connect(addr, options, policy));
}

Bytes CasClient::round_trip(const Bytes& request) {
    channel_.send_frame(request);
    return channel_.recv_frame();
}

SecretBundle CasClient::attest(const std::string& session_name, const enclave::Measurement& m,
                               const enclave::DeviceKey& device) {
    const crypto::Digest binding = channel_.binding();
    const auto report = enclave::ReportData::from(BytesView(binding.data(), binding.size()));
    return attest_with_quote(session_name, enclave::generate_quote(m, report, device));
}

SecretBundle CasClient::attest_with_quote(const std::string& session_name,
                                          const enclave::Quote& quote) {
    const Bytes reply = round_trip(wire::encode_attest_request({session_name, quote}));
    if (wire::peek_type(reply) == wire::MsgType::AttestOk) return wire::decode_attest_ok(reply);
    raise(wire::decode_error(reply));
}

std::uint64_t CasClient::register_counter(const std::string& scope) {
    const Bytes reply = round_trip(wire::encode_counter_register({scope}));
    if (wire::peek_type(reply) == wire::MsgType::CounterOk) return wire::decode_counter_ok(reply);
    raise(wire::decode_error(reply), scope);
}

std::uint64_t CasClient::advance_counter(const std::string& scope, std::uint64_t expected,
                                         const enclave::DeviceId& writer) {
    const Bytes reply = round_trip(wire::encode_counter_advance({scope, expected, writer}));
    if (wire::peek_type(reply) == wire::MsgType::CounterOk) return wire::decode_counter_ok(reply);
    raise(wire::decode_error(reply), scope);
}

std::uint64_t CasClient::read_counter(const std::string& scope) {
    const Bytes reply = round_trip(wire::encode_counter_read({scope}));
    if (wire::peek_type(reply) == wire::MsgType::CounterOk) return wire::decode_counter_ok(reply);
    raise(wire::decode_error(reply), scope);
}

std::uint64_t RemoteCounterClient::advance(const std::string& scope) {
    std::uint64_t current = 0;
    try {
        current = client_.read_counter(scope);
    } catch (const UnknownScope&) {
        try {
            current = client_.register_counter(scope);
        } catch (const DuplicateScope&) {
            current = client_.read_counter(scope); // a racing writer claimed it first
        }
    }
    for (;;) {
        try {
            return client_.advance_counter(scope, current, writer_);
        } catch (const StaleCounter& stale) {
            current = stale.stored_value(); // lost the race; retry from the stored value
        }
    }
}

std::uint64_t RemoteCounterClient::read(const std::string& scope) {
    try {
        return client_.read_counter(scope);
    } catch (const UnknownScope&) {
        return 0; // never written
    }
}

} // namespace secureml::cas
