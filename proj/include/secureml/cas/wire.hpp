#pragma once

#include <cstdint>
#include <string>

#include "secureml/cas/policy.hpp"
#include "secureml/common/bytes.hpp"
#include "secureml/enclave/quote.hpp"

namespace secureml::cas::wire {

// Frame bodies exchanged with the attestation service over a net-shield
// channel. Every frame starts with a one-byte message type.
enum class MsgType : std::uint8_t {
    AttestRequest = 0x01,
    AttestOk = 0x02,
    AttestErr = 0x03,
    CounterRegister = 0x10,
    CounterAdvance = 0x11,
    CounterRead = 0x12,
    CounterOk = 0x13,
    CounterErr = 0x14,
};

struct AttestRequest {
    std::string session; // session name; the service resolves it to the id
    enclave::Quote quote;
};

struct CounterRegister {
    std::string scope;
};

struct CounterAdvance {
    std::string scope;
    std::uint64_t expected = 0;
    enclave::DeviceId writer{};
};

struct CounterRead {
    std::string scope;
};

// error_kind carries the exception class name; StaleCounter also carries the
// authoritative stored value.
struct ErrorReply {
    std::string kind;
    std::string message;
    std::uint64_t value = 0;
};

Bytes encode_attest_request(const AttestRequest& m);
Bytes encode_attest_ok(const SecretBundle& bundle);
Bytes encode_counter_register(const CounterRegister& m);
Bytes encode_counter_advance(const CounterAdvance& m);
Bytes encode_counter_read(const CounterRead& m);
Bytes encode_counter_ok(std::uint64_t value);
Bytes encode_error(MsgType type, const ErrorReply& e);

MsgType peek_type(BytesView frame); // throws DecodeError on empty frame

AttestRequest decode_attest_request(BytesView frame);
SecretBundle decode_attest_ok(BytesView frame);
CounterRegister decode_counter_register(BytesView frame);
CounterAdvance decode_counter_advance(BytesView frame);
CounterRead decode_counter_read(BytesView frame);
std::uint64_t decode_counter_ok(BytesView frame);
ErrorReply decode_error(BytesView frame);

} // namespace secureml::cas::wire
