#include "secureml/cas/wire.hpp"

#include "secureml/common/codec.hpp"

namespace secureml::cas::wire {

namespace {

BinaryWriter begin(MsgType t) {
    BinaryWriter w;
    w.u8(static_cast<std::uint8_t>(t));
    return w;
}

BinaryReader open(BytesView frame, MsgType expected) {
    BinaryReader r(frame);
    const auto type = static_cast<MsgType>(r.u8());
    if (type != expected) throw DecodeError("unexpected message type");
    return r;
}

} // namespace

MsgType peek_type(BytesView frame) {
    if (frame.empty()) throw DecodeError("empty frame");
    return static_cast<MsgType>(frame[0]);
}

Bytes encode_attest_request(const AttestRequest& m) {
    BinaryWriter w = begin(MsgType::AttestRequest);
    w.str(m.session);
    w.blob(m.quote.encode());
    return std::move(w).take();
}

AttestRequest decode_attest_request(BytesView frame) {
    BinaryReader r = open(frame, MsgType::AttestRequest);
    AttestRequest m;
    m.session = r.str();
    m.quote = enclave::Quote::decode(r.blob());
    r.expect_done();
    return m;
}

Bytes encode_attest_ok(const SecretBundle& bundle) {
    BinaryWriter w = begin(MsgType::AttestOk);
    w.str(bundle.session);
    w.u32(static_cast<std::uint32_t>(bundle.secrets.size()));
    for (const auto& [name, value] : bundle.secrets) {
        w.str(name);
        w.blob(value);
    }
    w.u64(bundle.issued_at);
    w.blob(to_bytes(bundle.root_cert_pem));
    return std::move(w).take();
}

SecretBundle decode_attest_ok(BytesView frame) {
    BinaryReader r = open(frame, MsgType::AttestOk);
    SecretBundle bundle;
    bundle.session = r.str();
    const std::uint32_t n = r.u32();
    for (std::uint32_t i = 0; i < n; ++i) {
        std::string name = r.str();
        bundle.secrets[std::move(name)] = r.blob();
    }
    bundle.issued_at = r.u64();
    bundle.root_cert_pem = to_string(r.blob());
    r.expect_done();
    return bundle;
}

Bytes encode_counter_register(const CounterRegister& m) {
    BinaryWriter w = begin(MsgType::CounterRegister);
    w.str(m.scope);
    return std::move(w).take();
}

CounterRegister decode_counter_register(BytesView frame) {
    BinaryReader r = open(frame, MsgType::CounterRegister);
    CounterRegister m;
    m.scope = r.str();
    r.expect_done();
    return m;
}

Bytes encode_counter_advance(const CounterAdvance& m) {
    BinaryWriter w = begin(MsgType::CounterAdvance);
    w.str(m.scope);
    w.u64(m.expected);
    w.raw(BytesView(m.writer.data(), m.writer.size()));
    return std::move(w).take();
}

CounterAdvance decode_counter_advance(BytesView frame) {
    BinaryReader r = open(frame, MsgType::CounterAdvance);
    CounterAdvance m;
    m.scope = r.str();
    m.expected = r.u64();
    m.writer = r.fixed<enclave::kDeviceIdLen>();
    r.expect_done();
    return m;
}

Bytes encode_counter_read(const CounterRead& m) {
    BinaryWriter w = begin(MsgType::CounterRead);
    w.str(m.scope);
    return std::move(w).take();
}

CounterRead decode_counter_read(BytesView frame) {
    BinaryReader r = open(frame, MsgType::CounterRead);
    CounterRead m;
    m.scope = r.str();
    r.expect_done();
    return m;
}

Bytes encode_counter_ok(std::uint64_t value) {
    BinaryWriter w = begin(MsgType::CounterOk);
    w.u64(value);
    return std::move(w).take();
}

std::uint64_t decode_counter_ok(BytesView frame) {
    BinaryReader r = open(frame, MsgType::CounterOk);
    const std::uint64_t value = r.u64();
    r.expect_done();
    return value;
}

Bytes encode_error(MsgType type, const ErrorReply& e) {
    BinaryWriter w = begin(type);
    w.str(e.kind);
    w.str(e.message);
    w.u64(e.value);
    return std::move(w).take();
}

ErrorReply decode_error(BytesView frame) {
    BinaryReader r(frame);
    (void)r.u8();
    ErrorReply e;
    e.kind = r.str();
    e.message = r.str();
    e.value = r.u64();
    r.expect_done();
    return e;
}

} // namespace secureml::cas::wire
