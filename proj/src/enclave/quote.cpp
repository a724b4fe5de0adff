#include "secureml/enclave/quote.hpp"

#include <chrono>

#include "secureml/common/codec.hpp"
#include "secureml/common/error.hpp"

namespace secureml::enclave {

namespace {
constexpr char kMagic[4] = {'S', 'M', 'Q', 'T'};
constexpr std::uint8_t kVersion = 1;

void write_prefix(BinaryWriter& w, const Quote& q) {
    w.raw(std::string_view(kMagic, 4));
    w.u8(kVersion);
    w.raw(q.measurement.digest);
    w.raw(q.report_data.payload);
    w.raw(q.device_id);
    w.u64(q.timestamp);
}
} // namespace

ReportData ReportData::from(BytesView data) {
    if (data.size() > kReportDataLen) throw Error("report data exceeds 64 bytes");
    ReportData rd;
    std::copy(data.begin(), data.end(), rd.payload.begin());
    return rd;
}

DeviceId device_id_of(const crypto::Ed25519Key& public_key) {
    auto digest = crypto::sha256(public_key.public_raw());
    DeviceId id{};
    std::copy_n(digest.begin(), kDeviceIdLen, id.begin());
    return id;
}

DeviceKey DeviceKey::generate() {
    auto key = crypto::Ed25519Key::generate();
    auto id = device_id_of(key);
    return DeviceKey{std::move(key), id};
}

DeviceKey DeviceKey::from_private_raw(BytesView seed) {
    auto key = crypto::Ed25519Key::from_private_raw(seed);
    auto id = device_id_of(key);
    return DeviceKey{std::move(key), id};
}

Bytes Quote::signed_view() const {
    BinaryWriter w;
    write_prefix(w, *this);
    return w.take();
}

Bytes Quote::encode() const {
    BinaryWriter w;
    write_prefix(w, *this);
    if (signature.size() > 0xffffu) throw Error("signature too long");
    w.u16(static_cast<std::uint16_t>(signature.size()));
    w.raw(signature);
    return w.take();
}

Quote Quote::decode(BytesView data) {
    BinaryReader r(data);
    auto magic = r.raw(4);
    if (!equal(magic, to_bytes(std::string_view(kMagic, 4)))) throw DecodeError("bad quote magic");
    if (r.u8() != kVersion) throw DecodeError("unsupported quote version");
    Quote q;
    q.measurement.digest = r.fixed<crypto::kDigestLen>();
    q.report_data.payload = r.fixed<kReportDataLen>();
    q.device_id = r.fixed<kDeviceIdLen>();
    q.timestamp = r.u64();
    std::uint16_t sig_len = r.u16();
    q.signature = r.raw(sig_len);
    r.expect_done();
    return q;
}

Quote generate_quote(const Measurement& m, const ReportData& rd, const DeviceKey& dk,
                     std::uint64_t timestamp) {
    Quote q;
    q.measurement = m;
    q.report_data = rd;
    q.device_id = dk.device_id;
    q.timestamp = timestamp;
    q.signature = dk.key.sign(q.signed_view());
    return q;
}

Quote generate_quote(const Measurement& m, const ReportData& rd, const DeviceKey& dk) {
    auto now = std::chrono::system_clock::now().time_since_epoch();
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(now).count();
    return generate_quote(m, rd, dk, static_cast<std::uint64_t>(secs));
}

} // namespace secureml::enclave
