#pragma once

#include <array>
#include <cstdint>

#include "secureml/common/bytes.hpp"
#include "secureml/crypto/ed25519.hpp"
#include "secureml/enclave/measurement.hpp"

namespace secureml::enclave {

inline constexpr std::size_t kReportDataLen = 64;
inline constexpr std::size_t kDeviceIdLen = 16;

using DeviceId = std::array<std::uint8_t, kDeviceIdLen>;

// Caller-chosen challenge bytes bound into a quote, zero-padded to 64 bytes.
// The CAS protocol places the TLS channel binding in the first 32.
struct ReportData {
    std::array<std::uint8_t, kReportDataLen> payload{};

    static ReportData from(BytesView data);
    bool operator==(const ReportData&) const = default;
};

// Signing identity of a simulated device; stands in for the SGX attestation
// key. device_id is the truncated hash of the public key.
struct DeviceKey {
    crypto::Ed25519Key key;
    DeviceId device_id;

    static DeviceKey generate();
    static DeviceKey from_private_raw(BytesView seed);
};

DeviceId device_id_of(const crypto::Ed25519Key& public_key);

// Signed attestation evidence. The canonical encoding is byte-stable: fixed
// field order, big-endian integers, 2-byte length prefix on the signature.
struct Quote {
    Measurement measurement;
    ReportData report_data;
    DeviceId device_id{};
    std::uint64_t timestamp = 0;
    Bytes signature;

    Bytes encode() const;
    static Quote decode(BytesView data); // throws DecodeError

    // Bytes covered by the signature (everything before it).
    Bytes signed_view() const;
};

Quote generate_quote(const Measurement& m, const ReportData& rd, const DeviceKey& dk,
                     std::uint64_t timestamp);
Quote generate_quote(const Measurement& m, const ReportData& rd, const DeviceKey& dk);

} // namespace secureml::enclave
