#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include "secureml/common/bytes.hpp"
#include "secureml/common/error.hpp"
#include "secureml/crypto/sha256.hpp"
#include "secureml/enclave/measurement.hpp"

using SSL = struct ssl_st;
using SSL_CTX = struct ssl_ctx_st;

namespace secureml::netshield {

// Largest frame a peer can make us buffer. Big models move through the file
// shield in chunks, never as one frame, so this is generous.
inline constexpr std::size_t kMaxFrameLen = 64ull * 1024 * 1024;

// Exporter label for tying attestation quotes to a specific TLS session.
inline constexpr const char* kBindingLabel = "secureml-binding";

struct TlsIdentity {
    std::string cert_pem; // leaf, signed by the service root
    std::string key_pem;
    std::string root_pem; // trust anchor peers must chain to

    // Splits a provisioned tls-identity secret (leaf PEM followed by key PEM)
    // into its parts.
    static TlsIdentity from_provisioned(BytesView tls_secret, std::string root_pem);
};

struct PeerPolicy {
    std::set<std::string> allowed_peers; // certificate common names
    std::optional<std::set<enclave::Measurement>> require_measurement;
};

enum class HandshakeReason {
    UntrustedChain,
    Expired,
    PeerNotAllowed,
    MeasurementMismatch,
    NoPeerCertificate,
    ProtocolFailure,
};

const char* handshake_reason_name(HandshakeReason r);

class HandshakeError : public Error {
public:
    HandshakeError(HandshakeReason reason, const std::string& what)
        : Error(std::string("handshake: ") + handshake_reason_name(reason) + ": " + what),
          reason_(reason) {}
    HandshakeReason reason() const { return reason_; }

private:
    HandshakeReason reason_;
};

class BindError : public Error {
public:
    explicit BindError(const std::string& what) : Error("bind: " + what) {}
};

class FrameTooLarge : public Error {
public:
    explicit FrameTooLarge(std::size_t len)
        : Error("frame of " + std::to_string(len) + " bytes exceeds the 64 MiB cap") {}
};

class PeerClosed : public Error {
public:
    PeerClosed() : Error("peer closed the channel") {}
};

class NotEstablished : public Error {
public:
    NotEstablished() : Error("channel has no established TLS session") {}
};

// An established mutual-TLS 1.3 byte channel carrying length-prefixed frames.
// Move-only; a moved-from channel behaves like a closed one. One sender and
// one receiver at a time per direction.
class Channel {
public:
    Channel() = default;
    Channel(SSL* ssl, int fd); // takes ownership; handshake already complete
    Channel(Channel&& other) noexcept;
    Channel& operator=(Channel&& other) noexcept;
    Channel(const Channel&) = delete;
    Channel& operator=(const Channel&) = delete;
    ~Channel();

    // 4-byte big-endian length, then the payload. Oversize frames are
    // refused before anything is written.
    void send_frame(BytesView frame);
    Bytes recv_frame();

    // TLS exporter keying material for this session (label above): equal at
    // both endpoints, distinct across sessions. Embedded in quotes so the
    // attestation service can tell this channel from a replay.
    crypto::Digest binding() const;

    std::string peer_common_name() const;
    bool established() const { return ssl_ != nullptr; }
    void close();

    // Tears the transport under the TLS session so a thread blocked in
    // send/recv fails promptly (PeerClosed or IoError). Unlike close(), this
    // is safe to call from another thread; the owner still closes normally.
    void shutdown_transport();

private:
    SSL* ssl_ = nullptr;
    int fd_ = -1;
};

struct ListenerOptions {
    // When false, clients without certificates are admitted; the caller
    // authenticates them at the protocol layer instead (the attestation
    // service does this: a fresh worker has no certificate yet).
    bool require_client_cert = true;
};

class Listener {
public:
    // addr is "host:port"; port 0 binds an ephemeral port.
    Listener(const std::string& addr, TlsIdentity identity, PeerPolicy policy,
             ListenerOptions options = {});
    ~Listener();
    Listener(const Listener&) = delete;
    Listener& operator=(const Listener&) = delete;

    // Blocks for the next connection; completes the handshake and applies the
    // peer policy. Throws HandshakeError for a failed connection — the
    // listener itself stays usable.
    Channel accept();

    std::uint16_t port() const { return port_; }
    void close();

private:
    SSL_CTX* ctx_ = nullptr;
    int fd_ = -1;
    std::uint16_t port_ = 0;
    PeerPolicy policy_;
    bool require_client_cert_;
};

struct ConnectOptions {
    // Absent identity connects without a client certificate (pre-provisioning
    // dial to the attestation service).
    std::optional<TlsIdentity> identity;
    std::string root_pem; // server trust anchor; required
};

Channel connect(const std::string& addr, const ConnectOptions& options, const PeerPolicy& policy);

} // namespace secureml::netshield
