#include "secureml/cas/service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "secureml/cas/errors.hpp"
#include "secureml/cas/wire.hpp"
#include "secureml/common/codec.hpp"

namespace secureml::cas {

namespace {

std::unique_ptr<netshield::Listener> make_listener(const Store& store, const std::string& addr) {
    // Service leaf: re-issued on every start, so a short window is plenty.
    // not_before backs off five minutes to tolerate clock skew.
    const crypto::IssuedCert leaf =
        store.authority().issue_leaf(kServiceCommonName, -300, 30ll * 24 * 3600);
    netshield::TlsIdentity identity{leaf.cert_pem, leaf.key_pem, store.root_cert_pem()};
    netshield::ListenerOptions options;
    options.require_client_cert = false; // workers authenticate via attestation, not certs
    return std::make_unique<netshield::Listener>(addr, std::move(identity), netshield::PeerPolicy{},
                                                 options);
}

} // namespace

CasService::CasService(Store store, enclave::TrustRoot devices, const std::string& listen_addr)
    : store_(std::move(store)), devices_(std::move(devices)) {
    listener_ = make_listener(store_, listen_addr);
    acceptor_ = std::thread(&CasService::accept_loop, this);
}

CasService::~CasService() {
    stop();
}

std::uint16_t CasService::port() const {
    return listener_->port();
}

std::string CasService::root_cert_pem() const {
    return store_.root_cert_pem();
}

void CasService::sweep_finished() {
    std::lock_guard lock(conns_mu_);
    for (auto it = conns_.begin(); it != conns_.end();) {
        if (it->done->load()) {
            it->thread.join();
            it->channel->close();
            it = conns_.erase(it);
        } else {
            ++it;
        }
    }
}

void CasService::accept_loop() {
    while (!stopping_.load()) {
        try {
            netshield::Channel channel = listener_->accept();
            sweep_finished();
            if (stopping_.load()) break;
            Conn conn;
            conn.channel = std::make_shared<netshield::Channel>(std::move(channel));
            conn.done = std::make_shared<std::atomic<bool>>(false);
            conn.thread = std::thread(&CasService::serve, this, conn.channel, conn.done);
            std::lock_guard lock(conns_mu_);
            conns_.push_back(std::move(conn));
        } catch (const netshield::HandshakeError&) {
            continue; // one bad client; the listener stays usable
        } catch (const std::exception&) {
            if (stopping_.load()) break;
            continue;
        }
    }
}

void CasService::serve(std::shared_ptr<netshield::Channel> channel,
                       std::shared_ptr<std::atomic<bool>> done) {
    try {
        for (;;) {
            const Bytes request = channel->recv_frame();
            channel->send_frame(handle_frame(request, *channel));
        }
    } catch (const netshield::PeerClosed&) {
        // normal disconnect
    } catch (const std::exception&) {
        // malformed frame or transport failure: drop the connection
    }
    // Give the peer EOF now; the registry closes the fd after joining us.
    channel->shutdown_transport();
    done->store(true);
}

Bytes CasService::handle_frame(BytesView frame, netshield::Channel& channel) {
    using namespace wire;
    switch (peek_type(frame)) {
    case MsgType::AttestRequest: {
        try {
            const AttestRequest req = decode_attest_request(frame);
            const auto id = store_.find_session_by_name(req.session);
            if (!id) throw UnknownSession();
            const SecretBundle bundle =
                store_.attest_and_provision(*id, req.quote, channel.binding(), devices_);
            return encode_attest_ok(bundle);
        } catch (const UnknownSession& e) {
            return encode_error(MsgType::AttestErr, {"UnknownSession", e.what(), 0});
        } catch (const AttestationRejected& e) {
            return encode_error(
                MsgType::AttestErr,
                {std::string("AttestationRejected:") + enclave::reject_reason_name(e.reason()),
                 e.what(), 0});
        } catch (const ChannelBindingMismatch& e) {
            return encode_error(MsgType::AttestErr, {"ChannelBindingMismatch", e.what(), 0});
        }
    }
    case MsgType::CounterRegister: {
        try {
            const CounterRegister req = decode_counter_register(frame);
            return encode_counter_ok(store_.register_counter(req.scope).value);
        } catch (const DuplicateScope& e) {
            return encode_error(MsgType::CounterErr, {"DuplicateScope", e.what(), 0});
        }
    }
    case MsgType::CounterAdvance: {
        try {
            const CounterAdvance req = decode_counter_advance(frame);
            return encode_counter_ok(store_.advance_counter(req.scope, req.expected, req.writer));
        } catch (const UnknownScope& e) {
            return encode_error(MsgType::CounterErr, {"UnknownScope", e.what(), 0});
        } catch (const StaleCounter& e) {
            return encode_error(MsgType::CounterErr, {"StaleCounter", e.what(), e.stored_value()});
        }
    }
    case MsgType::CounterRead: {
        try {
            const CounterRead req = decode_counter_read(frame);
            return encode_counter_ok(store_.read_counter(req.scope));
        } catch (const UnknownScope& e) {
            return encode_error(MsgType::CounterErr, {"UnknownScope", e.what(), 0});
        }
    }
    default:
        throw DecodeError("unrecognized request type");
    }
}

void CasService::wake_acceptor() {
    // A throwaway plain-TCP connection unblocks accept(); its handshake fails
    // and the loop re-checks the stop flag.
    const int s = ::socket(AF_INET, SOCK_STREAM, 0);
    if (s < 0) return;
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(listener_->port());
    sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    (void)::connect(s, reinterpret_cast<const sockaddr*>(&sa), sizeof(sa));
    ::close(s);
}

void CasService::stop() {
    if (stopping_.exchange(true)) return;
    wake_acceptor();
    if (acceptor_.joinable()) acceptor_.join();
    listener_->close();

    std::vector<Conn> conns;
    {
        std::lock_guard lock(conns_mu_);
        conns.swap(conns_);
    }
    for (auto& conn : conns) {
        conn.channel->shutdown_transport();
        conn.thread.join();
        conn.channel->close();
    }
}

} // namespace secureml::cas
