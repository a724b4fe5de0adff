#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "secureml/cas/store.hpp"
#include "secureml/enclave/trust_root.hpp"
#include "secureml/netshield/channel.hpp"

namespace secureml::cas {

// Common name under which the service identifies itself on the wire.
inline constexpr const char* kServiceCommonName = "cas";

// Network front end for a Store. At startup the service signs itself a
// short-lived leaf (CN above) under the store's root authority; workers dial
// without a client certificate — a fresh worker owns nothing yet — and
// authenticate the service against the out-of-band root certificate.
//
// Protocol: one request frame yields exactly one reply frame. Domain errors
// travel back as AttestErr/CounterErr frames and the connection stays open;
// a malformed frame tears the connection down.
class CasService {
public:
    CasService(Store store, enclave::TrustRoot devices, const std::string& listen_addr);
    ~CasService();

    CasService(const CasService&) = delete;
    CasService& operator=(const CasService&) = delete;

    std::uint16_t port() const;
    std::string root_cert_pem() const;
    Store& store() { return store_; }

    // Idempotent; interrupts every live connection and joins all threads.
    void stop();

private:
    // A connection's channel is closed only here, after joining its thread;
    // the serving thread just returns and flips `done`. That keeps stop()'s
    // shutdown_transport() free of races against a concurrent close.
    struct Conn {
        std::thread thread;
        std::shared_ptr<netshield::Channel> channel;
        std::shared_ptr<std::atomic<bool>> done;
    };

    void accept_loop();
    void serve(std::shared_ptr<netshield::Channel> channel, std::shared_ptr<std::atomic<bool>> done);
    Bytes handle_frame(BytesView frame, netshield::Channel& channel);
    void wake_acceptor();
    void sweep_finished();

    Store store_;
    enclave::TrustRoot devices_;
    std::unique_ptr<netshield::Listener> listener_;
    std::atomic<bool> stopping_{false};
    std::thread acceptor_;

    std::mutex conns_mu_;
    std::vector<Conn> conns_;
};

} // namespace secureml::cas
