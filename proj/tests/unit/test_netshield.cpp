#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <openssl/ssl.h>

#include <atomic>
#include <cstring>
#include <mutex>
#include <random>
#include <thread>

#include "secureml/crypto/certs.hpp"
#include "secureml/crypto/random.hpp"
#include "secureml/netshield/channel.hpp"

using namespace secureml;
using namespace secureml::netshield;

namespace {

struct Pki {
    crypto::CertAuthority ca = crypto::CertAuthority::generate("test-root");

    TlsIdentity identity(const std::string& cn, std::int64_t not_before = -3600,
                         std::int64_t not_after = 3600,
                         std::optional<crypto::Digest> measurement = std::nullopt) const {
        const crypto::IssuedCert leaf = ca.issue_leaf(cn, not_before, not_after, measurement);
        return TlsIdentity{leaf.cert_pem, leaf.key_pem, ca.cert_pem()};
    }
};

PeerPolicy allow(std::set<std::string> names) {
    PeerPolicy p;
    p.allowed_peers = std::move(names);
    return p;
}

ConnectOptions client_options(const TlsIdentity& id) {
    ConnectOptions o;
    o.identity = id;
    o.root_pem = id.root_pem;
    return o;
}

std::string loopback(std::uint16_t port) {
    return "127.0.0.1:" + std::to_string(port);
}

int raw_connect(std::uint16_t port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port);
    sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) == 0);
    return fd;
}

// TCP relay that records every byte moving in either direction — the
// listening post of an on-path attacker.
class CaptureProxy {
public:
    explicit CaptureProxy(std::uint16_t upstream_port) : upstream_port_(upstream_port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        REQUIRE(fd_ >= 0);
        sockaddr_in sa{};
        sa.sin_family = AF_INET;
        sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        REQUIRE(::bind(fd_, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) == 0);
        REQUIRE(::listen(fd_, 4) == 0);
        sockaddr_in bound{};
        socklen_t len = sizeof(bound);
        REQUIRE(::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len) == 0);
        port_ = ntohs(bound.sin_port);

        th_ = std::thread([this] { run(); });
    }

    ~CaptureProxy() {
        th_.join();
        ::close(fd_);
    }

    std::uint16_t port() const { return port_; }

    Bytes captured() {
        std::lock_guard lock(mu_);
        return captured_;
    }

private:
    void run() {
        const int conn = ::accept(fd_, nullptr, nullptr);
        if (conn < 0) return;
        const int up = raw_connect(upstream_port_);

        auto pump = [this](int from, int to) {
            std::uint8_t buf[4096];
            for (;;) {
                const ssize_t n = ::read(from, buf, sizeof(buf));
                if (n <= 0) break;
                {
                    std::lock_guard lock(mu_);
                    captured_.insert(captured_.end(), buf, buf + n);
                }
                ssize_t off = 0;
                while (off < n) {
                    const ssize_t w = ::write(to, buf + off, static_cast<std::size_t>(n - off));
                    if (w <= 0) return;
                    off += w;
                }
            }
            ::shutdown(to, SHUT_WR);
        };
        std::thread a(pump, conn, up);
        std::thread b(pump, up, conn);
        a.join();
        b.join();
        ::close(conn);
        ::close(up);
    }

    std::uint16_t upstream_port_;
    int fd_ = -1;
    std::uint16_t port_ = 0;
    std::mutex mu_;
    Bytes captured_;
    std::thread th_;
};

} // namespace

TEST_SUITE("channel") {
    TEST_CASE("mutual tls round trip with matching bindings") {
        Pki pki;
        Listener listener(loopback(0), pki.identity("server"), allow({"client"}));

        crypto::Digest server_binding{};
        std::string server_saw_peer;
        std::thread server([&] {
            Channel ch = listener.accept();
            server_binding = ch.binding();
            server_saw_peer = ch.peer_common_name();
            // echo until the client hangs up
            try {
                for (;;) ch.send_frame(ch.recv_frame());
            } catch (const PeerClosed&) {
            }
        });

        Channel ch = connect(loopback(listener.port()), client_options(pki.identity("client")),
                             allow({"server"}));

        const Bytes small{0x01, 0x02};
        ch.send_frame(small);
        CHECK(ch.recv_frame() == small);

        ch.send_frame({});
        CHECK(ch.recv_frame().empty());

        // A mid-size frame spanning several TLS records.
        std::mt19937_64 rng(1);
        Bytes big(300000);
        for (auto& b : big) b = static_cast<std::uint8_t>(rng());
        ch.send_frame(big);
        CHECK(ch.recv_frame() == big);

        const crypto::Digest client_binding = ch.binding();
        CHECK(ch.peer_common_name() == "server");
        ch.close();
        server.join();

        CHECK(server_binding == client_binding);
        CHECK(server_saw_peer == "client");
    }

    TEST_CASE("bindings differ across sessions between the same peers") {
        Pki pki;
        Listener listener(loopback(0), pki.identity("server"), allow({"client"}));

        std::vector<crypto::Digest> server_bindings;
        std::thread server([&] {
            for (int i = 0; i < 2; ++i) {
                Channel ch = listener.accept();
                server_bindings.push_back(ch.binding());
                (void)ch.recv_frame(); // wait for the client's goodbye
            }
        });

        std::vector<crypto::Digest> client_bindings;
        for (int i = 0; i < 2; ++i) {
            Channel ch = connect(loopback(listener.port()),
                                 client_options(pki.identity("client")), allow({"server"}));
            client_bindings.push_back(ch.binding());
            ch.send_frame(to_bytes("bye"));
        }
        server.join();

        CHECK(client_bindings[0] == server_bindings[0]);
        CHECK(client_bindings[1] == server_bindings[1]);
        CHECK(client_bindings[0] != client_bindings[1]);
    }

    TEST_CASE("oversize frames are refused before any bytes move") {
        Pki pki;
        Listener listener(loopback(0), pki.identity("server"), allow({"client"}));

        std::thread server([&] {
            Channel ch = listener.accept();
            // The only frame that ever arrives is the small follow-up.
            CHECK(ch.recv_frame() == to_bytes("after"));
        });

        Channel ch = connect(loopback(listener.port()), client_options(pki.identity("client")),
                             allow({"server"}));
        Bytes oversize(kMaxFrameLen + 1);
        CHECK_THROWS_AS(ch.send_frame(oversize), FrameTooLarge);
        ch.send_frame(to_bytes("after"));
        server.join();
    }

    TEST_CASE("moved-from channel reports no session") {
        Pki pki;
        Listener listener(loopback(0), pki.identity("server"), allow({"client"}));
        std::thread server([&] {
            try {
                Channel ch = listener.accept();
                (void)ch.recv_frame();
            } catch (const Error&) {
            }
        });

        Channel a = connect(loopback(listener.port()), client_options(pki.identity("client")),
                            allow({"server"}));
        Channel b = std::move(a);
        CHECK_THROWS_AS((void)a.binding(), NotEstablished);
        CHECK_THROWS_AS(a.send_frame(to_bytes("x")), NotEstablished);
        CHECK_THROWS_AS((void)a.recv_frame(), NotEstablished);
        CHECK_NOTHROW((void)b.binding());
        b.close();
        server.join();
    }
}

TEST_SUITE("handshake_policy") {
    TEST_CASE("self-signed peer is refused as untrusted") {
        Pki pki, evil;
        Listener listener(loopback(0), pki.identity("server"), allow({"client"}));

        std::atomic<bool> server_rejected{false};
        std::thread server([&] {
            try {
                (void)listener.accept();
            } catch (const HandshakeError& e) {
                CHECK(e.reason() == HandshakeReason::UntrustedChain);
                server_rejected = true;
            }
        });

        // The client trusts the real root (so it proceeds far enough to send
        // its own certificate) but presents a leaf from a different CA.
        TlsIdentity rogue = evil.identity("client");
        rogue.root_pem = pki.ca.cert_pem();
        try {
            Channel ch = connect(loopback(listener.port()), client_options(rogue),
                                 allow({"server"}));
            // TLS 1.3 lets the client finish first; the rejection lands on
            // the first read.
            CHECK_THROWS_AS((void)ch.recv_frame(), Error);
        } catch (const Error&) {
        }
        server.join();
        CHECK(server_rejected);
    }

    TEST_CASE("valid chain with unlisted name is refused") {
        Pki pki;
        Listener listener(loopback(0), pki.identity("server"), allow({"client"}));

        std::atomic<bool> server_rejected{false};
        std::thread server([&] {
            try {
                (void)listener.accept();
            } catch (const HandshakeError& e) {
                CHECK(e.reason() == HandshakeReason::PeerNotAllowed);
                server_rejected = true;
            }
        });

        // Handshake itself succeeds — the server closes right after, so the
        // client observes a dead channel and zero application frames.
        try {
            Channel ch = connect(loopback(listener.port()),
                                 client_options(pki.identity("intruder")), allow({"server"}));
            CHECK_THROWS_AS((void)ch.recv_frame(), Error);
        } catch (const Error&) {
            // acceptable: the alert can also surface during connect
        }
        server.join();
        CHECK(server_rejected);
    }

    TEST_CASE("client refuses a server with the wrong name") {
        Pki pki;
        // Server presents a perfectly valid cert for a name the client does
        // not expect.
        Listener listener(loopback(0), pki.identity("imposter"), allow({"client"}));
        std::thread server([&] {
            try {
                (void)listener.accept();
            } catch (const Error&) {
            }
        });

        try {
            (void)connect(loopback(listener.port()), client_options(pki.identity("client")),
                          allow({"server"}));
            FAIL("wrong server name accepted");
        } catch (const HandshakeError& e) {
            CHECK(e.reason() == HandshakeReason::PeerNotAllowed);
        }
        server.join();
    }

    TEST_CASE("expired server leaf is refused by the client") {
        Pki pki;
        Listener listener(loopback(0), pki.identity("server", -7200, -3600), allow({"client"}));
        std::thread server([&] {
            try {
                (void)listener.accept();
            } catch (const Error&) {
            }
        });

        try {
            (void)connect(loopback(listener.port()), client_options(pki.identity("client")),
                          allow({"server"}));
            FAIL("expired server accepted");
        } catch (const HandshakeError& e) {
            CHECK(e.reason() == HandshakeReason::Expired);
        }
        server.join();
    }

    TEST_CASE("measurement pinning") {
        Pki pki;
        const crypto::Digest code_a = crypto::sha256(to_bytes("worker-code-a"));
        const crypto::Digest code_b = crypto::sha256(to_bytes("worker-code-b"));

        PeerPolicy pin = allow({"client"});
        pin.require_measurement = {enclave::Measurement{code_a}};

        SUBCASE("matching digest is admitted") {
            Listener listener(loopback(0), pki.identity("server"), pin);
            std::thread server([&] {
                Channel ch = listener.accept();
                CHECK(ch.recv_frame() == to_bytes("hello"));
            });
            Channel ch = connect(loopback(listener.port()),
                                 client_options(pki.identity("client", -3600, 3600, code_a)),
                                 allow({"server"}));
            ch.send_frame(to_bytes("hello"));
            ch.close();
            server.join();
        }

        SUBCASE("wrong digest is refused") {
            Listener listener(loopback(0), pki.identity("server"), pin);
            std::atomic<bool> rejected{false};
            std::thread server([&] {
                try {
                    (void)listener.accept();
                } catch (const HandshakeError& e) {
                    CHECK(e.reason() == HandshakeReason::MeasurementMismatch);
                    rejected = true;
                }
            });
            try {
                Channel ch = connect(loopback(listener.port()),
                                     client_options(pki.identity("client", -3600, 3600, code_b)),
                                     allow({"server"}));
                CHECK_THROWS_AS((void)ch.recv_frame(), Error);
            } catch (const Error&) {
            }
            server.join();
            CHECK(rejected);
        }

        SUBCASE("missing digest is refused when pinning is on") {
            Listener listener(loopback(0), pki.identity("server"), pin);
            std::atomic<bool> rejected{false};
            std::thread server([&] {
                try {
                    (void)listener.accept();
                } catch (const HandshakeError& e) {
                    CHECK(e.reason() == HandshakeReason::MeasurementMismatch);
                    rejected = true;
                }
            });
            try {
                Channel ch = connect(loopback(listener.port()),
                                     client_options(pki.identity("client")), allow({"server"}));
                CHECK_THROWS_AS((void)ch.recv_frame(), Error);
            } catch (const Error&) {
            }
            server.join();
            CHECK(rejected);
        }
    }

    TEST_CASE("listener survives a rejected connection") {
        Pki pki, evil;
        Listener listener(loopback(0), pki.identity("server"), allow({"client"}));

        std::thread server([&] {
            CHECK_THROWS_AS((void)listener.accept(), HandshakeError);
            Channel ch = listener.accept();
            CHECK(ch.recv_frame() == to_bytes("still here"));
        });

        CHECK_THROWS_AS((void)connect(loopback(listener.port()),
                                      client_options(evil.identity("client")), allow({"server"})),
                        Error);
        Channel ch = connect(loopback(listener.port()), client_options(pki.identity("client")),
                             allow({"server"}));
        ch.send_frame(to_bytes("still here"));
        ch.close();
        server.join();
    }

    TEST_CASE("anonymous clients are admitted only when configured") {
        Pki pki;

        SUBCASE("attestation-service mode: no client certificate required") {
            ListenerOptions opts;
            opts.require_client_cert = false;
            Listener listener(loopback(0), pki.identity("cas"), allow({}), opts);
            std::thread server([&] {
                Channel ch = listener.accept();
                CHECK(ch.peer_common_name().empty());
                CHECK(ch.recv_frame() == to_bytes("enrol me"));
            });

            ConnectOptions anon;
            anon.root_pem = pki.ca.cert_pem();
            Channel ch = connect(loopback(listener.port()), anon, allow({"cas"}));
            ch.send_frame(to_bytes("enrol me"));
            ch.close();
            server.join();
        }

        SUBCASE("default mode requires a certificate") {
            Listener listener(loopback(0), pki.identity("server"), allow({"client"}));
            std::thread server([&] {
                CHECK_THROWS_AS((void)listener.accept(), HandshakeError);
            });
            ConnectOptions anon;
            anon.root_pem = pki.ca.cert_pem();
            try {
                Channel ch = connect(loopback(listener.port()), anon, allow({"server"}));
                // The server's refusal arrives after the client's Finished.
                CHECK_THROWS_AS((void)ch.recv_frame(), Error);
            } catch (const Error&) {
            }
            server.join();
        }
    }
}

TEST_SUITE("wire_privacy") {
    TEST_CASE("plaintext probe gets no application data") {
        Pki pki;
        Listener listener(loopback(0), pki.identity("server"), allow({"client"}));
        std::thread server([&] {
            CHECK_THROWS_AS((void)listener.accept(), HandshakeError);
        });

        const int fd = raw_connect(listener.port());
        const char probe[] = "GET / HTTP/1.0\r\n\r\n";
        REQUIRE(::write(fd, probe, sizeof(probe) - 1) == ssize_t(sizeof(probe) - 1));

        // Whatever comes back is a TLS alert record or nothing — never
        // application bytes.
        std::uint8_t buf[512];
        ssize_t total = 0;
        for (;;) {
            const ssize_t n = ::read(fd, buf + total, sizeof(buf) - total);
            if (n <= 0) break;
            total += n;
        }
        if (total > 0) CHECK(buf[0] == 0x15); // TLS alert content type
        ::close(fd);
        server.join();
    }

    TEST_CASE("a recording on-path proxy never sees the payload") {
        Pki pki;
        Listener listener(loopback(0), pki.identity("server"), allow({"client"}));

        const Bytes sentinel = crypto::random_bytes(32);
        Bytes reply_sentinel = crypto::random_bytes(32);

        std::thread server([&] {
            Channel ch = listener.accept();
            CHECK(ch.recv_frame() == sentinel);
            ch.send_frame(reply_sentinel);
            try {
                (void)ch.recv_frame();
            } catch (const Error&) {
            }
        });

        Bytes capture;
        {
            CaptureProxy proxy(listener.port());
            Channel ch = connect(loopback(proxy.port()), client_options(pki.identity("client")),
                                 allow({"server"}));
            ch.send_frame(sentinel);
            CHECK(ch.recv_frame() == reply_sentinel);
            ch.close();
            server.join();
            capture = proxy.captured();
        }

        CHECK(capture.size() > 1000); // the handshake alone is that big
        CHECK_FALSE(contains(capture, sentinel));
        CHECK_FALSE(contains(capture, reply_sentinel));
    }

    TEST_CASE("legacy clients without forward secrecy cannot connect") {
        Pki pki;
        Listener listener(loopback(0), pki.identity("server"), allow({"client"}));
        std::thread server([&] {
            CHECK_THROWS_AS((void)listener.accept(), HandshakeError);
        });

        // A deliberately archaic client: TLS 1.2 max, static-RSA key
        // exchange only. The listener's TLS 1.3 floor shuts it out.
        SSL_CTX* ctx = SSL_CTX_new(TLS_client_method());
        REQUIRE(ctx);
        SSL_CTX_set_min_proto_version(ctx, TLS1_2_VERSION);
        SSL_CTX_set_max_proto_version(ctx, TLS1_2_VERSION);
        SSL_CTX_set_cipher_list(ctx, "kRSA");

        const int fd = raw_connect(listener.port());
        SSL* ssl = SSL_new(ctx);
        SSL_set_fd(ssl, fd);
        CHECK(SSL_connect(ssl) != 1);
        SSL_free(ssl);
        SSL_CTX_free(ctx);
        ::close(fd);
        server.join();
    }
}
