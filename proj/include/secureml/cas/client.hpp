#pragma once

#include <cstdint>
#include <string>

#include "secureml/cas/policy.hpp"
#include "secureml/enclave/measurement.hpp"
#include "secureml/enclave/quote.hpp"
#include "secureml/fsshield/freshness.hpp"
#include "secureml/netshield/channel.hpp"

namespace secureml::cas {

// Worker-side connection to the attestation service. The dial is anonymous —
// a fresh worker has no certificate until it is provisioned — and the service
// is authenticated against the out-of-band root certificate. Replies carrying
// error frames are raised as the corresponding typed exceptions.
class CasClient {
public:
    static CasClient dial(const std::string& addr, const std::string& root_pem);

    // Quotes this channel: report_data carries the TLS exporter binding, so
    // the service can tell a live enclave from a replayed quote.
    SecretBundle attest(const std::string& session_name, const enclave::Measurement& m,
                        const enclave::DeviceKey& device);

    // Sends a caller-built quote unchanged (for presenting stale or foreign
    // quotes deliberately).
    SecretBundle attest_with_quote(const std::string& session_name, const enclave::Quote& quote);

    std::uint64_t register_counter(const std::string& scope);
    std::uint64_t advance_counter(const std::string& scope, std::uint64_t expected,
                                  const enclave::DeviceId& writer);
    std::uint64_t read_counter(const std::string& scope);

    crypto::Digest binding() const { return channel_.binding(); }
    void close() { channel_.close(); }

private:
    explicit CasClient(netshield::Channel channel) : channel_(std::move(channel)) {}
    Bytes round_trip(const Bytes& request);

    netshield::Channel channel_;
};

// Freshness source for the file shield backed by the service's monotonic
// counters. advance() registers the scope on first use, then retries
// compare-and-advance from the freshly read value until it wins — concurrent
// writers serialize instead of failing.
class RemoteCounterClient : public fsshield::CounterClient {
public:
    RemoteCounterClient(CasClient& client, const enclave::DeviceId& writer)
        : client_(client), writer_(writer) {}

    std::uint64_t advance(const std::string& scope) override;
    std::uint64_t read(const std::string& scope) override;

private:
    CasClient& client_;
    enclave::DeviceId writer_;
};

} // namespace secureml::cas
