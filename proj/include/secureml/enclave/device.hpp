#pragma once

#include <string>

#include "secureml/enclave/quote.hpp"

namespace secureml::enclave {

// Per-host simulated hardware identity: the attestation keypair plus the
// device secret sealing keys derive from. All simulated enclaves on one host
// share it, the way real enclaves share the CPU's keys.
struct SimulatedDevice {
    DeviceKey key;
    Bytes device_secret; // 32 bytes

    static SimulatedDevice generate();
    static SimulatedDevice load_file(const std::string& path);
    void save_file(const std::string& path) const;
};

} // namespace secureml::enclave
