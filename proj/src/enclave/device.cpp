#include "secureml/enclave/device.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "secureml/common/error.hpp"
#include "secureml/common/hex.hpp"
#include "secureml/crypto/random.hpp"

namespace secureml::enclave {

SimulatedDevice SimulatedDevice::generate() {
    return SimulatedDevice{DeviceKey::generate(), crypto::random_bytes(32)};
}

SimulatedDevice SimulatedDevice::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open device file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("device file: ") + e.what());
    }
    Bytes seed = from_hex(doc.at("signing_key").get<std::string>());
    Bytes secret = from_hex(doc.at("device_secret").get<std::string>());
    if (secret.size() != 32) throw DecodeError("device secret must be 32 bytes");
    return SimulatedDevice{DeviceKey::from_private_raw(seed), std::move(secret)};
}

void SimulatedDevice::save_file(const std::string& path) const {
    nlohmann::json doc = {
        {"device_id", to_hex(key.device_id)},
        {"public_key", to_hex(key.key.public_raw())},
        {"signing_key", to_hex(key.key.private_raw())},
        {"device_secret", to_hex(device_secret)},
    };
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write device file: " + path);
    out << doc.dump(2) << "\n";
}

} // namespace secureml::enclave
