#include "secureml/enclave/trust_root.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "secureml/common/error.hpp"
#include "secureml/common/hex.hpp"

namespace secureml::enclave {

void TrustRoot::register_device(const DeviceId& id, const crypto::Ed25519Key& public_key) {
    devices_[id] = public_key.public_raw();
}

std::optional<crypto::Ed25519Key> TrustRoot::find(const DeviceId& id) const {
    auto it = devices_.find(id);
    if (it == devices_.end()) return std::nullopt;
    return crypto::Ed25519Key::from_public_raw(it->second);
}

std::string TrustRoot::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [id, pub] : devices_)
        arr.push_back({{"device_id", to_hex(id)}, {"public_key", to_hex(pub)}});
    return arr.dump(2);
}

TrustRoot TrustRoot::from_json(const std::string& json) {
    TrustRoot root;
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("trust root: ") + e.what());
    }
    if (!arr.is_array()) throw DecodeError("trust root: expected JSON array");
    for (const auto& entry : arr) {
        Bytes id_raw = from_hex(entry.at("device_id").get<std::string>());
        if (id_raw.size() != kDeviceIdLen) throw DecodeError("trust root: bad device id");
        DeviceId id{};
        std::copy(id_raw.begin(), id_raw.end(), id.begin());
        Bytes pub = from_hex(entry.at("public_key").get<std::string>());
        root.register_device(id, crypto::Ed25519Key::from_public_raw(pub));
    }
    return root;
}

TrustRoot TrustRoot::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trust root: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void TrustRoot::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write trust root: " + path);
    out << to_json() << "\n";
}

} // namespace secureml::enclave
