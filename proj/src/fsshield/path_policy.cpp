#include "secureml/fsshield/path_policy.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace secureml::fsshield {

const char* mode_name(Mode m) {
    switch (m) {
    case Mode::Passthrough: return "passthrough";
    case Mode::AuthOnly: return "auth-only";
    case Mode::EncryptAuth: return "encrypt-auth";
    }
    return "?";
}

static Mode mode_from_name(const std::string& name) {
    if (name == "passthrough") return Mode::Passthrough;
    if (name == "auth-only") return Mode::AuthOnly;
    if (name == "encrypt-auth") return Mode::EncryptAuth;
    throw DecodeError("unknown shield mode '" + name + "'");
}

PathPolicy::PathPolicy(std::vector<PolicyEntry> entries) : entries_(std::move(entries)) {
    for (const auto& e : entries_) {
        if (e.prefix.empty())
            throw Error("policy entry with empty prefix");
        if (e.mode != Mode::Passthrough && e.key_name.empty())
            throw Error("policy entry '" + e.prefix + "' needs a key name");
    }
}

Resolution PathPolicy::resolve(const std::string& path) const {
    const PolicyEntry* best = nullptr;
    for (const auto& e : entries_) {
        if (path.compare(0, e.prefix.size(), e.prefix) != 0)
            continue;
        if (!best || e.prefix.size() > best->prefix.size())
            best = &e;
    }
    if (!best)
        return Resolution{};
    return Resolution{best->mode, best->key_name};
}

PathPolicy PathPolicy::from_json(const std::string& json) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("policy json: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array())
        throw DecodeError("policy json: expected object with 'rules' array");

    std::vector<PolicyEntry> entries;
    for (const auto& rule : doc["rules"]) {
        PolicyEntry e;
        e.prefix = rule.at("prefix").get<std::string>();
        e.mode = mode_from_name(rule.at("mode").get<std::string>());
        if (rule.contains("key"))
            e.key_name = rule["key"].get<std::string>();
        entries.push_back(std::move(e));
    }
    return PathPolicy(std::move(entries));
}

PathPolicy PathPolicy::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open policy file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

} // namespace secureml::fsshield
