#include "secureml/cas/policy.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "secureml/cas/errors.hpp"
#include "secureml/common/codec.hpp"
#include "secureml/common/hex.hpp"

namespace secureml::cas {

const char* secret_kind_name(SecretKind k) {
    switch (k) {
    case SecretKind::SymmetricKey256: return "symmetric-key-256";
    case SecretKind::TlsIdentity: return "tls-identity";
    case SecretKind::OpaqueValue: return "opaque-value";
    }
    return "?";
}

const char* value_source_name(ValueSource s) {
    switch (s) {
    case ValueSource::ProvidedByOperator: return "provided-by-operator";
    case ValueSource::GeneratedByCas: return "generated-by-cas";
    }
    return "?";
}

const char* inject_target_name(InjectTarget t) {
    switch (t) {
    case InjectTarget::EnvVar: return "env-var";
    case InjectTarget::VirtualFile: return "virtual-file";
    }
    return "?";
}

void SessionPolicy::validate() const {
    if (name.empty()) throw InvalidPolicy("session name is empty");
    if (allowed_measurements.empty())
        throw InvalidPolicy("no allowed measurements");

    std::set<std::string> declared;
    for (const auto& s : secrets) {
        if (s.name.empty()) throw InvalidPolicy("secret with empty name");
        if (!declared.insert(s.name).second)
            throw InvalidPolicy("duplicate secret '" + s.name + "'");
        if (s.kind == SecretKind::TlsIdentity && s.source != ValueSource::GeneratedByCas)
            throw InvalidPolicy("tls-identity secret '" + s.name +
                                "' must be generated by the service");
        if (s.source == ValueSource::ProvidedByOperator && s.provided_value.empty())
            throw InvalidPolicy("secret '" + s.name + "' is operator-provided but has no value");
        if (s.source == ValueSource::GeneratedByCas && !s.provided_value.empty())
            throw InvalidPolicy("secret '" + s.name + "' is generated but carries a value");
        if (s.kind == SecretKind::SymmetricKey256 &&
            s.source == ValueSource::ProvidedByOperator && s.provided_value.size() != 32)
            throw InvalidPolicy("secret '" + s.name + "' must be 32 bytes");
    }
    for (const auto& inj : injections) {
        if (!declared.count(inj.secret))
            throw InvalidPolicy("injection references undeclared secret '" + inj.secret + "'");
        if (inj.location.empty())
            throw InvalidPolicy("injection of '" + inj.secret + "' has no target location");
    }
}

Bytes SessionPolicy::canonical_encoding() const {
    std::vector<enclave::Measurement> sorted = allowed_measurements;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    BinaryWriter w;
    w.str(name);
    w.u32(static_cast<std::uint32_t>(sorted.size()));
    for (const auto& m : sorted) w.raw(BytesView(m.digest.data(), m.digest.size()));
    w.u32(static_cast<std::uint32_t>(secrets.size()));
    for (const auto& s : secrets) {
        w.str(s.name);
        w.u8(static_cast<std::uint8_t>(s.kind));
        w.u8(static_cast<std::uint8_t>(s.source));
    }
    w.u32(static_cast<std::uint32_t>(injections.size()));
    for (const auto& inj : injections) {
        w.str(inj.secret);
        w.u8(static_cast<std::uint8_t>(inj.target));
        w.str(inj.location);
    }
    w.u32(static_cast<std::uint32_t>(peers.size()));
    for (const auto& p : peers) w.str(p);
    return std::move(w).take();
}

SessionId SessionPolicy::id() const {
    return crypto::sha256(canonical_encoding());
}

SessionPolicy SessionPolicy::from_json(const std::string& json) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidPolicy(std::string("not valid json: ") + e.what());
    }

    SessionPolicy p;
    try {
        p.name = doc.at("name").get<std::string>();
        for (const auto& hexdigest : doc.at("allowed_measurements"))
            p.allowed_measurements.push_back(
                enclave::Measurement::from_hex(hexdigest.get<std::string>()));
        for (const auto& s : doc.value("secrets", nlohmann::json::array())) {
            SecretSpec spec;
            spec.name = s.at("name").get<std::string>();
            const std::string kind = s.at("kind").get<std::string>();
            if (kind == "symmetric-key-256") spec.kind = SecretKind::SymmetricKey256;
            else if (kind == "tls-identity") spec.kind = SecretKind::TlsIdentity;
            else if (kind == "opaque-value") spec.kind = SecretKind::OpaqueValue;
            else throw InvalidPolicy("unknown secret kind '" + kind + "'");
            const std::string source = s.value("source", "generated-by-cas");
            if (source == "provided-by-operator") spec.source = ValueSource::ProvidedByOperator;
            else if (source == "generated-by-cas") spec.source = ValueSource::GeneratedByCas;
            else throw InvalidPolicy("unknown value source '" + source + "'");
            if (s.contains("value")) spec.provided_value = from_hex(s["value"].get<std::string>());
            p.secrets.push_back(std::move(spec));
        }
        for (const auto& inj : doc.value("injections", nlohmann::json::array())) {
            Injection injection;
            injection.secret = inj.at("secret").get<std::string>();
            if (inj.contains("env")) {
                injection.target = InjectTarget::EnvVar;
                injection.location = inj["env"].get<std::string>();
            } else if (inj.contains("file")) {
                injection.target = InjectTarget::VirtualFile;
                injection.location = inj["file"].get<std::string>();
            } else {
                throw InvalidPolicy("injection needs an 'env' or 'file' target");
            }
            p.injections.push_back(std::move(injection));
        }
        for (const auto& peer : doc.value("peers", nlohmann::json::array()))
            p.peers.push_back(peer.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidPolicy(std::string("policy json: ") + e.what());
    } catch (const DecodeError& e) {
        throw InvalidPolicy(e.what());
    }

    p.validate();
    return p;
}

SessionPolicy SessionPolicy::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open policy file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

} // namespace secureml::cas
