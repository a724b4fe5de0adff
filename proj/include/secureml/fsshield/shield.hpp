#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "secureml/common/bytes.hpp"
#include "secureml/common/error.hpp"
#include "secureml/crypto/aead.hpp"
#include "secureml/fsshield/freshness.hpp"
#include "secureml/fsshield/path_policy.hpp"

namespace secureml::fsshield {

using FileKey = crypto::AeadKey;

inline constexpr std::uint32_t kDefaultChunkSize = 64 * 1024;
inline constexpr std::uint32_t kMaxChunkSize = 1u << 30;
inline constexpr std::uint64_t kMaxFileLen = 1ull << 40;

// Authentication failure, with enough location detail to say *what* was bad:
// the manifest itself, a specific chunk, or manifest fields that fail the
// structural bounds checks run before any buffer is sized from them.
class IntegrityError : public Error {
public:
    enum class Where { Manifest, Chunk, Bounds };

    IntegrityError(Where where, const std::string& what,
                   std::optional<std::uint32_t> chunk_index = std::nullopt)
        : Error("integrity: " + what), where_(where), chunk_index_(chunk_index) {}

    Where where() const { return where_; }
    std::optional<std::uint32_t> chunk_index() const { return chunk_index_; }

private:
    Where where_;
    std::optional<std::uint32_t> chunk_index_;
};

// The manifest authenticated correctly but its embedded counter does not
// match the stored one: this is an old version being replayed.
class FreshnessError : public Error {
public:
    FreshnessError(std::uint64_t manifest_value, std::uint64_t stored_value)
        : Error("freshness: manifest carries counter " + std::to_string(manifest_value) +
                " but stored counter is " + std::to_string(stored_value)),
          manifest_value_(manifest_value), stored_value_(stored_value) {}

    std::uint64_t manifest_value() const { return manifest_value_; }
    std::uint64_t stored_value() const { return stored_value_; }

private:
    std::uint64_t manifest_value_;
    std::uint64_t stored_value_;
};

struct ChunkEntry {
    std::uint32_t len = 0; // plaintext length of this chunk
    crypto::Nonce nonce{};
    crypto::Tag tag{};
};

struct FreshnessStamp {
    std::string scope;
    std::uint64_t value = 0;
};

struct ChunkManifest {
    Mode mode = Mode::EncryptAuth;
    std::uint32_t chunk_size = kDefaultChunkSize;
    std::uint64_t total_len = 0;
    std::optional<FreshnessStamp> freshness;
    std::vector<ChunkEntry> chunks;
};

// Structural consistency of a decoded manifest: chunk sizes, counts and
// lengths must all agree before anything is allocated from them. Throws
// IntegrityError(Bounds) otherwise.
void sanity_check(const ChunkManifest& m);

// Manifest file image: fixed header in the clear, body sealed under the file
// key with the path bound in as AAD so a manifest cannot be transplanted.
Bytes encode_manifest(const ChunkManifest& m, const std::string& path, const FileKey& key);
ChunkManifest decode_manifest(BytesView raw, const std::string& path, const FileKey& key);

struct WriteOptions {
    Mode mode = Mode::EncryptAuth;
    std::uint32_t chunk_size = kDefaultChunkSize;
    CounterClient* freshness = nullptr;
};

// Splits `data` into chunks under `root/path.chunks/`, writes the sealed
// manifest to `root/path.manifest`, and (if a counter client is given)
// advances the per-path counter and embeds the new value. The manifest
// rename is the commit point of the write.
ChunkManifest shield_write(const std::filesystem::path& root, const std::string& path,
                           BytesView data, const FileKey& key, const WriteOptions& opts = {});

// Reads and authenticates every chunk listed by the manifest; checks the
// embedded counter against the client if one is given.
Bytes shield_read(const std::filesystem::path& root, const std::string& path, const FileKey& key,
                  CounterClient* freshness = nullptr);

// Authenticates manifest and chunks without returning the data.
void shield_verify(const std::filesystem::path& root, const std::string& path, const FileKey& key,
                   CounterClient* freshness = nullptr);

// Policy-driven view over a directory: paths resolve through the prefix
// rules, non-passthrough entries use the named key from `keys`.
class Shield {
public:
    Shield(std::filesystem::path root, PathPolicy policy, std::map<std::string, FileKey> keys,
           CounterClient* freshness = nullptr);

    void write(const std::string& path, BytesView data, std::uint32_t chunk_size = kDefaultChunkSize);
    Bytes read(const std::string& path);
    void verify(const std::string& path);
    Resolution resolve(const std::string& path) const { return policy_.resolve(path); }

    const std::filesystem::path& root() const { return root_; }

private:
    const FileKey& key_for(const Resolution& r, const std::string& path) const;

    std::filesystem::path root_;
    PathPolicy policy_;
    std::map<std::string, FileKey> keys_;
    CounterClient* freshness_;
};

} // namespace secureml::fsshield
