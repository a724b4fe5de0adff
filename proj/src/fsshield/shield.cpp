#include "secureml/fsshield/shield.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>

#include "secureml/common/codec.hpp"
#include "secureml/common/fileio.hpp"
#include "secureml/fsshield/nonce_registry.hpp"

namespace secureml::fsshield {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'S', 'M', 'F', 'M'};
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kMaxManifestBody = 1u << 26;

fs::path manifest_path(const fs::path& root, const std::string& path) {
    return root / (path + ".manifest");
}

fs::path chunk_dir(const fs::path& root, const std::string& path) {
    return root / (path + ".chunks");
}

fs::path chunk_path(const fs::path& root, const std::string& path, std::uint32_t index) {
    char name[16];
    std::snprintf(name, sizeof(name), "%08u", index);
    return chunk_dir(root, path) / name;
}

// Every chunk is bound to its file, position and the write's chunk size, so
// chunks cannot be swapped between files or reordered within one.
Bytes chunk_aad(const std::string& path, std::uint32_t index, std::uint32_t chunk_size) {
    BinaryWriter w;
    w.str(path);
    w.u32(index);
    w.u32(chunk_size);
    return std::move(w).take();
}

Bytes manifest_aad(const std::string& path, Mode mode) {
    BinaryWriter w;
    w.raw(BytesView(reinterpret_cast<const std::uint8_t*>(kMagic), sizeof(kMagic)));
    w.u8(kVersion);
    w.u8(static_cast<std::uint8_t>(mode));
    w.str(path);
    return std::move(w).take();
}

std::uint32_t chunk_count_for(std::uint64_t total_len, std::uint32_t chunk_size) {
    if (total_len == 0) return 1; // empty files still get one (empty) chunk
    return static_cast<std::uint32_t>((total_len + chunk_size - 1) / chunk_size);
}

} // namespace

void sanity_check(const ChunkManifest& m) {
    auto fail = [](const std::string& what) { throw IntegrityError(IntegrityError::Where::Bounds, what); };

    if (m.mode != Mode::AuthOnly && m.mode != Mode::EncryptAuth)
        fail("manifest mode is not a shielded mode");
    if (m.chunk_size == 0 || m.chunk_size > kMaxChunkSize)
        fail("chunk size " + std::to_string(m.chunk_size) + " out of range");
    if (m.total_len > kMaxFileLen)
        fail("total length " + std::to_string(m.total_len) + " out of range");

    const std::uint32_t expected = chunk_count_for(m.total_len, m.chunk_size);
    if (m.chunks.size() != expected)
        fail("manifest lists " + std::to_string(m.chunks.size()) + " chunks, geometry implies " +
             std::to_string(expected));

    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < m.chunks.size(); ++i) {
        const std::uint32_t len = m.chunks[i].len;
        if (len > m.chunk_size)
            fail("chunk " + std::to_string(i) + " length exceeds chunk size");
        const bool last = i + 1 == m.chunks.size();
        if (!last && len != m.chunk_size)
            fail("chunk " + std::to_string(i) + " is short but not last");
        sum += len;
    }
    if (sum != m.total_len)
        fail("chunk lengths sum to " + std::to_string(sum) + ", manifest claims " +
             std::to_string(m.total_len));
}

Bytes encode_manifest(const ChunkManifest& m, const std::string& path, const FileKey& key) {
    BinaryWriter body;
    body.u32(m.chunk_size);
    body.u64(m.total_len);
    body.u8(m.freshness ? 1 : 0);
    if (m.freshness) {
        body.str(m.freshness->scope);
        body.u64(m.freshness->value);
    }
    body.u32(static_cast<std::uint32_t>(m.chunks.size()));
    for (const auto& c : m.chunks) {
        body.u32(c.len);
        body.raw(BytesView(c.nonce.data(), c.nonce.size()));
        body.raw(BytesView(c.tag.data(), c.tag.size()));
    }

    const crypto::Nonce nonce = fresh_nonce(key);
    const crypto::Sealed sealed =
        crypto::aead_encrypt(key, nonce, std::move(body).take(), manifest_aad(path, m.mode));

    BinaryWriter out;
    out.raw(BytesView(reinterpret_cast<const std::uint8_t*>(kMagic), sizeof(kMagic)));
    out.u8(kVersion);
    out.u8(static_cast<std::uint8_t>(m.mode));
    out.raw(BytesView(nonce.data(), nonce.size()));
    out.raw(BytesView(sealed.tag.data(), sealed.tag.size()));
    out.blob(sealed.ciphertext);
    return std::move(out).take();
}

ChunkManifest decode_manifest(BytesView raw, const std::string& path, const FileKey& key) {
    auto fail = [](const std::string& what) {
        throw IntegrityError(IntegrityError::Where::Manifest, what);
    };

    ChunkManifest m;
    Bytes body_ct;
    crypto::Nonce nonce{};
    crypto::Tag tag{};
    try {
        BinaryReader r(raw);
        const auto magic = r.fixed<4>();
        if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0)
            fail("bad manifest magic");
        if (r.u8() != kVersion) fail("unsupported manifest version");
        m.mode = static_cast<Mode>(r.u8());
        nonce = r.fixed<crypto::kNonceLen>();
        tag = r.fixed<crypto::kTagLen>();
        body_ct = r.blob(kMaxManifestBody);
        r.expect_done();
    } catch (const DecodeError& e) {
        fail(e.what());
    }
    if (m.mode != Mode::AuthOnly && m.mode != Mode::EncryptAuth)
        fail("manifest mode is not a shielded mode");

    Bytes body;
    try {
        body = crypto::aead_decrypt(key, nonce, body_ct, tag, manifest_aad(path, m.mode));
    } catch (const crypto::AeadTagMismatch&) {
        fail("manifest authentication failed");
    }

    try {
        BinaryReader r(body);
        m.chunk_size = r.u32();
        m.total_len = r.u64();
        if (r.u8() != 0) {
            FreshnessStamp f;
            f.scope = r.str();
            f.value = r.u64();
            m.freshness = std::move(f);
        }
        const std::uint32_t count = r.u32();
        // Bound the reservation by what the encoded bytes can actually hold
        // before trusting the count.
        constexpr std::size_t kEntryLen = 4 + crypto::kNonceLen + crypto::kTagLen;
        if (count > r.remaining() / kEntryLen)
            fail("chunk count exceeds encoded entries");
        m.chunks.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            ChunkEntry c;
            c.len = r.u32();
            c.nonce = r.fixed<crypto::kNonceLen>();
            c.tag = r.fixed<crypto::kTagLen>();
            m.chunks.push_back(c);
        }
        r.expect_done();
    } catch (const DecodeError& e) {
        fail(e.what());
    }

    sanity_check(m);
    return m;
}

ChunkManifest shield_write(const fs::path& root, const std::string& path, BytesView data,
                           const FileKey& key, const WriteOptions& opts) {
    if (opts.mode == Mode::Passthrough)
        throw Error("shield_write called for a passthrough path");
    if (opts.chunk_size == 0 || opts.chunk_size > kMaxChunkSize)
        throw Error("chunk size out of range");
    if (data.size() > kMaxFileLen)
        throw Error("file too large");

    const fs::path dir = chunk_dir(root, path);
    std::error_code ec;
    fs::remove_all(dir, ec); // drop stale chunks from a previous, larger write
    fs::create_directories(dir);

    ChunkManifest m;
    m.mode = opts.mode;
    m.chunk_size = opts.chunk_size;
    m.total_len = data.size();

    const std::uint32_t count = chunk_count_for(m.total_len, m.chunk_size);
    m.chunks.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint64_t off = std::uint64_t(i) * m.chunk_size;
        const std::uint32_t len =
            static_cast<std::uint32_t>(std::min<std::uint64_t>(m.chunk_size, data.size() - off));
        const BytesView plain = data.subspan(off, len);
        const Bytes aad = chunk_aad(path, i, m.chunk_size);

        ChunkEntry& entry = m.chunks[i];
        entry.len = len;
        entry.nonce = fresh_nonce(key);
        if (m.mode == Mode::EncryptAuth) {
            crypto::Sealed sealed = crypto::aead_encrypt(key, entry.nonce, plain, aad);
            entry.tag = sealed.tag;
            write_file(chunk_path(root, path, i), sealed.ciphertext);
        } else {
            entry.tag = crypto::aead_mac(key, entry.nonce, plain, aad);
            write_file(chunk_path(root, path, i), plain);
        }
    }

    if (opts.freshness)
        m.freshness = FreshnessStamp{path, opts.freshness->advance(path)};

    write_file_atomic(manifest_path(root, path), encode_manifest(m, path, key));
    return m;
}

Bytes shield_read(const fs::path& root, const std::string& path, const FileKey& key,
                  CounterClient* freshness) {
    const ChunkManifest m = decode_manifest(read_file(manifest_path(root, path)), path, key);

    if (freshness) {
        const std::uint64_t stored =
            freshness->read(m.freshness ? m.freshness->scope : path);
        const std::uint64_t embedded = m.freshness ? m.freshness->value : 0;
        if (embedded != stored) throw FreshnessError(embedded, stored);
    }

    Bytes out;
    out.reserve(m.total_len);
    for (std::uint32_t i = 0; i < m.chunks.size(); ++i) {
        const ChunkEntry& entry = m.chunks[i];
        const Bytes stored = read_file(chunk_path(root, path, i));
        if (stored.size() != entry.len)
            throw IntegrityError(IntegrityError::Where::Chunk,
                                 "chunk " + std::to_string(i) + " has " +
                                     std::to_string(stored.size()) + " bytes on disk, manifest says " +
                                     std::to_string(entry.len),
                                 i);
        const Bytes aad = chunk_aad(path, i, m.chunk_size);
        if (m.mode == Mode::EncryptAuth) {
            try {
                Bytes plain = crypto::aead_decrypt(key, entry.nonce, stored, entry.tag, aad);
                out.insert(out.end(), plain.begin(), plain.end());
            } catch (const crypto::AeadTagMismatch&) {
                throw IntegrityError(IntegrityError::Where::Chunk,
                                     "chunk " + std::to_string(i) + " failed authentication", i);
            }
        } else {
            if (!crypto::aead_mac_verify(key, entry.nonce, stored, entry.tag, aad))
                throw IntegrityError(IntegrityError::Where::Chunk,
                                     "chunk " + std::to_string(i) + " failed authentication", i);
            out.insert(out.end(), stored.begin(), stored.end());
        }
    }
    return out;
}

void shield_verify(const fs::path& root, const std::string& path, const FileKey& key,
                   CounterClient* freshness) {
    (void)shield_read(root, path, key, freshness);
}

Shield::Shield(fs::path root, PathPolicy policy, std::map<std::string, FileKey> keys,
               CounterClient* freshness)
    : root_(std::move(root)), policy_(std::move(policy)), keys_(std::move(keys)),
      freshness_(freshness) {}

const FileKey& Shield::key_for(const Resolution& r, const std::string& path) const {
    auto it = keys_.find(r.key_name);
    if (it == keys_.end())
        throw Error("no key named '" + r.key_name + "' for path " + path);
    return it->second;
}

void Shield::write(const std::string& path, BytesView data, std::uint32_t chunk_size) {
    const Resolution r = policy_.resolve(path);
    if (r.mode == Mode::Passthrough) {
        const fs::path p = root_ / path;
        fs::create_directories(p.parent_path());
        write_file(p, data);
        return;
    }
    fs::create_directories((root_ / path).parent_path());
    WriteOptions opts;
    opts.mode = r.mode;
    opts.chunk_size = chunk_size;
    opts.freshness = freshness_;
    shield_write(root_, path, data, key_for(r, path), opts);
}

Bytes Shield::read(const std::string& path) {
    const Resolution r = policy_.resolve(path);
    if (r.mode == Mode::Passthrough)
        return read_file(root_ / path);
    return shield_read(root_, path, key_for(r, path), freshness_);
}

void Shield::verify(const std::string& path) {
    const Resolution r = policy_.resolve(path);
    if (r.mode == Mode::Passthrough) {
        if (!fs::exists(root_ / path)) throw IoError("no such file " + path);
        return;
    }
    shield_verify(root_, path, key_for(r, path), freshness_);
}

} // namespace secureml::fsshield
