#include "secureml/ml/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <random>

#include "secureml/common/fileio.hpp"

namespace secureml::ml {

namespace {

constexpr char kMagic[4] = {'S', 'M', 'L', 'M'};
constexpr std::uint8_t kFormatVersion = 1;
constexpr std::uint32_t kMaxDim = 1u << 20;
constexpr std::size_t kMaxDims = 64;

} // namespace

void put_floats(BinaryWriter& w, std::span<const float> v) {
    for (float f : v) {
        const auto bits = std::bit_cast<std::uint32_t>(f);
        w.u8(static_cast<std::uint8_t>(bits));
        w.u8(static_cast<std::uint8_t>(bits >> 8));
        w.u8(static_cast<std::uint8_t>(bits >> 16));
        w.u8(static_cast<std::uint8_t>(bits >> 24));
    }
}

std::vector<float> get_floats(BinaryReader& r, std::size_t count) {
    std::vector<float> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t bits = r.u8();
        bits |= static_cast<std::uint32_t>(r.u8()) << 8;
        bits |= static_cast<std::uint32_t>(r.u8()) << 16;
        bits |= static_cast<std::uint32_t>(r.u8()) << 24;
        out.push_back(std::bit_cast<float>(bits));
    }
    return out;
}

std::size_t ModelArtifact::parameter_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers) n += l.W.size() + l.b.size();
    return n;
}

void ModelArtifact::validate() const {
    if (layer_dims.size() < 2) throw ModelFormatError("needs at least input and output dims");
    if (layer_dims.size() > kMaxDims) throw ModelFormatError("too many layers");
    for (std::uint32_t d : layer_dims)
        if (d == 0 || d > kMaxDim) throw ModelFormatError("layer dim out of range");
    if (layers.size() != layer_dims.size() - 1)
        throw ModelFormatError("layer count does not match dims");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::size_t in = layer_dims[l];
        const std::size_t out = layer_dims[l + 1];
        if (layers[l].W.size() != in * out)
            throw ModelFormatError("weight matrix " + std::to_string(l) + " has wrong shape");
        if (layers[l].b.size() != out)
            throw ModelFormatError("bias vector " + std::to_string(l) + " has wrong shape");
        for (float v : layers[l].W)
            if (!std::isfinite(v)) throw ModelFormatError("non-finite weight");
        for (float v : layers[l].b)
            if (!std::isfinite(v)) throw ModelFormatError("non-finite bias");
    }
}

Bytes ModelArtifact::encode() const {
    validate();
    BinaryWriter w;
    w.raw(std::string_view(kMagic, sizeof(kMagic)));
    w.u8(kFormatVersion);
    w.u64(version);
    w.u32(static_cast<std::uint32_t>(layer_dims.size()));
    for (std::uint32_t d : layer_dims) w.u32(d);
    for (const Layer& l : layers) {
        put_floats(w, l.W);
        put_floats(w, l.b);
    }
    return std::move(w).take();
}

ModelArtifact ModelArtifact::decode(BytesView raw) {
    BinaryReader r(raw);
    const auto magic = r.fixed<4>();
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw ModelFormatError("bad magic");
    if (r.u8() != kFormatVersion) throw ModelFormatError("unsupported format version");

    ModelArtifact m;
    m.version = r.u64();
    const std::uint32_t ndims = r.u32();
    if (ndims < 2 || ndims > kMaxDims) throw ModelFormatError("dim count out of range");
    m.layer_dims.reserve(ndims);
    for (std::uint32_t i = 0; i < ndims; ++i) {
        const std::uint32_t d = r.u32();
        if (d == 0 || d > kMaxDim) throw ModelFormatError("layer dim out of range");
        m.layer_dims.push_back(d);
    }
    // Geometry is now known and bounded; check the remaining byte count
    // before allocating anything from it.
    std::size_t floats = 0;
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l)
        floats += static_cast<std::size_t>(m.layer_dims[l]) * m.layer_dims[l + 1] +
                  m.layer_dims[l + 1];
    if (r.remaining() != floats * 4) throw ModelFormatError("payload length mismatch");

    m.layers.resize(m.layer_dims.size() - 1);
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
        const std::size_t in = m.layer_dims[l];
        const std::size_t out = m.layer_dims[l + 1];
        m.layers[l].W = get_floats(r, in * out);
        m.layers[l].b = get_floats(r, out);
    }
    r.expect_done();
    m.validate();
    return m;
}

ModelArtifact ModelArtifact::zeros(std::vector<std::uint32_t> dims) {
    ModelArtifact m;
    m.layer_dims = std::move(dims);
    m.layers.resize(m.layer_dims.size() < 2 ? 0 : m.layer_dims.size() - 1);
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
        m.layers[l].W.assign(static_cast<std::size_t>(m.layer_dims[l]) * m.layer_dims[l + 1],
                             0.0f);
        m.layers[l].b.assign(m.layer_dims[l + 1], 0.0f);
    }
    m.validate();
    return m;
}

ModelArtifact ModelArtifact::seeded(std::vector<std::uint32_t> dims, std::uint64_t seed,
                                    float scale) {
    ModelArtifact m = zeros(std::move(dims));
    std::mt19937_64 rng(seed);
    auto next = [&] {
        // uniform in (-scale, scale) from the raw engine output
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53; // [0, 1)
        return static_cast<float>((2.0 * u - 1.0) * scale);
    };
    for (Layer& l : m.layers) {
        for (float& v : l.W) v = next();
        for (float& v : l.b) v = next();
    }
    return m;
}

ModelArtifact load_model(const std::filesystem::path& file) {
    return ModelArtifact::decode(read_file(file));
}

void save_model(const std::filesystem::path& file, const ModelArtifact& m) {
    write_file_atomic(file, m.encode());
}

ModelArtifact load_model_shielded(const std::filesystem::path& root, const std::string& path,
                                  const fsshield::FileKey& key,
                                  fsshield::CounterClient* freshness) {
    return ModelArtifact::decode(fsshield::shield_read(root, path, key, freshness));
}

void save_model_shielded(const std::filesystem::path& root, const std::string& path,
                         const ModelArtifact& m, const fsshield::FileKey& key,
                         const fsshield::WriteOptions& opts) {
    fsshield::shield_write(root, path, m.encode(), key, opts);
}

} // namespace secureml::ml
