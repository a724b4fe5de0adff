#include "secureml/ml/dataset.hpp"

#include <cmath>
#include <cstring>
#include <numbers>

#include "secureml/common/codec.hpp"
#include "secureml/common/fileio.hpp"
#include "secureml/ml/model.hpp"

namespace secureml::ml {

namespace {

constexpr char kMagic[4] = {'S', 'M', 'L', 'D'};
constexpr std::uint8_t kFormatVersion = 1;
constexpr std::uint32_t kMaxSamples = 1u << 24;
constexpr std::uint32_t kMaxDim = 1u << 20;

} // namespace

void DatasetShard::validate() const {
    if (dim == 0 || dim > kMaxDim) throw DatasetFormatError("input dim out of range");
    if (classes < 2) throw DatasetFormatError("needs at least two classes");
    if (labels.empty()) throw DatasetFormatError("empty shard");
    if (labels.size() > kMaxSamples) throw DatasetFormatError("too many samples");
    if (inputs.size() != labels.size() * static_cast<std::size_t>(dim))
        throw DatasetFormatError("inputs do not match sample count x dim");
    for (std::uint32_t y : labels)
        if (y >= classes) throw DatasetFormatError("label out of range");
    for (float v : inputs)
        if (!std::isfinite(v)) throw DatasetFormatError("non-finite input");
}

Bytes DatasetShard::encode() const {
    validate();
    BinaryWriter w;
    w.raw(std::string_view(kMagic, sizeof(kMagic)));
    w.u8(kFormatVersion);
    w.u32(shard_id);
    w.u32(static_cast<std::uint32_t>(labels.size()));
    w.u32(dim);
    w.u32(classes);
    put_floats(w, inputs);
    for (std::uint32_t y : labels) w.u32(y);
    return std::move(w).take();
}

DatasetShard DatasetShard::decode(BytesView raw) {
    BinaryReader r(raw);
    const auto magic = r.fixed<4>();
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw DatasetFormatError("bad magic");
    if (r.u8() != kFormatVersion) throw DatasetFormatError("unsupported format version");

    DatasetShard d;
    d.shard_id = r.u32();
    const std::uint32_t n = r.u32();
    d.dim = r.u32();
    d.classes = r.u32();
    if (n == 0 || n > kMaxSamples) throw DatasetFormatError("sample count out of range");
    if (d.dim == 0 || d.dim > kMaxDim) throw DatasetFormatError("input dim out of range");
    if (r.remaining() != static_cast<std::size_t>(n) * d.dim * 4 + static_cast<std::size_t>(n) * 4)
        throw DatasetFormatError("payload length mismatch");
    d.inputs = get_floats(r, static_cast<std::size_t>(n) * d.dim);
    d.labels.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) d.labels.push_back(r.u32());
    r.expect_done();
    d.validate();
    return d;
}

DatasetShard DatasetShard::slice(std::size_t first, std::size_t count) const {
    if (first + count > size()) throw DatasetFormatError("slice out of range");
    DatasetShard out;
    out.shard_id = shard_id;
    out.dim = dim;
    out.classes = classes;
    out.inputs.assign(inputs.begin() + first * dim, inputs.begin() + (first + count) * dim);
    out.labels.assign(labels.begin() + first, labels.begin() + first + count);
    return out;
}

DatasetShard DatasetShard::concat(const std::vector<DatasetShard>& shards) {
    if (shards.empty()) throw DatasetFormatError("nothing to concatenate");
    DatasetShard out;
    out.shard_id = shards.front().shard_id;
    out.dim = shards.front().dim;
    out.classes = shards.front().classes;
    for (const DatasetShard& s : shards) {
        if (s.dim != out.dim || s.classes != out.classes)
            throw DatasetFormatError("concat shape mismatch");
        out.inputs.insert(out.inputs.end(), s.inputs.begin(), s.inputs.end());
        out.labels.insert(out.labels.end(), s.labels.begin(), s.labels.end());
    }
    return out;
}

DatasetShard load_dataset(const std::filesystem::path& file) {
    return DatasetShard::decode(read_file(file));
}

void save_dataset(const std::filesystem::path& file, const DatasetShard& d) {
    write_file_atomic(file, d.encode());
}

double GaussianSource::uniform() {
    // (0, 1]: never 0, so log() below is safe
    return static_cast<double>((rng_() >> 11) + 1) * 0x1.0p-53;
}

double GaussianSource::gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = mag * std::sin(ang);
    have_spare_ = true;
    return mag * std::cos(ang);
}

DatasetShard make_blobs(std::uint32_t samples, std::uint32_t dim, std::uint32_t classes,
                        std::uint64_t seed, float distance, float spread) {
    DatasetShard d;
    d.dim = dim;
    d.classes = classes;
    GaussianSource noise(seed);
    d.inputs.reserve(static_cast<std::size_t>(samples) * dim);
    d.labels.reserve(samples);
    for (std::uint32_t i = 0; i < samples; ++i) {
        const std::uint32_t y = i % classes;
        d.labels.push_back(y);
        for (std::uint32_t j = 0; j < dim; ++j) {
            const float center = (j == y % dim) ? distance : 0.0f;
            d.inputs.push_back(center +
                               static_cast<float>(noise.gaussian()) * spread);
        }
    }
    d.validate();
    return d;
}

} // namespace secureml::ml
