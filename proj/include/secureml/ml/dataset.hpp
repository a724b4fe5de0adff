#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "secureml/common/bytes.hpp"
#include "secureml/common/error.hpp"

namespace secureml::ml {

class DatasetFormatError : public Error {
public:
    explicit DatasetFormatError(const std::string& what) : Error("dataset format: " + what) {}
};

// File image: "SMLD" magic, u8 format version, u32 shard id, u32 sample
// count, u32 input dim, u32 class count (big-endian), then the inputs as
// little-endian f32 row-major and the labels as big-endian u32.
struct DatasetShard {
    std::uint32_t shard_id = 0;
    std::uint32_t dim = 0;
    std::uint32_t classes = 0;
    std::vector<float> inputs;         // size() x dim, row-major
    std::vector<std::uint32_t> labels; // in [0, classes)

    std::size_t size() const { return labels.size(); }
    const float* row(std::size_t i) const { return inputs.data() + i * dim; }

    void validate() const; // throws DatasetFormatError
    Bytes encode() const;
    static DatasetShard decode(BytesView raw);

    // Samples [first, first+count) as a shard of their own.
    DatasetShard slice(std::size_t first, std::size_t count) const;
    // Concatenation in argument order; shards must agree on dim/classes.
    static DatasetShard concat(const std::vector<DatasetShard>& shards);
};

DatasetShard load_dataset(const std::filesystem::path& file);
void save_dataset(const std::filesystem::path& file, const DatasetShard& d);

// Deterministic Gaussian generator: hand-rolled Box-Muller over the raw
// mt19937_64 stream, so identical seeds give identical bytes on every
// platform and standard library.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}
    double uniform();  // (0, 1]
    double gaussian(); // standard normal

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Linearly separable blobs: class c is centered at `distance` along input
// coordinate (c mod dim), jittered by N(0, spread^2) noise per coordinate.
// Labels cycle 0,1,...,classes-1 so every prefix is nearly class-balanced.
DatasetShard make_blobs(std::uint32_t samples, std::uint32_t dim, std::uint32_t classes,
                        std::uint64_t seed, float distance = 3.0f, float spread = 0.5f);

} // namespace secureml::ml
