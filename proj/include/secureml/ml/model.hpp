#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "secureml/common/bytes.hpp"
#include "secureml/common/codec.hpp"
#include "secureml/common/error.hpp"
#include "secureml/fsshield/shield.hpp"

namespace secureml::ml {

class ShapeMismatch : public Error {
public:
    explicit ShapeMismatch(const std::string& what) : Error("shape mismatch: " + what) {}
};

class ModelFormatError : public Error {
public:
    explicit ModelFormatError(const std::string& what) : Error("model format: " + what) {}
};

// One dense layer mapping dims[l] inputs to dims[l+1] outputs.
// W is row-major with shape [out][in]: out_j = b[j] + sum_i W[j*in+i] * x[i].
struct Layer {
    std::vector<float> W;
    std::vector<float> b;
};

// File image: "SMLM" magic, u8 format version, u64 model version, u32 dim
// count, big-endian u32 dims, then per layer the W floats followed by the b
// floats as little-endian IEEE-754 32-bit values in row-major order.
struct ModelArtifact {
    std::vector<std::uint32_t> layer_dims; // e.g. {784, 64, 10}
    std::vector<Layer> layers;             // layer_dims.size() - 1 entries
    std::uint64_t version = 0;

    std::uint32_t input_dim() const { return layer_dims.front(); }
    std::uint32_t output_dim() const { return layer_dims.back(); }
    std::size_t parameter_count() const;

    // Structural invariants: >= 2 dims, all positive, layer shapes consistent
    // with layer_dims, every value finite. Throws ModelFormatError.
    void validate() const;

    Bytes encode() const;
    static ModelArtifact decode(BytesView raw);

    static ModelArtifact zeros(std::vector<std::uint32_t> dims);
    // Deterministic small-uniform initialization in (-scale, scale); the
    // generator is hand-rolled so the bytes do not depend on the C++ library.
    static ModelArtifact seeded(std::vector<std::uint32_t> dims, std::uint64_t seed,
                                float scale = 0.1f);
};

// Little-endian f32 helpers shared by the model format and training wire
// messages (host-endianness independent).
void put_floats(BinaryWriter& w, std::span<const float> v);
std::vector<float> get_floats(BinaryReader& r, std::size_t count);

ModelArtifact load_model(const std::filesystem::path& file);
void save_model(const std::filesystem::path& file, const ModelArtifact& m);

// Through the file shield: the model was written with shield_write under
// `root`; integrity/freshness failures propagate from the shield.
ModelArtifact load_model_shielded(const std::filesystem::path& root, const std::string& path,
                                  const fsshield::FileKey& key,
                                  fsshield::CounterClient* freshness = nullptr);
void save_model_shielded(const std::filesystem::path& root, const std::string& path,
                         const ModelArtifact& m, const fsshield::FileKey& key,
                         const fsshield::WriteOptions& opts = {});

} // namespace secureml::ml
