#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpsr/tensor.hpp"

namespace lpsr::srnet {

struct WeightTensor {
    std::vector<std::int64_t> dims;
    std::vector<float> data;

    std::int64_t numel() const noexcept;
    friend bool operator==(const WeightTensor&, const WeightTensor&) = default;
};

/// Named parameter tensors plus the metadata carried in an SRWT1 manifest.
/// Immutable once loaded; safe to share between threads.
class WeightStore {
public:
    std::string arch_tag;
    nlohmann::json config = nlohmann::json::object();
    std::string provenance;

    /// Throws InvalidArgument on duplicate names or data/dims mismatch.
    void add(const std::string& name, WeightTensor t);
    bool contains(const std::string& name) const { return tensors_.contains(name); }
    const WeightTensor* find(const std::string& name) const;
    /// Throws WeightSchemaError naming the layer when absent.
    const WeightTensor& get(const std::string& name) const;
    const std::map<std::string, WeightTensor>& tensors() const noexcept { return tensors_; }
    WeightTensor& mutable_tensor(const std::string& name);

    friend bool operator==(const WeightStore&, const WeightStore&) = default;

private:
    std::map<std::string, WeightTensor> tensors_;
};

/// SRWT1 container:
///   bytes 0-4  "SRWT1"
///   byte 5     version (1)
///   bytes 6-9  u32 LE manifest length L
///   L bytes    UTF-8 JSON {arch_tag, config, provenance, tensors: [{name, dims, offset, len}]}
///   blobs      little-endian f32; offsets relative to the blob section; len in bytes
/// The file ends exactly at the last blob. Tensors are written name-sorted.
std::vector<std::uint8_t> serialize_weights(const WeightStore& store);

/// Parses and validates container structure; throws FormatError with the byte offset.
/// Stores tagged rrdb_gen / unet_disc / attn_unet_disc are also checked against the
/// architecture their config implies (WeightSchemaError).
WeightStore parse_weights(std::span<const std::uint8_t> bytes);

WeightStore load_weights(const std::filesystem::path& path);
void save_weights(const WeightStore& store, const std::filesystem::path& path);

/// Parity vector: named NCHW tensors (at least "input" and "output") plus
/// metadata, stored as an SRWT1 container tagged "test_vector" whose config
/// holds {"arch": ..., "meta": ...}.
struct TestVector {
    std::string arch;  // architecture tag of the weights the vector belongs to
    nlohmann::json meta = nlohmann::json::object();
    std::map<std::string, Tensor4> tensors;

    /// Throws InvalidArgument when the tensor is absent.
    const Tensor4& tensor(const std::string& name) const;
};

void save_test_vector(const TestVector& vec, const std::filesystem::path& path);
/// Throws FormatError for a malformed container and InvalidArgument for a
/// container that is not a test vector.
TestVector load_test_vector(const std::filesystem::path& path);

/// Checks that the vector's input fits the weights: matching arch tag, batch 1,
/// channel count equal to the first layer's input channels; discriminator
/// inputs also need spatial dims divisible by 8. Throws InvalidArgument.
void validate_test_vector(const TestVector& vec, const WeightStore& store);

}  // namespace lpsr::srnet
