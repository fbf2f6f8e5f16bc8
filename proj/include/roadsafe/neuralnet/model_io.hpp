#pragma once

#include "roadsafe/neuralnet/model.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace roadsafe::nn {

/// Binary model file, all integers and floats little-endian:
///
///   magic "RSCNNMDL" | u32 version | u32 input rank | u32 dims...
///   u32 layer count | per layer: u8 kind + kind-specific fields
///   u32 tensor count | per tensor: u32 rank, u32 dims..., f64 data (row-major)
inline constexpr std::uint32_t kModelFormatVersion = 1;

[[nodiscard]] std::vector<std::uint8_t> serialize_model(const Model& model);
/// Throws StorageError on a malformed or truncated image.
[[nodiscard]] Model deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const Model& model, const std::filesystem::path& path);
[[nodiscard]] Model load_model(const std::filesystem::path& path);

} // namespace roadsafe::nn
