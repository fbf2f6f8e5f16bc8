#pragma once

#include "roadsafe/neuralnet/evaluate.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace roadsafe::cli {

/// Balanced synthetic frames: per_scenario frames for each scenario, labels alternating.
[[nodiscard]] nn::ScenarioGroups synth_dataset(std::size_t per_scenario, int side, std::uint64_t seed);

[[nodiscard]] std::vector<nn::LabeledFrame> pooled(const nn::ScenarioGroups& groups);

/// "<scenario>.frames"
[[nodiscard]] std::string dataset_filename(sim::Scenario s);

/// File layout: u32 count, u32 side, then per frame side*side pixel bytes
/// (value*255 rounded) followed by one label byte. Little-endian.
void write_frames(const std::filesystem::path& file, std::span<const nn::LabeledFrame> frames);
/// Throws ValidationError on a malformed file, Error when it cannot be read.
[[nodiscard]] std::vector<nn::LabeledFrame> read_frames(const std::filesystem::path& file, sim::Scenario scenario);

void write_dataset(const std::filesystem::path& dir, const nn::ScenarioGroups& groups);
/// Loads every "<scenario>.frames" present. Throws ValidationError when the
/// directory holds none or a present file is empty.
[[nodiscard]] nn::ScenarioGroups load_dataset(const std::filesystem::path& dir);

} // namespace roadsafe::cli
