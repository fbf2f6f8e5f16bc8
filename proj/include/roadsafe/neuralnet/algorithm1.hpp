#pragma once

#include "roadsafe/neuralnet/model.hpp"

#include <vector>

namespace roadsafe::nn {

inline constexpr double kLeakyAlpha = 0.1;
inline constexpr double kConvDropout = 0.25;
inline constexpr double kDenseDropout = 0.5;

/// The drowsiness CNN layer stack for a single-channel square input:
///
///   Conv 64(3x3) - LeakyReLU(0.1) - MaxPool(2x2) - Dropout(0.25)
///   Conv 128(3x3) - LeakyReLU(0.1) - MaxPool(2x2) - Dropout(0.25)
///   Conv 128(3x3) - LeakyReLU(0.1) - MaxPool(2x2) - Dropout(0.25)
///   Flatten - Dense(128, linear) - LeakyReLU(0.1) - Dropout(0.5) - Softmax
[[nodiscard]] std::vector<LayerSpec> drowsiness_layers(std::size_t class_count, Padding padding = Padding::valid);

/// Builds (uninitialized) the drowsiness CNN. With valid padding the input
/// side must be at least 22 so all three conv/pool stages keep a positive
/// size; throws ShapeError otherwise.
[[nodiscard]] Model algorithm1_spec(std::size_t input_side, std::size_t class_count,
                                    Padding padding = Padding::valid);

} // namespace roadsafe::nn
