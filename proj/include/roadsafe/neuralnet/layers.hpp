#pragma once

#include <string>
#include <variant>

namespace roadsafe::nn {

enum class Padding { valid, same };

/// Stride-1 square convolution (cross-correlation).
struct Conv {
    int out_channels = 1;
    int kernel = 3;
    Padding padding = Padding::valid;
    friend bool operator==(const Conv&, const Conv&) = default;
};

struct LeakyRelu {
    double alpha = 0.1;
    friend bool operator==(const LeakyRelu&, const LeakyRelu&) = default;
};

/// Non-overlapping size x size max pooling; trailing rows/columns are dropped.
struct MaxPool {
    int size = 2;
    friend bool operator==(const MaxPool&, const MaxPool&) = default;
};

/// Inverted dropout: active only in training mode.
struct Dropout {
    double rate = 0.0;
    friend bool operator==(const Dropout&, const Dropout&) = default;
};

struct Flatten {
    friend bool operator==(const Flatten&, const Flatten&) = default;
};

/// Fully connected layer with linear activation.
struct Dense {
    int units = 1;
    friend bool operator==(const Dense&, const Dense&) = default;
};

struct Softmax {
    friend bool operator==(const Softmax&, const Softmax&) = default;
};

using LayerSpec = std::variant<Conv, LeakyRelu, MaxPool, Dropout, Flatten, Dense, Softmax>;

[[nodiscard]] std::string describe(const LayerSpec& layer);

} // namespace roadsafe::nn
