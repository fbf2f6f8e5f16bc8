#include "roadsafe/neuralnet/algorithm1.hpp"

#include "roadsafe/error.hpp"

namespace roadsafe::nn {

std::vector<LayerSpec> drowsiness_layers(std::size_t class_count, Padding padding)
{
    return {
        Conv{64, 3, padding},  LeakyRelu{kLeakyAlpha}, MaxPool{2}, Dropout{kConvDropout},
        Conv{128, 3, padding}, LeakyRelu{kLeakyAlpha}, MaxPool{2}, Dropout{kConvDropout},
        Conv{128, 3, padding}, LeakyRelu{kLeakyAlpha}, MaxPool{2}, Dropout{kConvDropout},
        Flatten{},
        Dense{static_cast<int>(128)},
        LeakyRelu{kLeakyAlpha},
        Dropout{kDenseDropout},
        Dense{static_cast<int>(class_count)},
        Softmax{},
    };
}

Model algorithm1_spec(std::size_t input_side, std::size_t class_count, Padding padding)
{
    if (class_count < 2) {
        throw ShapeError("class_count must be >= 2");
    }
    try {
        return Model({1, input_side, input_side}, drowsiness_layers(class_count, padding));
    } catch (const ShapeError& err) {
        throw ShapeError("input side " + std::to_string(input_side) +
                         " too small for three conv/pool stages: " + err.what());
    }
}

} // namespace roadsafe::nn
