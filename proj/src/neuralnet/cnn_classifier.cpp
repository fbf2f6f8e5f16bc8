#include "roadsafe/neuralnet/cnn_classifier.hpp"

#include "roadsafe/error.hpp"
#include "roadsafe/neuralnet/train.hpp"

namespace roadsafe::nn {

CnnClassifier::CnnClassifier(Model model) : model_(std::move(model))
{
    const auto& in = model_.input_shape();
    if (in[0] != 1 || in[1] != in[2]) {
        throw ShapeError("drowsiness classifier needs a single-channel square input");
    }
    if (model_.class_count() != 2) {
        throw ShapeError("drowsiness classifier needs exactly two classes");
    }
}

int CnnClassifier::input_side() const noexcept
{
    return static_cast<int>(model_.input_shape()[1]);
}

double CnnClassifier::score(const sim::Frame& frame) const
{
    return model_.forward(frame_to_tensor(frame), Mode::eval)[kDrowsyClass];
}

} // namespace roadsafe::nn
