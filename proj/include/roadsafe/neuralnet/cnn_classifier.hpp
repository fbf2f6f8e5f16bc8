#pragma once

#include "roadsafe/neuralnet/classifier.hpp"
#include "roadsafe/neuralnet/model.hpp"

namespace roadsafe::nn {

/// Drowsiness score = drowsy-class probability of an eval-mode forward pass.
class CnnClassifier final : public DrowsinessClassifier {
public:
    /// Throws ShapeError unless the model takes a [1, s, s] input and has two classes.
    explicit CnnClassifier(Model model);

    [[nodiscard]] int input_side() const noexcept override;
    [[nodiscard]] double score(const sim::Frame& frame) const override;
    [[nodiscard]] const Model& model() const noexcept { return model_; }

private:
    Model model_;
};

} // namespace roadsafe::nn
