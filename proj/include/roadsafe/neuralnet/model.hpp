#pragma once

#include "roadsafe/neuralnet/layers.hpp"
#include "roadsafe/neuralnet/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace roadsafe::nn {

enum class Mode { train, eval };

/// Sequential network over a [channels, height, width] input, ending in a
/// single Softmax. Owns one weight and one bias tensor per Conv/Dense layer.
class Model {
public:
    /// Validates the stack and allocates zero parameters. Throws ShapeError when
    /// consecutive shapes are incompatible or the Softmax is not the single last layer.
    Model(Shape input_shape, std::vector<LayerSpec> layers);

    [[nodiscard]] const Shape& input_shape() const noexcept { return input_shape_; }
    [[nodiscard]] const std::vector<LayerSpec>& layers() const noexcept { return layers_; }
    /// Output shape of every layer, in order.
    [[nodiscard]] const std::vector<Shape>& output_shapes() const noexcept { return shapes_; }
    [[nodiscard]] std::size_t class_count() const noexcept { return shapes_.back().front(); }

    [[nodiscard]] std::vector<Tensor>& parameters() noexcept { return params_; }
    [[nodiscard]] const std::vector<Tensor>& parameters() const noexcept { return params_; }
    [[nodiscard]] std::size_t parameter_count() const noexcept;
    /// Zero tensors shaped like parameters().
    [[nodiscard]] std::vector<Tensor> zero_gradients() const;

    /// Glorot-uniform weights, zero biases.
    void initialize(std::uint64_t seed);

    /// Class probabilities. Dropout masks (train mode) are drawn from dropout_seed.
    [[nodiscard]] Tensor forward(const Tensor& input, Mode mode = Mode::eval, std::uint64_t dropout_seed = 0) const;

    /// Cross-entropy loss of one sample; adds d(loss)/d(param) * scale into grads.
    double accumulate_gradients(const Tensor& input, std::size_t label, Mode mode, std::uint64_t dropout_seed,
                                std::vector<Tensor>& grads, double scale = 1.0) const;

    friend bool operator==(const Model&, const Model&) = default;

private:
    struct Cache;
    void run_forward(std::span<const double> input, Mode mode, std::uint64_t dropout_seed, Cache& cache) const;
    void check_input(const Tensor& input) const;

    Shape input_shape_;
    std::vector<LayerSpec> layers_;
    std::vector<Shape> shapes_;
    std::vector<int> param_slot_; ///< index of the weight tensor per layer, -1 if none
    std::vector<Tensor> params_;
};

} // namespace roadsafe::nn
