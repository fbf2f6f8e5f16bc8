#pragma once

#include "roadsafe/neuralnet/model.hpp"
#include "roadsafe/simagent/frame.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace roadsafe::nn {

inline constexpr std::size_t kAlertClass = 0;
inline constexpr std::size_t kDrowsyClass = 1;

struct LabeledFrame {
    sim::Frame frame;
    std::size_t label = kAlertClass;
    sim::Scenario scenario = sim::Scenario::no_glasses;
};

/// [1, side, side] tensor view of a frame.
[[nodiscard]] Tensor frame_to_tensor(const sim::Frame& frame);

struct GradientResult {
    std::vector<Tensor> grads; ///< mean over the batch, shaped like Model::parameters()
    double loss = 0.0;         ///< mean cross-entropy
};

/// Mean cross-entropy gradients over a batch. Eval mode disables dropout;
/// train mode draws masks from dropout_seed (one stream per sample index).
[[nodiscard]] GradientResult gradients(const Model& model, std::span<const LabeledFrame> batch,
                                       Mode mode = Mode::eval, std::uint64_t dropout_seed = 0);

struct TrainConfig {
    double learning_rate = 0.01;
    int epochs = 10;
    std::size_t batch_size = 16;
    std::uint64_t seed = 1;
    bool track_accuracy = true;
};

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;
    double accuracy = 0.0; ///< eval-mode accuracy on the training set after the epoch (0 if not tracked)
};

struct TrainResult {
    Model model;
    std::vector<double> loss_curve;
    std::vector<EpochStats> epochs;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Plain mini-batch SGD on cross-entropy. Deterministic for a given seed:
/// the seed drives shuffling and dropout masks. Throws ValidationError on an
/// empty dataset.
[[nodiscard]] TrainResult train(Model model, std::span<const LabeledFrame> dataset, const TrainConfig& config,
                                const EpochCallback& on_epoch = {});

} // namespace roadsafe::nn
