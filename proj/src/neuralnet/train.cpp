#include "roadsafe/neuralnet/train.hpp"

#include "roadsafe/error.hpp"
#include "roadsafe/util/rng.hpp"

#include <algorithm>
#include <numeric>

namespace roadsafe::nn {

Tensor frame_to_tensor(const sim::Frame& frame)
{
    const auto side = static_cast<std::size_t>(frame.side());
    const auto px = frame.pixels();
    return Tensor({1, side, side}, std::vector<double>(px.begin(), px.end()));
}

GradientResult gradients(const Model& model, std::span<const LabeledFrame> batch, Mode mode,
                         std::uint64_t dropout_seed)
{
    if (batch.empty()) {
        throw ValidationError("gradient batch is empty");
    }
    GradientResult out{model.zero_gradients(), 0.0};
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        out.loss += model.accumulate_gradients(frame_to_tensor(batch[i].frame), batch[i].label, mode,
                                               hash_combine(dropout_seed, i), out.grads, scale);
    }
    out.loss *= scale;
    return out;
}

TrainResult train(Model model, std::span<const LabeledFrame> dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch)
{
    if (dataset.empty()) {
        throw ValidationError("training dataset is empty");
    }
    if (config.epochs < 0 || config.batch_size == 0) {
        throw ConfigError("epochs must be >= 0 and batch_size > 0");
    }
    TrainResult result{std::move(model), {}, {}};
    Model& net = result.model;
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<Tensor> inputs;
    inputs.reserve(dataset.size());
    for (const auto& item : dataset) {
        inputs.push_back(frame_to_tensor(item.frame));
    }

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng(hash_combine(config.seed, static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        }
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            auto grads = net.zero_gradients();
            const double scale = 1.0 / static_cast<double>(end - begin);
            for (std::size_t k = begin; k < end; ++k) {
                const std::size_t idx = order[k];
                const std::uint64_t dropout_seed =
                    hash_combine(hash_combine(config.seed ^ 0x5eedULL, static_cast<std::uint64_t>(epoch)), k);
                loss_sum += net.accumulate_gradients(inputs[idx], dataset[idx].label, Mode::train, dropout_seed,
                                                     grads, scale);
            }
            if (config.learning_rate != 0.0) {
                auto& params = net.parameters();
                for (std::size_t p = 0; p < params.size(); ++p) {
                    auto dst = params[p].data();
                    const auto g = grads[p].data();
                    for (std::size_t j = 0; j < dst.size(); ++j) {
                        dst[j] -= config.learning_rate * g[j];
                    }
                }
            }
        }
        for (std::size_t idx = 0; config.track_accuracy && idx < dataset.size(); ++idx) {
            const Tensor probs = net.forward(inputs[idx], Mode::eval);
            const std::size_t predicted = static_cast<std::size_t>(
                std::distance(probs.data().begin(), std::max_element(probs.data().begin(), probs.data().end())));
            correct += predicted == dataset[idx].label ? 1 : 0;
        }
        EpochStats stats{epoch + 1, loss_sum / static_cast<double>(dataset.size()),
                         static_cast<double>(correct) / static_cast<double>(dataset.size())};
        result.loss_curve.push_back(stats.loss);
        result.epochs.push_back(stats);
        if (on_epoch) {
            on_epoch(stats);
        }
    }
    return result;
}

} // namespace roadsafe::nn
