#pragma once

#include "roadsafe/neuralnet/model.hpp"
#include "roadsafe/util/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace testing {

/// 8x8 single-channel toy net touching every layer kind that has a backward pass.
inline roadsafe::nn::Model gradient_toy_model(std::uint64_t seed)
{
    using namespace roadsafe::nn;
    Model m({1, 8, 8}, {Conv{4, 3, Padding::same}, LeakyRelu{0.1}, MaxPool{2}, Conv{6, 3, Padding::valid},
                        LeakyRelu{0.1}, Flatten{}, Dense{8}, LeakyRelu{0.1}, Dense{3}, Softmax{}});
    m.initialize(seed);
    // Non-zero biases so every bias gradient is exercised.
    roadsafe::Rng rng(seed ^ 0xb1a5);
    for (auto& p : m.parameters())
        if (p.shape().size() == 1)
            for (auto& v : p.data()) v = rng.uniform(-0.1, 0.1);
    return m;
}

struct GradCheck {
    std::size_t checked = 0;
    double max_rel_error = 0.0;
};

/// Central differences on `count` random (tensor, index) parameters.
inline GradCheck gradient_check(roadsafe::nn::Model model, std::size_t count, std::uint64_t seed, double h = 1e-4)
{
    using namespace roadsafe::nn;
    roadsafe::Rng rng(seed);
    Tensor input(model.input_shape());
    for (auto& v : input.data()) v = rng.uniform();
    const std::size_t label = rng.below(model.class_count());

    auto loss = [&](const Model& m) { return -std::log(m.forward(input, Mode::eval)[label]); };

    auto grads = model.zero_gradients();
    (void)model.accumulate_gradients(input, label, Mode::eval, 0, grads);

    std::vector<std::pair<std::size_t, std::size_t>> all;
    for (std::size_t t = 0; t < model.parameters().size(); ++t)
        for (std::size_t i = 0; i < model.parameters()[t].size(); ++i) all.emplace_back(t, i);
    for (std::size_t i = all.size(); i > 1; --i) std::swap(all[i - 1], all[rng.below(i)]);
    all.resize(std::min(count, all.size()));

    GradCheck out;
    for (auto [t, i] : all) {
        double& p = model.parameters()[t][i];
        const double saved = p;
        p = saved + h;
        const double up = loss(model);
        p = saved - h;
        const double down = loss(model);
        p = saved;
        const double numeric = (up - down) / (2 * h);
        const double analytic = grads[t][i];
        const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
        out.max_rel_error = std::max(out.max_rel_error, std::abs(numeric - analytic) / denom);
        ++out.checked;
    }
    return out;
}

} // namespace testing
