#include "roadsafe/error.hpp"
#include "roadsafe/neuralnet/algorithm1.hpp"
#include "roadsafe/neuralnet/cnn_classifier.hpp"
#include "roadsafe/neuralnet/model_io.hpp"
#include "roadsafe/neuralnet/train.hpp"

#include "nn_check.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

using namespace roadsafe;
using namespace roadsafe::nn;
using Catch::Matchers::WithinAbs;

namespace {

std::vector<std::size_t> spatial_sides(const Model& m)
{
    std::vector<std::size_t> sides;
    for (std::size_t i = 0; i < m.layers().size(); ++i) {
        if (std::holds_alternative<Conv>(m.layers()[i]) || std::holds_alternative<MaxPool>(m.layers()[i]))
            sides.push_back(m.output_shapes()[i][1]);
    }
    return sides;
}

std::size_t flatten_length(const Model& m)
{
    for (std::size_t i = 0; i < m.layers().size(); ++i)
        if (std::holds_alternative<Flatten>(m.layers()[i])) return m.output_shapes()[i][0];
    return 0;
}

} // namespace

TEST_CASE("valid-padding shape chain at 128")
{
    auto m = algorithm1_spec(128, 2);
    CHECK(spatial_sides(m) == std::vector<std::size_t>{126, 63, 61, 30, 28, 14});
    CHECK(flatten_length(m) == 25088);
    CHECK(m.class_count() == 2);
    CHECK(m.layers().size() == 18);
}

TEST_CASE("same-padding shape chain at 16")
{
    auto m = algorithm1_spec(16, 2, Padding::same);
    CHECK(spatial_sides(m) == std::vector<std::size_t>{16, 8, 8, 4, 4, 2});
    CHECK(flatten_length(m) == 512);
}

TEST_CASE("valid padding needs a side of at least 22")
{
    CHECK_THROWS_AS(algorithm1_spec(16, 2), ShapeError);
    CHECK_THROWS_AS(algorithm1_spec(21, 2), ShapeError);
    auto m = algorithm1_spec(22, 2);
    CHECK(spatial_sides(m).back() == 1);
    CHECK_THROWS_AS(algorithm1_spec(64, 1), ShapeError);
}

TEST_CASE("models reject inconsistent stacks")
{
    CHECK_THROWS_AS(Model({1, 4, 4}, {Dense{2}, Softmax{}}), ShapeError);
    CHECK_THROWS_AS(Model({1, 4, 4}, {Conv{2, 5, Padding::valid}, Flatten{}, Dense{2}, Softmax{}}), ShapeError);
    CHECK_THROWS_AS(Model({1, 4, 4}, {Flatten{}, Dense{0}, Softmax{}}), ShapeError);
    CHECK_THROWS_AS(Model({1, 4, 4}, {Flatten{}, Dense{2}, Dropout{1.0}, Softmax{}}), ShapeError);
}

TEST_CASE("softmax output is a distribution")
{
    auto m = algorithm1_spec(16, 2, Padding::same);
    m.initialize(1);
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
        Tensor x({1, 16, 16});
        for (auto& v : x.data()) v = rng.uniform(-3, 3);
        auto p = m.forward(x, i % 2 ? Mode::train : Mode::eval, static_cast<std::uint64_t>(i));
        double sum = std::accumulate(p.data().begin(), p.data().end(), 0.0);
        CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
        for (double v : p.data()) CHECK(v >= 0.0);
    }
    // Large logits stay finite.
    Model big({1, 1, 1}, {Flatten{}, Dense{2}, Softmax{}});
    big.parameters()[0][0] = 1e4;
    big.parameters()[0][1] = -1e4;
    auto p = big.forward(Tensor({1, 1, 1}, std::vector<double>{1.0}));
    CHECK(p[0] == 1.0);
    CHECK(std::isfinite(p[1]));
}

TEST_CASE("analytic gradients match central differences")
{
    auto m = testing::gradient_toy_model(11);
    REQUIRE(m.parameter_count() >= 200);
    auto r = testing::gradient_check(m, 200, 12);
    CHECK(r.checked == 200);
    CHECK(r.max_rel_error < 1e-4);
}

TEST_CASE("dropout is inactive in eval mode and seeded in train mode")
{
    Model m({1, 4, 4}, {Flatten{}, Dropout{0.5}, Dense{2}, Softmax{}});
    m.initialize(3);
    Tensor x({1, 4, 4}, 0.7);
    CHECK(m.forward(x, Mode::eval, 1) == m.forward(x, Mode::eval, 2));
    CHECK(m.forward(x, Mode::train, 5) == m.forward(x, Mode::train, 5));
    CHECK(m.forward(x, Mode::train, 5) != m.forward(x, Mode::eval));
}

TEST_CASE("max pooling drops trailing rows")
{
    Model m({1, 5, 5}, {MaxPool{2}, Flatten{}, Dense{2}, Softmax{}});
    CHECK(m.output_shapes()[0] == Shape{1, 2, 2});
}

TEST_CASE("model files round-trip and reject damage")
{
    testing::TempDir dir;
    auto m = algorithm1_spec(16, 2, Padding::same);
    m.initialize(9);
    save_model(m, dir / "m.bin");
    auto back = load_model(dir / "m.bin");
    CHECK(back == m);
    Tensor x({1, 16, 16}, 0.25);
    CHECK(back.forward(x) == m.forward(x));

    auto bytes = serialize_model(m);
    auto bad = bytes;
    bad[0] ^= 1;
    CHECK_THROWS_AS(deserialize_model(bad), StorageError);
    bad = bytes;
    bad.pop_back();
    CHECK_THROWS_AS(deserialize_model(bad), StorageError);
    bad = bytes;
    bad.push_back(0);
    CHECK_THROWS_AS(deserialize_model(bad), StorageError);
    CHECK_THROWS(load_model(dir / "missing.bin"));
}

TEST_CASE("training lowers the loss on a separable toy set")
{
    std::vector<LabeledFrame> data;
    for (std::uint64_t i = 0; i < 64; ++i) {
        bool drowsy = i % 2;
        data.push_back({sim::synth_frame(drowsy, sim::Scenario::no_glasses, i, 8), drowsy ? kDrowsyClass : kAlertClass,
                        sim::Scenario::no_glasses});
    }
    Model m({1, 8, 8}, {Conv{4, 3, Padding::same}, LeakyRelu{0.1}, MaxPool{2}, Flatten{}, Dense{2}, Softmax{}});
    m.initialize(1);
    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.learning_rate = 0.1;
    cfg.batch_size = 8;
    auto r = train(m, data, cfg);
    REQUIRE(r.loss_curve.size() == 15);
    CHECK(r.loss_curve.back() < 0.7 * r.loss_curve.front());
    CHECK(r.epochs.back().accuracy > 0.8);

    // Same seed, same model.
    CHECK(train(m, data, cfg).model == r.model);
    cfg.learning_rate = 0.0;
    CHECK(train(m, data, cfg).model == m);
    CHECK_THROWS_AS(train(m, std::vector<LabeledFrame>{}, cfg), ValidationError);
}

TEST_CASE("batch gradients are the mean of per-sample gradients")
{
    auto m = testing::gradient_toy_model(4);
    std::vector<LabeledFrame> batch;
    for (std::uint64_t i = 0; i < 3; ++i)
        batch.push_back({sim::synth_frame(i % 2, sim::Scenario::glasses, i, 8), i % 3, sim::Scenario::glasses});
    auto g = gradients(m, batch);
    auto manual = m.zero_gradients();
    for (const auto& s : batch)
        (void)m.accumulate_gradients(frame_to_tensor(s.frame), s.label, Mode::eval, 0, manual, 1.0 / 3.0);
    for (std::size_t t = 0; t < manual.size(); ++t)
        for (std::size_t i = 0; i < manual[t].size(); ++i) CHECK_THAT(g.grads[t][i], WithinAbs(manual[t][i], 1e-12));
}

TEST_CASE("cnn classifier checks its model and input")
{
    CHECK_THROWS_AS(CnnClassifier(algorithm1_spec(22, 3)), ShapeError);
    auto m = algorithm1_spec(16, 2, Padding::same);
    m.initialize(2);
    CnnClassifier c(m);
    CHECK(c.input_side() == 16);
    double s = classify(c, sim::synth_frame(true, sim::Scenario::glasses, 1));
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
    CHECK_THROWS_AS(classify(c, sim::Frame(8)), ShapeError);
}
