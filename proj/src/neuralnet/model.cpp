#include "roadsafe/neuralnet/model.hpp"

#include "roadsafe/error.hpp"
#include "roadsafe/util/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace roadsafe::nn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

struct Dims {
    std::size_t c, h, w;
};

Dims dims3(const Shape& s) { return {s[0], s[1], s[2]}; }

int pad_of(const Conv& conv) { return conv.padding == Padding::same ? conv.kernel / 2 : 0; }

void conv_forward(const double* in, Dims id, const double* w, const double* b, Dims od, int k, int pad, double* out)
{
    const auto K = static_cast<std::size_t>(k);
    const auto P = static_cast<long>(pad);
    const std::size_t plane = od.h * od.w;
    for (std::size_t o = 0; o < od.c; ++o) {
        double* op = out + o * plane;
        std::fill(op, op + plane, b[o]);
        for (std::size_t c = 0; c < id.c; ++c) {
            const double* ip = in + c * id.h * id.w;
            const double* wp = w + (o * id.c + c) * K * K;
            for (std::size_t ky = 0; ky < K; ++ky) {
                const long dy = static_cast<long>(ky) - P;
                const long y0 = std::max(0L, -dy);
                const long y1 = std::min(static_cast<long>(od.h), static_cast<long>(id.h) - dy);
                for (std::size_t kx = 0; kx < K; ++kx) {
                    const double wv = wp[ky * K + kx];
                    const long dx = static_cast<long>(kx) - P;
                    const long x0 = std::max(0L, -dx);
                    const long x1 = std::min(static_cast<long>(od.w), static_cast<long>(id.w) - dx);
                    for (long y = y0; y < y1; ++y) {
                        double* orow = op + y * static_cast<long>(od.w);
                        const double* irow = ip + (y + dy) * static_cast<long>(id.w) + dx;
                        for (long x = x0; x < x1; ++x) {
                            orow[x] += wv * irow[x];
                        }
                    }
                }
            }
        }
    }
}

void conv_backward(const double* in, Dims id, const double* w, Dims od, int k, int pad, const double* dout,
                   double* dw, double* db, double* din, double scale)
{
    const auto K = static_cast<std::size_t>(k);
    const auto P = static_cast<long>(pad);
    const std::size_t plane = od.h * od.w;
    for (std::size_t o = 0; o < od.c; ++o) {
        const double* gp = dout + o * plane;
        double bias_grad = 0.0;
        for (std::size_t i = 0; i < plane; ++i) {
            bias_grad += gp[i];
        }
        db[o] += scale * bias_grad;
        for (std::size_t c = 0; c < id.c; ++c) {
            const double* ip = in + c * id.h * id.w;
            double* dip = din ? din + c * id.h * id.w : nullptr;
            const double* wp = w + (o * id.c + c) * K * K;
            double* dwp = dw + (o * id.c + c) * K * K;
            for (std::size_t ky = 0; ky < K; ++ky) {
                const long dy = static_cast<long>(ky) - P;
                const long y0 = std::max(0L, -dy);
                const long y1 = std::min(static_cast<long>(od.h), static_cast<long>(id.h) - dy);
                for (std::size_t kx = 0; kx < K; ++kx) {
                    const double wv = wp[ky * K + kx];
                    const long dx = static_cast<long>(kx) - P;
                    const long x0 = std::max(0L, -dx);
                    const long x1 = std::min(static_cast<long>(od.w), static_cast<long>(id.w) - dx);
                    double acc = 0.0;
                    for (long y = y0; y < y1; ++y) {
                        const double* grow = gp + y * static_cast<long>(od.w);
                        const long in_off = (y + dy) * static_cast<long>(id.w) + dx;
                        const double* irow = ip + in_off;
                        for (long x = x0; x < x1; ++x) {
                            acc += grow[x] * irow[x];
                        }
                        if (dip) {
                            double* drow = dip + in_off;
                            for (long x = x0; x < x1; ++x) {
                                drow[x] += wv * grow[x];
                            }
                        }
                    }
                    dwp[ky * K + kx] += scale * acc;
                }
            }
        }
    }
}

} // namespace

struct Model::Cache {
    std::vector<std::vector<double>> acts;        // acts[i] is the input of layer i
    std::vector<std::vector<double>> masks;       // dropout scale per element
    std::vector<std::vector<std::uint32_t>> argmax; // max-pool source index per output
};

Model::Model(Shape input_shape, std::vector<LayerSpec> layers)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers))
{
    if (input_shape_.size() != 3 || element_count(input_shape_) == 0) {
        throw ShapeError("model input must be [channels, height, width] with positive sides");
    }
    if (layers_.empty() || !std::holds_alternative<Softmax>(layers_.back())) {
        throw ShapeError("model must end with a Softmax layer");
    }
    Shape cur = input_shape_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const std::string where = "layer " + std::to_string(i) + " (" + describe(layers_[i]) + "): ";
        std::visit(
            overloaded{
                [&](const Conv& c) {
                    if (cur.size() != 3) {
                        throw ShapeError(where + "expects a [c,h,w] input, got " + to_string(cur));
                    }
                    if (c.out_channels <= 0 || c.kernel <= 0) {
                        throw ShapeError(where + "channels and kernel must be positive");
                    }
                    const long side_h = static_cast<long>(cur[1]) + 2 * pad_of(c) - c.kernel + 1;
                    const long side_w = static_cast<long>(cur[2]) + 2 * pad_of(c) - c.kernel + 1;
                    if (side_h < 1 || side_w < 1) {
                        throw ShapeError(where + "kernel does not fit input " + to_string(cur));
                    }
                    param_slot_.push_back(static_cast<int>(params_.size()));
                    params_.emplace_back(Shape{static_cast<std::size_t>(c.out_channels), cur[0],
                                               static_cast<std::size_t>(c.kernel), static_cast<std::size_t>(c.kernel)});
                    params_.emplace_back(Shape{static_cast<std::size_t>(c.out_channels)});
                    cur = {static_cast<std::size_t>(c.out_channels), static_cast<std::size_t>(side_h),
                           static_cast<std::size_t>(side_w)};
                },
                [&](const LeakyRelu& l) {
                    if (!(l.alpha > 0.0)) {
                        throw ShapeError(where + "alpha must be > 0");
                    }
                    param_slot_.push_back(-1);
                },
                [&](const MaxPool& p) {
                    if (cur.size() != 3 || p.size <= 0) {
                        throw ShapeError(where + "expects a [c,h,w] input and positive size");
                    }
                    const auto s = static_cast<std::size_t>(p.size);
                    if (cur[1] / s == 0 || cur[2] / s == 0) {
                        throw ShapeError(where + "input " + to_string(cur) + " smaller than pool window");
                    }
                    cur = {cur[0], cur[1] / s, cur[2] / s};
                    param_slot_.push_back(-1);
                },
                [&](const Dropout& d) {
                    if (!(d.rate >= 0.0 && d.rate < 1.0)) {
                        throw ShapeError(where + "rate must be in [0, 1)");
                    }
                    param_slot_.push_back(-1);
                },
                [&](const Flatten&) {
                    cur = {element_count(cur)};
                    param_slot_.push_back(-1);
                },
                [&](const Dense& d) {
                    if (cur.size() != 1) {
                        throw ShapeError(where + "expects a flat input, got " + to_string(cur));
                    }
                    if (d.units <= 0) {
                        throw ShapeError(where + "units must be positive");
                    }
                    param_slot_.push_back(static_cast<int>(params_.size()));
                    params_.emplace_back(Shape{static_cast<std::size_t>(d.units), cur[0]});
                    params_.emplace_back(Shape{static_cast<std::size_t>(d.units)});
                    cur = {static_cast<std::size_t>(d.units)};
                },
                [&](const Softmax&) {
                    if (i + 1 != layers_.size()) {
                        throw ShapeError(where + "Softmax must be the last layer");
                    }
                    if (cur.size() != 1) {
                        throw ShapeError(where + "expects a flat input, got " + to_string(cur));
                    }
                    param_slot_.push_back(-1);
                },
            },
            layers_[i]);
        shapes_.push_back(cur);
    }
}

std::size_t Model::parameter_count() const noexcept
{
    std::size_t n = 0;
    for (const auto& p : params_) {
        n += p.size();
    }
    return n;
}

std::vector<Tensor> Model::zero_gradients() const
{
    std::vector<Tensor> g;
    g.reserve(params_.size());
    for (const auto& p : params_) {
        g.emplace_back(p.shape());
    }
    return g;
}

void Model::initialize(std::uint64_t seed)
{
    Rng rng(mix64(seed));
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (param_slot_[i] < 0) {
            continue;
        }
        Tensor& w = params_[static_cast<std::size_t>(param_slot_[i])];
        Tensor& b = params_[static_cast<std::size_t>(param_slot_[i]) + 1];
        double fan_in = 0, fan_out = 0;
        if (w.shape().size() == 4) {
            const double area = static_cast<double>(w.shape()[2] * w.shape()[3]);
            fan_in = static_cast<double>(w.shape()[1]) * area;
            fan_out = static_cast<double>(w.shape()[0]) * area;
        } else {
            fan_in = static_cast<double>(w.shape()[1]);
            fan_out = static_cast<double>(w.shape()[0]);
        }
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (auto& v : w.data()) {
            v = rng.uniform(-limit, limit);
        }
        b.fill(0.0);
    }
}

void Model::check_input(const Tensor& input) const
{
    if (input.shape() != input_shape_) {
        throw ShapeError("input shape " + to_string(input.shape()) + " does not match model input " +
                         to_string(input_shape_));
    }
}

void Model::run_forward(std::span<const double> input, Mode mode, std::uint64_t dropout_seed, Cache& cache) const
{
    const std::size_t n_layers = layers_.size();
    cache.acts.resize(n_layers + 1);
    cache.masks.resize(n_layers);
    cache.argmax.resize(n_layers);
    cache.acts[0].assign(input.begin(), input.end());
    Shape in_shape = input_shape_;

    for (std::size_t i = 0; i < n_layers; ++i) {
        const std::vector<double>& in = cache.acts[i];
        std::vector<double>& out = cache.acts[i + 1];
        out.resize(element_count(shapes_[i]));
        std::visit(
            overloaded{
                [&](const Conv& c) {
                    const auto& w = params_[static_cast<std::size_t>(param_slot_[i])];
                    const auto& b = params_[static_cast<std::size_t>(param_slot_[i]) + 1];
                    conv_forward(in.data(), dims3(in_shape), w.data().data(), b.data().data(), dims3(shapes_[i]),
                                 c.kernel, pad_of(c), out.data());
                },
                [&](const LeakyRelu& l) {
                    for (std::size_t j = 0; j < in.size(); ++j) {
                        out[j] = in[j] > 0.0 ? in[j] : l.alpha * in[j];
                    }
                },
                [&](const MaxPool& p) {
                    const Dims id = dims3(in_shape), od = dims3(shapes_[i]);
                    const auto s = static_cast<std::size_t>(p.size);
                    auto& arg = cache.argmax[i];
                    arg.resize(out.size());
                    for (std::size_t c = 0; c < od.c; ++c) {
                        for (std::size_t y = 0; y < od.h; ++y) {
                            for (std::size_t x = 0; x < od.w; ++x) {
                                std::size_t best = c * id.h * id.w + y * s * id.w + x * s;
                                for (std::size_t dy = 0; dy < s; ++dy) {
                                    for (std::size_t dx = 0; dx < s; ++dx) {
                                        const std::size_t idx = c * id.h * id.w + (y * s + dy) * id.w + x * s + dx;
                                        if (in[idx] > in[best]) {
                                            best = idx;
                                        }
                                    }
                                }
                                const std::size_t o = (c * od.h + y) * od.w + x;
                                out[o] = in[best];
                                arg[o] = static_cast<std::uint32_t>(best);
                            }
                        }
                    }
                },
                [&](const Dropout& d) {
                    auto& mask = cache.masks[i];
                    if (mode == Mode::eval || d.rate == 0.0) {
                        mask.clear();
                        out = in;
                        return;
                    }
                    Rng rng(hash_combine(dropout_seed, i));
                    const double keep_scale = 1.0 / (1.0 - d.rate);
                    mask.resize(in.size());
                    for (std::size_t j = 0; j < in.size(); ++j) {
                        mask[j] = rng.uniform() < d.rate ? 0.0 : keep_scale;
                        out[j] = in[j] * mask[j];
                    }
                },
                [&](const Flatten&) { out = in; },
                [&](const Dense& d) {
                    const auto& w = params_[static_cast<std::size_t>(param_slot_[i])];
                    const auto& b = params_[static_cast<std::size_t>(param_slot_[i]) + 1];
                    const std::size_t n_in = in.size();
                    for (std::size_t u = 0; u < static_cast<std::size_t>(d.units); ++u) {
                        const double* row = w.data().data() + u * n_in;
                        double acc = b[u];
                        for (std::size_t j = 0; j < n_in; ++j) {
                            acc += row[j] * in[j];
                        }
                        out[u] = acc;
                    }
                },
                [&](const Softmax&) {
                    const double peak = *std::max_element(in.begin(), in.end());
                    double sum = 0.0;
                    for (std::size_t j = 0; j < in.size(); ++j) {
                        out[j] = std::exp(in[j] - peak);
                        sum += out[j];
                    }
                    for (auto& v : out) {
                        v /= sum;
                    }
                },
            },
            layers_[i]);
        in_shape = shapes_[i];
    }
}

Tensor Model::forward(const Tensor& input, Mode mode, std::uint64_t dropout_seed) const
{
    check_input(input);
    Cache cache;
    run_forward(input.data(), mode, dropout_seed, cache);
    return Tensor(shapes_.back(), std::move(cache.acts.back()));
}

double Model::accumulate_gradients(const Tensor& input, std::size_t label, Mode mode, std::uint64_t dropout_seed,
                                   std::vector<Tensor>& grads, double scale) const
{
    check_input(input);
    if (label >= class_count()) {
        throw ShapeError("label " + std::to_string(label) + " out of range for " + std::to_string(class_count()) +
                         " classes");
    }
    if (grads.size() != params_.size()) {
        throw ShapeError("gradient buffer does not match parameters");
    }
    Cache cache;
    run_forward(input.data(), mode, dropout_seed, cache);
    const std::vector<double>& probs = cache.acts.back();
    const double loss = -std::log(std::max(probs[label], std::numeric_limits<double>::min()));

    // Softmax + cross-entropy: d(loss)/d(logits) = p - onehot(label)
    std::vector<double> grad(probs);
    grad[label] -= 1.0;

    for (std::size_t i = layers_.size() - 1; i-- > 0;) {
        const std::vector<double>& in = cache.acts[i];
        const Shape& in_shape = i == 0 ? input_shape_ : shapes_[i - 1];
        const bool need_input_grad = i > 0;
        std::vector<double> din;
        std::visit(
            overloaded{
                [&](const Conv& c) {
                    const auto slot = static_cast<std::size_t>(param_slot_[i]);
                    if (need_input_grad) {
                        din.assign(in.size(), 0.0);
                    }
                    conv_backward(in.data(), dims3(in_shape), params_[slot].data().data(), dims3(shapes_[i]),
                                  c.kernel, pad_of(c), grad.data(), grads[slot].data().data(),
                                  grads[slot + 1].data().data(), need_input_grad ? din.data() : nullptr, scale);
                },
                [&](const LeakyRelu& l) {
                    din.resize(in.size());
                    for (std::size_t j = 0; j < in.size(); ++j) {
                        din[j] = in[j] > 0.0 ? grad[j] : l.alpha * grad[j];
                    }
                },
                [&](const MaxPool&) {
                    din.assign(in.size(), 0.0);
                    const auto& arg = cache.argmax[i];
                    for (std::size_t j = 0; j < grad.size(); ++j) {
                        din[arg[j]] += grad[j];
                    }
                },
                [&](const Dropout&) {
                    const auto& mask = cache.masks[i];
                    din = grad;
                    if (!mask.empty()) {
                        for (std::size_t j = 0; j < din.size(); ++j) {
                            din[j] *= mask[j];
                        }
                    }
                },
                [&](const Flatten&) { din = grad; },
                [&](const Dense& d) {
                    const auto slot = static_cast<std::size_t>(param_slot_[i]);
                    const double* w = params_[slot].data().data();
                    double* dw = grads[slot].data().data();
                    double* db = grads[slot + 1].data().data();
                    const std::size_t n_in = in.size();
                    din.assign(n_in, 0.0);
                    for (std::size_t u = 0; u < static_cast<std::size_t>(d.units); ++u) {
                        const double g = grad[u];
                        db[u] += scale * g;
                        const double gs = scale * g;
                        double* dwrow = dw + u * n_in;
                        const double* wrow = w + u * n_in;
                        for (std::size_t j = 0; j < n_in; ++j) {
                            dwrow[j] += gs * in[j];
                            din[j] += wrow[j] * g;
                        }
                    }
                },
                [&](const Softmax&) { din = grad; },
            },
            layers_[i]);
        if (!need_input_grad) {
            break;
        }
        grad = std::move(din);
    }
    return loss;
}

} // namespace roadsafe::nn
