#include "roadsafe/neuralnet/tensor.hpp"

#include "roadsafe/error.hpp"

#include <algorithm>
#include <cmath>

namespace roadsafe::nn {

std::size_t element_count(const Shape& shape) noexcept
{
    std::size_t n = 1;
    for (auto d : shape) {
        n *= d;
    }
    return n;
}

std::string to_string(const Shape& shape)
{
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            s += ",";
        }
        s += std::to_string(shape[i]);
    }
    if (shape.size() == 1) {
        s += ",";
    }
    return s + ")";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape))
{
    for (auto d : shape_) {
        if (d == 0) {
            throw ShapeError("tensor dimensions must be positive: " + to_string(shape_));
        }
    }
    data_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data))
{
    for (auto d : shape_) {
        if (d == 0) {
            throw ShapeError("tensor dimensions must be positive: " + to_string(shape_));
        }
    }
    if (data_.size() != element_count(shape_)) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                         to_string(shape_));
    }
    if (!std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); })) {
        throw ShapeError("tensor data must be finite");
    }
}

void Tensor::fill(double value)
{
    std::fill(data_.begin(), data_.end(), value);
}

} // namespace roadsafe::nn
