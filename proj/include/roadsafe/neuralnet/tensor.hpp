#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace roadsafe::nn {

using Shape = std::vector<std::size_t>;

[[nodiscard]] std::size_t element_count(const Shape& shape) noexcept;
[[nodiscard]] std::string to_string(const Shape& shape);

/// Dense row-major array of finite doubles.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    /// Throws ShapeError on size mismatch or non-finite data.
    Tensor(Shape shape, std::vector<double> data);

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return data_[i]; }
    [[nodiscard]] double& operator[](std::size_t i) noexcept { return data_[i]; }

    void fill(double value);

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

} // namespace roadsafe::nn
