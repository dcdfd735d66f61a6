#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "itof/errors.hpp"

namespace itof::nn {

/// Dense row-major (batch, channels, height, width) array.
class TensorGrid {
public:
    TensorGrid() = default;
    TensorGrid(std::size_t n, std::size_t c, std::size_t h, std::size_t w, double fill = 0.0)
        : shape_{n, c, h, w}, data_(n * c * h * w, fill) {}
    /// Single-sample tensor of shape (1, c, h, w).
    static TensorGrid image(std::size_t c, std::size_t h, std::size_t w, double fill = 0.0) {
        return TensorGrid(1, c, h, w, fill);
    }

    std::size_t n() const noexcept { return shape_[0]; }
    std::size_t c() const noexcept { return shape_[1]; }
    std::size_t h() const noexcept { return shape_[2]; }
    std::size_t w() const noexcept { return shape_[3]; }
    const std::array<std::size_t, 4>& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool same_shape(const TensorGrid& o) const noexcept { return shape_ == o.shape_; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    std::vector<double>& storage() noexcept { return data_; }

    std::size_t index(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const noexcept {
        return ((n * shape_[1] + c) * shape_[2] + y) * shape_[3] + x;
    }
    double& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) { return data_[index(n, c, y, x)]; }
    const double& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const { return data_[index(n, c, y, x)]; }

    /// Spatial crop of size (h, w) starting at (y0, x0), all samples and channels.
    TensorGrid crop(std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) const;
    /// Channel-wise concatenation of two tensors with equal batch and spatial size.
    static TensorGrid concat_channels(const TensorGrid& a, const TensorGrid& b);

    std::string shape_string() const;

    friend bool operator==(const TensorGrid&, const TensorGrid&) = default;

private:
    std::array<std::size_t, 4> shape_{0, 0, 0, 0};
    std::vector<double> data_;
};

/// Trainable parameter view: values, gradient accumulator and a version counter that
/// is bumped whenever the values change.
struct ParamRef {
    std::string name;
    std::vector<std::size_t> shape;
    std::span<double> value;
    std::span<double> grad;
    std::uint64_t* version = nullptr;
};

}  // namespace itof::nn
