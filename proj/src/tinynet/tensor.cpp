#include "itof/tinynet/tensor.hpp"

#include <algorithm>

namespace itof::nn {

TensorGrid TensorGrid::crop(std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) const {
    if (y0 + h > this->h() || x0 + w > this->w()) throw ArgumentError("crop outside tensor " + shape_string());
    TensorGrid out(n(), c(), h, w);
    for (std::size_t s = 0; s < n(); ++s) {
        for (std::size_t ch = 0; ch < c(); ++ch) {
            for (std::size_t y = 0; y < h; ++y) {
                const double* src = &data_[index(s, ch, y0 + y, x0)];
                std::copy(src, src + w, &out.at(s, ch, y, 0));
            }
        }
    }
    return out;
}

TensorGrid TensorGrid::concat_channels(const TensorGrid& a, const TensorGrid& b) {
    if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w()) {
        throw ArgumentError("concat of " + a.shape_string() + " and " + b.shape_string());
    }
    TensorGrid out(a.n(), a.c() + b.c(), a.h(), a.w());
    const std::size_t plane = a.h() * a.w();
    for (std::size_t s = 0; s < a.n(); ++s) {
        std::copy_n(&a.data_[a.index(s, 0, 0, 0)], a.c() * plane, &out.at(s, 0, 0, 0));
        std::copy_n(&b.data_[b.index(s, 0, 0, 0)], b.c() * plane, &out.at(s, a.c(), 0, 0));
    }
    return out;
}

std::string TensorGrid::shape_string() const {
    return "(" + std::to_string(shape_[0]) + ", " + std::to_string(shape_[1]) + ", " +
           std::to_string(shape_[2]) + ", " + std::to_string(shape_[3]) + ")";
}

}  // namespace itof::nn
