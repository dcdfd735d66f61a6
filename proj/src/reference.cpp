#include "itof/reference.hpp"

#include <algorithm>
#include <cmath>

namespace itof::reference {

using nn::Activation;
using nn::TensorGrid;

TensorGrid conv2d_forward(const TensorGrid& in, const nn::ConvLayer& L) {
    if (in.c() != L.in_ch || in.h() < L.kh || in.w() < L.kw) throw ArgumentError("reference conv: bad input");
    const std::size_t ho = in.h() - L.kh + 1;
    const std::size_t wo = in.w() - L.kw + 1;
    TensorGrid out(in.n(), L.out_ch, ho, wo);
    for (std::size_t n = 0; n < in.n(); ++n)
        for (std::size_t o = 0; o < L.out_ch; ++o)
            for (std::size_t y = 0; y < ho; ++y)
                for (std::size_t x = 0; x < wo; ++x) {
                    double s = L.bias[o];
                    for (std::size_t i = 0; i < L.in_ch; ++i)
                        for (std::size_t ky = 0; ky < L.kh; ++ky)
                            for (std::size_t kx = 0; kx < L.kw; ++kx)
                                s += L.w(o, i, ky, kx) * in.at(n, i, y + ky, x + kx);
                    out.at(n, o, y, x) = L.activation == Activation::relu && s < 0.0 ? 0.0 : s;
                }
    return out;
}

nn::ConvGrads conv2d_backward(const TensorGrid& grad_out, const TensorGrid& in, const TensorGrid& out,
                              const nn::ConvLayer& L) {
    nn::ConvGrads g;
    g.grad_input = TensorGrid(in.n(), in.c(), in.h(), in.w());
    g.grad_kernel.assign(L.kernel.size(), 0.0);
    g.grad_bias.assign(L.out_ch, 0.0);
    for (std::size_t n = 0; n < out.n(); ++n)
        for (std::size_t o = 0; o < L.out_ch; ++o)
            for (std::size_t y = 0; y < out.h(); ++y)
                for (std::size_t x = 0; x < out.w(); ++x) {
                    double d = grad_out.at(n, o, y, x);
                    if (L.activation == Activation::relu && !(out.at(n, o, y, x) > 0.0)) d = 0.0;
                    g.grad_bias[o] += d;
                    for (std::size_t i = 0; i < L.in_ch; ++i)
                        for (std::size_t ky = 0; ky < L.kh; ++ky)
                            for (std::size_t kx = 0; kx < L.kw; ++kx) {
                                g.grad_kernel[((o * L.in_ch + i) * L.kh + ky) * L.kw + kx] +=
                                    d * in.at(n, i, y + ky, x + kx);
                                g.grad_input.at(n, i, y + ky, x + kx) += d * L.w(o, i, ky, kx);
                            }
                }
    return g;
}

DepthMap bilateral_filter(const DepthMap& depth, double sigma_s, double sigma_r) {
    if (!(sigma_s > 0.0) || !(sigma_r > 0.0)) throw ArgumentError("bilateral sigmas must be positive");
    const int r = static_cast<int>(std::ceil(2.0 * sigma_s));
    const int w = static_cast<int>(depth.width);
    const int h = static_cast<int>(depth.height);
    DepthMap out = depth;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y * w + x);
            if (!depth.is_valid(i)) continue;
            const double d0 = depth.depth_m[i];
            double num = 0.0;
            double den = 0.0;
            for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy)
                for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
                    const std::size_t j = static_cast<std::size_t>(yy * w + xx);
                    if (!depth.is_valid(j)) continue;
                    const double ds = static_cast<double>((yy - y) * (yy - y) + (xx - x) * (xx - x));
                    const double dr = depth.depth_m[j] - d0;
                    const double wgt = std::exp(-ds / (2.0 * sigma_s * sigma_s)) *
                                       std::exp(-dr * dr / (2.0 * sigma_r * sigma_r));
                    num += wgt * depth.depth_m[j];
                    den += wgt;
                }
            out.depth_m[i] = num / den;
        }
    return out;
}

}  // namespace itof::reference
