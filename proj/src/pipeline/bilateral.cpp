#include "itof/pipeline/bilateral.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace itof::pipeline {

DepthMap bilateral_filter(const DepthMap& depth, double sigma_s, double sigma_r, Exec exec) {
    if (!(sigma_s > 0.0) || !(sigma_r > 0.0)) throw ArgumentError("bilateral sigmas must be positive");
    const int r = static_cast<int>(std::ceil(2.0 * sigma_s));
    const int side = 2 * r + 1;
    std::vector<double> spatial(static_cast<std::size_t>(side * side));
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            spatial[static_cast<std::size_t>((dy + r) * side + dx + r)] =
                std::exp(-static_cast<double>(dy * dy + dx * dx) / (2.0 * sigma_s * sigma_s));
    const double inv_2r2 = 1.0 / (2.0 * sigma_r * sigma_r);
    const int w = static_cast<int>(depth.width);
    const int h = static_cast<int>(depth.height);
    DepthMap out = depth;

    auto row = [&](int y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y * w + x);
            if (!depth.is_valid(i)) continue;
            const double d0 = depth.depth_m[i];
            double num = 0.0;
            double den = 0.0;
            for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy) {
                const double* sw = &spatial[static_cast<std::size_t>((yy - y + r) * side + r - x)];
                for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
                    const std::size_t j = static_cast<std::size_t>(yy * w + xx);
                    if (!depth.valid[j]) continue;
                    const double dr = depth.depth_m[j] - d0;
                    const double wgt = sw[xx] * std::exp(-dr * dr * inv_2r2);
                    num += wgt * depth.depth_m[j];
                    den += wgt;
                }
            }
            out.depth_m[i] = num / den;
        }
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (int y = 0; y < h; ++y) row(y);
    } else {
        for (int y = 0; y < h; ++y) row(y);
    }
    return out;
}

}  // namespace itof::pipeline
