#include "itof/pipeline/report.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "../byte_io.hpp"

namespace itof::pipeline {

void Image::set(std::size_t x, std::size_t y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    auto* p = &rgb[3 * (y * width + x)];
    p[0] = r;
    p[1] = g;
    p[2] = b;
}

std::array<std::uint8_t, 3> Image::get(std::size_t x, std::size_t y) const {
    const auto* p = &rgb[3 * (y * width + x)];
    return {p[0], p[1], p[2]};
}

std::vector<std::uint8_t> encode_ppm(const Image& img) {
    const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.rgb.begin(), img.rgb.end());
    return out;
}

void write_ppm(const Image& img, const std::filesystem::path& path) { detail::write_file(path, encode_ppm(img)); }

namespace {

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

}  // namespace

Image depth_image(const DepthMap& d, double lo, double hi) {
    Image img(d.width, d.height, 0);
    const double span = hi > lo ? hi - lo : 1.0;
    for (std::size_t y = 0; y < d.height; ++y)
        for (std::size_t x = 0; x < d.width; ++x) {
            const std::size_t i = y * d.width + x;
            if (!d.valid[i]) continue;
            const auto g = to_byte((d.depth_m[i] - lo) / span);
            img.set(x, y, g, g, g);
        }
    return img;
}

Image error_image(const DepthMap& pred, const DepthMap& gt, double range_m) {
    if (pred.width != gt.width || pred.height != gt.height) throw ArgumentError("error image: size mismatch");
    if (!(range_m > 0.0)) throw ArgumentError("error image: range must be positive");
    Image img(pred.width, pred.height, 0);
    for (std::size_t y = 0; y < pred.height; ++y)
        for (std::size_t x = 0; x < pred.width; ++x) {
            const std::size_t i = y * pred.width + x;
            if (!pred.valid[i] || !gt.valid[i]) continue;
            const double e = pred.depth_m[i] - gt.depth_m[i];
            const double t = std::min(1.0, std::abs(e) / range_m);
            img.set(x, y, to_byte(t), to_byte(1.0 - t), e < 0.0 ? to_byte(0.6 * t) : 0);
        }
    return img;
}

Image plot_transient(std::span<const double> global, std::size_t t_d, double e_d, std::span<const double> overlay,
                     std::size_t width, std::size_t height) {
    if (width < 16 || height < 16) throw ArgumentError("plot too small");
    Image img(width, height, 255);
    std::size_t last = t_d;
    for (std::size_t t = 0; t < global.size(); ++t)
        if (global[t] != 0.0) last = std::max(last, t);
    for (std::size_t t = 0; t < overlay.size(); ++t)
        if (overlay[t] > 0.0 && t < global.size()) last = std::max(last, t);
    const std::size_t shown = std::max<std::size_t>(last + last / 10 + 2, 8);
    const std::size_t margin = 4;
    const std::size_t plot_w = width - 2 * margin;
    const std::size_t plot_h = height - 2 * margin;
    const double bins_per_col = static_cast<double>(shown) / static_cast<double>(plot_w);

    auto col_range = [&](std::size_t c) {
        const auto b0 = static_cast<std::size_t>(std::floor(static_cast<double>(c) * bins_per_col));
        auto b1 = static_cast<std::size_t>(std::floor(static_cast<double>(c + 1) * bins_per_col));
        return std::pair<std::size_t, std::size_t>{b0, std::max(b1, b0 + 1)};
    };
    auto col_max = [&](std::span<const double> v, std::size_t c) {
        auto [b0, b1] = col_range(c);
        double m = 0.0;
        for (std::size_t b = b0; b < b1 && b < v.size(); ++b) m = std::max(m, v[b]);
        return m;
    };
    double vmax = 0.0;
    for (double v : global) vmax = std::max(vmax, v);
    for (double v : overlay) vmax = std::max(vmax, v);
    if (vmax <= 0.0) vmax = 1.0;

    const std::size_t base = margin + plot_h;  // row of the x axis
    for (std::size_t x = margin; x < margin + plot_w; ++x) img.set(x, base, 0, 0, 0);
    for (std::size_t c = 0; c < plot_w; ++c) {
        const std::size_t x = margin + c;
        const auto h = static_cast<std::size_t>(std::lround(col_max(global, c) / vmax * static_cast<double>(plot_h - 1)));
        for (std::size_t k = 1; k <= h; ++k) img.set(x, base - k, kGlobalColor[0], kGlobalColor[1], kGlobalColor[2]);
    }
    if (!overlay.empty()) {
        for (std::size_t c = 0; c < plot_w; ++c) {
            const auto h = static_cast<std::size_t>(std::lround(col_max(overlay, c) / vmax * static_cast<double>(plot_h - 1)));
            if (h > 0) img.set(margin + c, base - h, kOverlayColor[0], kOverlayColor[1], kOverlayColor[2]);
        }
    }
    if (e_d > 0.0) {
        const auto c = static_cast<std::size_t>(static_cast<double>(t_d) / bins_per_col);
        const std::size_t x = margin + std::min(c, plot_w - 1);
        for (std::size_t k = 1; k < plot_h; ++k) {
            for (std::size_t dx = 0; dx < 2 && x + dx < margin + plot_w; ++dx) {
                img.set(x + dx, base - k, kDirectColor[0], kDirectColor[1], kDirectColor[2]);
            }
        }
    }
    return img;
}

}  // namespace itof::pipeline
