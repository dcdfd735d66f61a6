#pragma once

// Portable pixmap output: depth maps, signed error maps and transient plots.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "itof/phasor_core.hpp"

namespace itof::pipeline {

struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> rgb;

    Image() = default;
    Image(std::size_t w, std::size_t h, std::uint8_t fill = 255) : width(w), height(h), rgb(3 * w * h, fill) {}
    void set(std::size_t x, std::size_t y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
    std::array<std::uint8_t, 3> get(std::size_t x, std::size_t y) const;
};

std::vector<std::uint8_t> encode_ppm(const Image& img);
void write_ppm(const Image& img, const std::filesystem::path& path);

/// Grayscale, near = dark; invalid pixels black.
Image depth_image(const DepthMap& depth, double lo_m, double hi_m);

/// Green at zero error fading to red at |error| >= range_m. Overestimates lean towards
/// pure red, underestimates keep a blue tint. Invalid pixels black.
Image error_image(const DepthMap& pred, const DepthMap& gt, double range_m);

inline constexpr std::array<std::uint8_t, 3> kDirectColor{220, 30, 30};
inline constexpr std::array<std::uint8_t, 3> kGlobalColor{40, 80, 200};
inline constexpr std::array<std::uint8_t, 3> kOverlayColor{20, 160, 60};

/// Bar plot of a transient. The direct bin is drawn as a full-height red bar; global bins
/// are blue and scaled to their own maximum; `overlay` (e.g. a fitted lobe) is a green
/// line on the global scale.
Image plot_transient(std::span<const double> global, std::size_t t_d, double e_d,
                     std::span<const double> overlay = {}, std::size_t width = 640, std::size_t height = 240);

}  // namespace itof::pipeline
