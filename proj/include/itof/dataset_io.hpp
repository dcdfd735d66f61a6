#pragma once

// TITF container: little-endian frames of sparse transients plus their measurements.
//
//   header   : "TITF" | version u16 | frame count u32
//   frame    : width u32 | height u32 | bin_count u32 | depth_step f64
//              | freq count u32 | freq f64 * n
//              | seed u64 | wall_count u32 | max_depth f64 | clipped_paths u32
//              | pixel records in row-major order
//   pixel    : gt_depth f32 | t_d u16 | E_d f32 | n_global u16 | (bin u16, value f32) * n_global
//              | (re f32, im f32) per frequency
//   chunks   : after the frames, zero or more optional chunks "WBPM" | frame index u32
//              | pixel count u32 | (a, b, k, lambda) f32 per pixel

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "itof/transient_sim.hpp"

namespace itof {

inline constexpr std::uint16_t kTitfVersion = 1;

/// Fitted Weibull parameters of one frame, (a, b, k, lambda) per pixel.
struct WeibullParamMap {
    std::uint32_t frame = 0;
    std::vector<std::array<float, 4>> params;
    friend bool operator==(const WeibullParamMap&, const WeibullParamMap&) = default;
};

struct Dataset {
    std::vector<TransientFrame> frames;
    std::vector<WeibullParamMap> weibull_maps;
};

void write_dataset(const std::vector<TransientFrame>& frames, const std::filesystem::path& path,
                   const std::vector<WeibullParamMap>& weibull_maps = {});

/// Reads a whole container. Any corruption throws FormatError; nothing partial is returned.
Dataset read_dataset(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_dataset(const std::vector<TransientFrame>& frames,
                                         const std::vector<WeibullParamMap>& weibull_maps = {});
Dataset decode_dataset(const std::vector<std::uint8_t>& bytes);

}  // namespace itof
