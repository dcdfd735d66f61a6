#pragma once

// TNET weight container, little-endian:
//   "TNET" | version u16 | model u8 (0 = D, 1 = SD) | d_width u32 | freq count u32 | freq f64 * n
//   | patch u32 | depth_step f64 | bin_count u32 | has_global u8
//   | [global width u32 | mapping f64 * 8]
//   | tensor count u32 | tensors: name (u16 length + bytes) | rank u8 | dim u32 * rank | f32 * numel

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "itof/phasor_core.hpp"
#include "itof/tinynet/networks.hpp"

namespace itof::nn {

inline constexpr std::uint16_t kTnetVersion = 1;

struct Checkpoint {
    FrequencySet freqs{20e6};
    std::size_t patch = 11;  // normalization window
    double depth_step_m = 0.0025;
    std::size_t bin_count = 2000;
    MpiNet net;
    std::optional<GlobalNet> global;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Rounds all weights to f32 in place, matching what a save/load cycle produces.
void round_to_stored_precision(Checkpoint& ckpt);

}  // namespace itof::nn
