#pragma once

// Patch tensors are (N, 2F, P, P); channel 2f holds the real and 2f + 1 the imaginary
// part of frequency f.

#include <cstdint>
#include <optional>
#include <vector>

#include "itof/tinynet/tensor.hpp"
#include "itof/transient_sim.hpp"

namespace itof::pipeline {

struct PatchBatch {
    std::size_t patch = 0;
    std::size_t freq_count = 0;
    nn::TensorGrid input;
    nn::TensorGrid direct;             // (N, 2F, 1, 1) ideal direct phasors of the central pixel
    std::vector<double> direct_phase;  // N x F
    std::vector<std::size_t> frame;
    std::vector<std::size_t> row;  // top-left corner
    std::vector<std::size_t> col;
    std::vector<double> scale;  // 1 until normalized

    std::size_t size() const noexcept { return row.size(); }
    std::size_t center_pixel(std::size_t i, std::size_t width) const {
        return (row[i] + patch / 2) * width + col[i] + patch / 2;
    }
};

/// `count` patches with uniformly random in-bounds corners. Inputs come from `measurements`
/// (which may be noisy); targets from the transient records of `frame`.
PatchBatch extract_patches(const TransientFrame& frame, const PhasorGrid& measurements, std::size_t patch,
                           std::size_t count, std::uint64_t seed, std::size_t frame_index = 0);

/// Concatenates batches with equal patch size and frequency count.
PatchBatch concat(const std::vector<PatchBatch>& parts);

/// Subset of `b` in the given order.
PatchBatch gather(const PatchBatch& b, std::span<const std::size_t> order);

/// Mean lowest-frequency amplitude over the window of sample `i`.
double patch_scale(const nn::TensorGrid& patches, std::size_t i);

struct NormalizedPatch {
    nn::TensorGrid patch;
    double scale = 1.0;
};

/// Single patch (1, 2F, P, P) divided by its mean lowest-frequency amplitude; empty when
/// that amplitude is zero.
std::optional<NormalizedPatch> normalize_patch(const nn::TensorGrid& patch);

/// Normalizes inputs and direct targets in place, dropping zero-amplitude patches.
/// Returns the number dropped.
std::size_t normalize_batch(PatchBatch& b);

/// Reflect-padded P x P windows centred on pixels [first, first + count) of the grid.
nn::TensorGrid pixel_windows(const PhasorGrid& grid, std::size_t patch, std::size_t first, std::size_t count);

}  // namespace itof::pipeline
