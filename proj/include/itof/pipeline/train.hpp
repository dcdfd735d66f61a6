#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "itof/parallel.hpp"
#include "itof/tinynet/checkpoint.hpp"
#include "itof/transient_sim.hpp"

namespace itof::pipeline {

enum class LossKind { vd, phase };

const char* to_string(LossKind k) noexcept;
LossKind parse_loss_kind(const std::string& s);

struct TrainConfig {
    nn::ModelKind model = nn::ModelKind::D;
    std::size_t d_width = 0;  // 0: 32 for D, 8 for SD
    FrequencySet freqs = default_frequencies();
    std::size_t patch = 11;
    std::size_t batch = 2048;
    double lr = 1e-4;
    std::size_t epochs = 1;
    std::size_t patches_per_frame = 256;  // fresh random patches per frame and epoch
    std::uint64_t seed = 1;
    LossKind loss = LossKind::vd;
    NoiseSpec noise;

    // second stage: Global on top of the frozen direct model
    std::size_t global_epochs = 0;
    std::size_t global_batch = 256;
    std::size_t global_patches_per_frame = 256;
    double global_lr = 1e-3;

    Exec exec = Exec::parallel;

    void validate() const;
};

struct LossPoint {
    int stage = 1;
    std::size_t epoch = 0;
    std::size_t step = 0;
    double loss = 0.0;
};

struct TrainResult {
    nn::Checkpoint checkpoint;
    std::vector<LossPoint> curve;
    std::size_t skipped_patches = 0;
};

using EpochCallback = std::function<void(int stage, std::size_t epoch, double mean_loss)>;

/// Stage 1 trains D or S+D on the measurement patches; stage 2 (if global_epochs > 0)
/// freezes it and trains Global with the EMD loss. Frames are re-measured when their
/// frequencies differ from the config. Throws DivergenceError on a non-finite loss.
TrainResult train(const TrainConfig& config, const std::vector<TransientFrame>& frames,
                  const EpochCallback& on_epoch = {});

/// Measurements of `frame` at `freqs`, with the given noise drawn from a seed derived
/// from `seed` and the frame's scene seed.
PhasorGrid frame_measurements(const TransientFrame& frame, const FrequencySet& freqs, const NoiseSpec& noise,
                              std::uint64_t seed);

std::string loss_curve_csv(const std::vector<LossPoint>& curve);

}  // namespace itof::pipeline
