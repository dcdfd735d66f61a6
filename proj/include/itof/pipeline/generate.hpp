#pragma once

#include <cstdint>
#include <vector>

#include "itof/parallel.hpp"
#include "itof/transient_sim.hpp"

namespace itof::pipeline {

struct GenConfig {
    std::size_t scenes = 1;
    int walls = 0;  // 1..3, or 0 for the 53/95/74 mix
    std::size_t width = 64;
    std::size_t height = 64;
    std::size_t bins = 2000;
    double depth_step_m = 0.0025;
    double max_depth_m = 5.0;
    std::size_t bounce_samples = 2304;
    FrequencySet freqs = default_frequencies();
    double shift_augment_m = 0.0;  // > 0 appends one shifted copy per scene
    std::uint64_t seed = 1;

    void validate() const;
};

/// Renders the scenes of `config`; shifted copies, if any, follow their source scene.
std::vector<TransientFrame> generate_frames(const GenConfig& config, Exec exec = Exec::parallel);

}  // namespace itof::pipeline
