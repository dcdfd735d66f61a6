#pragma once

#include "itof/parallel.hpp"
#include "itof/phasor_core.hpp"

namespace itof::pipeline {

/// Edge-preserving smoothing over valid pixels, window radius ceil(2 sigma_s).
/// Invalid pixels pass through unchanged and never contribute.
DepthMap bilateral_filter(const DepthMap& depth, double sigma_s_px, double sigma_r_m, Exec exec = Exec::parallel);

}  // namespace itof::pipeline
