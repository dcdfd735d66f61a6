#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "itof/tinynet/tensor.hpp"

namespace itof::nn {

struct AdamConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct OptimizerState {
    AdamConfig config;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

/// Bias-corrected ADAM update of every parameter in `params` from its `grad`. Moments are
/// allocated on the first call; later calls must pass parameters of the same sizes.
void adam_step(OptimizerState& state, std::span<const ParamRef> params);

}  // namespace itof::nn
