#pragma once

// Training losses. Phasor tensors are (N, 2F, 1, 1) with channel 2f holding the real
// and 2f + 1 the imaginary part of frequency f.

#include <array>
#include <span>
#include <vector>

#include "itof/parallel.hpp"
#include "itof/tinynet/tensor.hpp"
#include "itof/transient_codec.hpp"

namespace itof::nn {

struct LossResult {
    double value = 0.0;
    TensorGrid grad;
    std::size_t masked = 0;
};

/// Mean absolute error over every real/imag entry; subgradient 0 at ties.
LossResult loss_mae_vd(const TensorGrid& pred, const TensorGrid& gt);

/// Mean wrap-aware absolute phase error. `gt_phase` is N x F, row-major. Predicted
/// phasors with magnitude <= eps are left out of the mean and reported in `masked`.
LossResult loss_mae_phase(const TensorGrid& pred, std::span<const double> gt_phase, double eps);

struct GlobalLossResult {
    double value = 0.0;
    std::vector<std::array<double, 4>> grad;  // dL/d(a, b, k, lambda)
};

/// Mean over samples of emd(weibull_eval(p), target).
GlobalLossResult loss_emd_global(std::span<const WeibullParams> params,
                                 std::span<const std::vector<double>> targets, Exec exec = Exec::parallel);

/// Wraps an angle difference into (-pi, pi].
double wrap_angle(double d) noexcept;

}  // namespace itof::nn
