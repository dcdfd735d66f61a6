#pragma once

// Straightforward serial versions of the hot kernels. Slow on purpose; tests and the
// benchmark compare the optimized paths against these.

#include "itof/phasor_core.hpp"
#include "itof/tinynet/conv.hpp"

namespace itof::reference {

nn::TensorGrid conv2d_forward(const nn::TensorGrid& input, const nn::ConvLayer& layer);

/// Gradients of conv2d_forward given its input and post-activation output.
nn::ConvGrads conv2d_backward(const nn::TensorGrid& grad_out, const nn::TensorGrid& input,
                              const nn::TensorGrid& output, const nn::ConvLayer& layer);

/// Direct windowed sum over valid neighbours within radius ceil(2 sigma_s).
DepthMap bilateral_filter(const DepthMap& depth, double sigma_s, double sigma_r);

}  // namespace itof::reference
