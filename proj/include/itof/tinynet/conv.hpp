#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "itof/parallel.hpp"
#include "itof/tinynet/tensor.hpp"

namespace itof::nn {

enum class Activation { identity, relu };

/// Valid (unpadded) 2-D cross-correlation layer. Kernel layout (out_ch, in_ch, kh, kw).
/// The gradient accumulators live next to the weights; `version` changes whenever the
/// weights do, which is how stale forward caches are detected.
struct ConvLayer {
    std::string name;
    std::size_t in_ch = 0;
    std::size_t out_ch = 0;
    std::size_t kh = 1;
    std::size_t kw = 1;
    Activation activation = Activation::identity;
    std::vector<double> kernel;
    std::vector<double> bias;
    std::vector<double> grad_kernel;
    std::vector<double> grad_bias;
    std::uint64_t version = 0;

    ConvLayer() = default;
    ConvLayer(std::string name, std::size_t in_ch, std::size_t out_ch, std::size_t kh, std::size_t kw,
              Activation act);

    std::size_t fan_in() const noexcept { return in_ch * kh * kw; }
    std::size_t parameter_count() const noexcept { return kernel.size() + bias.size(); }
    double& w(std::size_t o, std::size_t i, std::size_t y, std::size_t x) {
        return kernel[((o * in_ch + i) * kh + y) * kw + x];
    }
    double w(std::size_t o, std::size_t i, std::size_t y, std::size_t x) const {
        return kernel[((o * in_ch + i) * kh + y) * kw + x];
    }

    /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero bias.
    void init_uniform(std::mt19937_64& rng);
    void init_zero();
    void zero_grad();
    void touch() noexcept { ++version; }
    void validate() const;

    std::vector<ParamRef> params();
};

/// Everything conv2d_backward needs from the matching forward call.
struct ConvCache {
    const ConvLayer* layer = nullptr;
    std::uint64_t version = 0;
    TensorGrid input;
    TensorGrid output;  // post-activation
};

TensorGrid conv2d_forward(const TensorGrid& input, const ConvLayer& layer, ConvCache* cache = nullptr,
                          Exec exec = Exec::parallel);

struct ConvGrads {
    TensorGrid grad_input;
    std::vector<double> grad_kernel;
    std::vector<double> grad_bias;
};

/// Reverse pass for `layer`; throws if `cache` came from another layer or older weights.
ConvGrads conv2d_backward(const TensorGrid& grad_out, const ConvCache& cache, const ConvLayer& layer,
                          Exec exec = Exec::parallel);

/// Adds grads into layer.grad_kernel / layer.grad_bias.
void accumulate(ConvLayer& layer, const ConvGrads& g);

}  // namespace itof::nn
