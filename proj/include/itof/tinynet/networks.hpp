#pragma once

// The three small graphs: S (spatial feature extractor), D (direct phasor estimator)
// and Global (four parallel Weibull-parameter branches).

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "itof/tinynet/conv.hpp"
#include "itof/transient_codec.hpp"

namespace itof::nn {

enum class ModelKind { D, SD };

const char* to_string(ModelKind k) noexcept;
ModelKind parse_model_kind(const std::string& s);

/// D: branch A (3x3) and branch B (1x1 on the central pixel), each width/2 maps, are
/// concatenated and passed through two hidden 1x1 layers and a 1x1 output. Input (N, 2F, 3, 3).
class DirectEstimator {
public:
    DirectEstimator() = default;
    DirectEstimator(std::size_t channels, std::size_t width);

    struct Cache {
        ConvCache a, b, h1, h2, out;
    };
    /// `residual` is (N, 2F, 1, 1) and is added to the correction.
    TensorGrid forward(const TensorGrid& x3, const TensorGrid& residual, Cache* cache, Exec exec) const;
    /// Returns the gradient with respect to x3; the residual gradient equals grad_out.
    TensorGrid backward(const TensorGrid& grad_out, const Cache& cache, Exec exec);

    std::size_t width() const noexcept { return width_; }
    std::vector<ConvLayer*> layers();
    std::vector<const ConvLayer*> layers() const;
    void init(std::mt19937_64& rng);

private:
    std::size_t width_ = 0;
    ConvLayer a_, b_, h1_, h2_, out_;
};

/// S: four valid 3x3 layers, 11x11 -> 3x3, plus the central 3x3 of the input.
class SpatialExtractor {
public:
    SpatialExtractor() = default;
    SpatialExtractor(std::size_t channels, std::size_t width);

    struct Cache {
        std::array<ConvCache, 4> conv;
    };
    TensorGrid forward(const TensorGrid& x11, Cache* cache, Exec exec) const;
    TensorGrid backward(const TensorGrid& grad_out, const Cache& cache, Exec exec);

    std::vector<ConvLayer*> layers();
    std::vector<const ConvLayer*> layers() const;
    void init(std::mt19937_64& rng);

private:
    std::array<ConvLayer, 4> conv_;
};

/// MPI-correction model mapping a measurement patch to the central-pixel direct phasors.
class MpiNet {
public:
    MpiNet() = default;
    /// d_width 0 picks 32 for D and 8 for SD.
    MpiNet(ModelKind kind, std::size_t freq_count, std::uint64_t seed, std::size_t d_width = 0);

    ModelKind kind() const noexcept { return kind_; }
    std::size_t freq_count() const noexcept { return freq_count_; }
    std::size_t channels() const noexcept { return 2 * freq_count_; }
    std::size_t d_width() const noexcept { return direct_.width(); }
    /// 3 for D, 11 for SD.
    std::size_t receptive_field() const noexcept { return kind_ == ModelKind::D ? 3 : 11; }

    struct Cache {
        TensorGrid window;
        SpatialExtractor::Cache s;
        DirectEstimator::Cache d;
    };
    /// (N, 2F, P, P) with odd P >= receptive_field -> (N, 2F, 1, 1). Only the central
    /// receptive-field window of the patch is used.
    TensorGrid forward(const TensorGrid& patch, Cache* cache = nullptr, Exec exec = Exec::parallel) const;
    /// Accumulates parameter gradients; returns the gradient with respect to the window.
    TensorGrid backward(const TensorGrid& grad_out, const Cache& cache, Exec exec = Exec::parallel);

    std::vector<ConvLayer*> layers();
    std::vector<const ConvLayer*> layers() const;
    std::vector<ParamRef> params();
    void zero_grad();
    std::size_t parameter_count() const;
    std::string summary() const;

private:
    ModelKind kind_ = ModelKind::D;
    std::size_t freq_count_ = 0;
    SpatialExtractor spatial_;
    DirectEstimator direct_;
};

/// Fixed pieces of the Global output mapping, all in bins except `mass_init`.
struct GlobalMapping {
    double b_scale = 20.0;
    double lambda_scale = 100.0;
    double lambda_floor = 1.0;  // keeps lambda^-k <= 1
    double k_floor = 1e-3;
    double mass_init = 0.2;
    double b_init = 10.0;
    double k_init = 1.5;
    double lambda_init = 100.0;
};

/// Global: 4 branches of two 1x1 layers and a scalar head, on stacked (v_g, v_d) phasors.
/// Heads map to mass m, offset db, shape k and spread lambda with
///   b = t_d + b_scale sp(r1), k = sp(r2) + k_floor, lambda = lambda_scale sp(r3) + lambda_floor,
///   a = m k / lambda^k with m = sp(r0),
/// where sp is softplus, so a >= 0, k > 0, lambda > 0 and b >= t_d >= 0 always hold.
class GlobalNet {
public:
    GlobalNet() = default;
    GlobalNet(std::size_t freq_count, std::uint64_t seed, std::size_t width = 32, GlobalMapping mapping = {});

    std::size_t freq_count() const noexcept { return freq_count_; }
    std::size_t width() const noexcept { return width_; }
    const GlobalMapping& mapping() const noexcept { return mapping_; }

    struct Cache {
        std::array<std::array<ConvCache, 3>, 4> conv;
        std::vector<std::array<double, 4>> raw;
        std::vector<WeibullParams> params;
        std::vector<double> mass;
    };
    /// `input` is (N, 4F, 1, 1); `t_d` holds the per-sample direct bin.
    std::vector<WeibullParams> forward(const TensorGrid& input, std::span<const double> t_d, Cache* cache = nullptr,
                                       Exec exec = Exec::parallel) const;
    /// `grad` holds dL/d(a, b, k, lambda) per sample.
    void backward(std::span<const std::array<double, 4>> grad, const Cache& cache, Exec exec = Exec::parallel);

    std::vector<ConvLayer*> layers();
    std::vector<const ConvLayer*> layers() const;
    std::vector<ParamRef> params();
    void zero_grad();
    std::size_t parameter_count() const;
    std::string summary() const;

private:
    std::size_t freq_count_ = 0;
    std::size_t width_ = 0;
    GlobalMapping mapping_;
    std::array<std::array<ConvLayer, 3>, 4> branch_;
};

double softplus(double x) noexcept;
double softplus_inverse(double y);
double sigmoid(double x) noexcept;

}  // namespace itof::nn
