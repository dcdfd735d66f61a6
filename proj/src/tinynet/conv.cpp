#include "itof/tinynet/conv.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <utility>

namespace itof::nn {

namespace {

using ColMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Chunking is fixed by the shapes alone, so results never depend on the team size.
constexpr std::size_t kColumnsPerChunk = 4096;

struct Geometry {
    std::size_t n, c, h, w, ho, wo, positions, k_rows, per_chunk, chunks;
};

Geometry geometry(const TensorGrid& in, const ConvLayer& layer) {
    Geometry g{};
    g.n = in.n();
    g.c = in.c();
    g.h = in.h();
    g.w = in.w();
    g.ho = g.h - layer.kh + 1;
    g.wo = g.w - layer.kw + 1;
    g.positions = g.ho * g.wo;
    g.k_rows = layer.fan_in();
    g.per_chunk = std::max<std::size_t>(1, kColumnsPerChunk / g.positions);
    g.chunks = (g.n + g.per_chunk - 1) / g.per_chunk;
    return g;
}

void im2col(const TensorGrid& in, const ConvLayer& L, const Geometry& g, std::size_t s0, std::size_t count,
            ColMat& cols) {
    cols.resize(static_cast<Eigen::Index>(g.k_rows), static_cast<Eigen::Index>(count * g.positions));
    for (std::size_t s = 0; s < count; ++s) {
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
            for (std::size_t ox = 0; ox < g.wo; ++ox) {
                double* col = cols.col(static_cast<Eigen::Index>(s * g.positions + oy * g.wo + ox)).data();
                std::size_t r = 0;
                for (std::size_t i = 0; i < L.in_ch; ++i) {
                    for (std::size_t ky = 0; ky < L.kh; ++ky) {
                        const double* src = &in.at(s0 + s, i, oy + ky, ox);
                        for (std::size_t kx = 0; kx < L.kw; ++kx) col[r++] = src[kx];
                    }
                }
            }
        }
    }
}

void col2im_add(const ColMat& cols, const ConvLayer& L, const Geometry& g, std::size_t s0, std::size_t count,
                TensorGrid& out) {
    for (std::size_t s = 0; s < count; ++s) {
        for (std::size_t oy = 0; oy < g.ho; ++oy) {
            for (std::size_t ox = 0; ox < g.wo; ++ox) {
                const double* col = cols.col(static_cast<Eigen::Index>(s * g.positions + oy * g.wo + ox)).data();
                std::size_t r = 0;
                for (std::size_t i = 0; i < L.in_ch; ++i) {
                    for (std::size_t ky = 0; ky < L.kh; ++ky) {
                        double* dst = &out.at(s0 + s, i, oy + ky, ox);
                        for (std::size_t kx = 0; kx < L.kw; ++kx) dst[kx] += col[r++];
                    }
                }
            }
        }
    }
}

Eigen::Map<const RowMat> kernel_map(const ConvLayer& L) {
    return {L.kernel.data(), static_cast<Eigen::Index>(L.out_ch), static_cast<Eigen::Index>(L.fan_in())};
}

}  // namespace

ConvLayer::ConvLayer(std::string name_, std::size_t in, std::size_t out, std::size_t kh_, std::size_t kw_,
                     Activation act)
    : name(std::move(name_)), in_ch(in), out_ch(out), kh(kh_), kw(kw_), activation(act),
      kernel(in * out * kh_ * kw_, 0.0), bias(out, 0.0), grad_kernel(kernel.size(), 0.0),
      grad_bias(out, 0.0) {
    if (in == 0 || out == 0) throw ArgumentError("conv layer needs non-zero channel counts");
    if (kh_ % 2 == 0 || kw_ % 2 == 0) throw ArgumentError("conv kernel dims must be odd");
}

void ConvLayer::init_uniform(std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (auto& v : kernel) v = u(rng);
    std::fill(bias.begin(), bias.end(), 0.0);
    touch();
}

void ConvLayer::init_zero() {
    std::fill(kernel.begin(), kernel.end(), 0.0);
    std::fill(bias.begin(), bias.end(), 0.0);
    touch();
}

void ConvLayer::zero_grad() {
    std::fill(grad_kernel.begin(), grad_kernel.end(), 0.0);
    std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
}

void ConvLayer::validate() const {
    if (kernel.size() != out_ch * in_ch * kh * kw || bias.size() != out_ch) {
        throw ArgumentError("conv layer " + name + " has inconsistent storage");
    }
    for (double v : kernel) {
        if (!std::isfinite(v)) throw ArgumentError("conv layer " + name + " has non-finite weights");
    }
    for (double v : bias) {
        if (!std::isfinite(v)) throw ArgumentError("conv layer " + name + " has non-finite bias");
    }
}

std::vector<ParamRef> ConvLayer::params() {
    return {{name + ".kernel", {out_ch, in_ch, kh, kw}, kernel, grad_kernel, &version},
            {name + ".bias", {out_ch}, bias, grad_bias, &version}};
}

TensorGrid conv2d_forward(const TensorGrid& input, const ConvLayer& layer, ConvCache* cache, Exec exec) {
    if (input.c() != layer.in_ch) {
        throw ArgumentError("conv " + layer.name + " expects " + std::to_string(layer.in_ch) + " channels, got " +
                            input.shape_string());
    }
    if (input.h() < layer.kh || input.w() < layer.kw) {
        throw ArgumentError("conv " + layer.name + " input " + input.shape_string() + " smaller than kernel");
    }
    const Geometry g = geometry(input, layer);
    TensorGrid out(g.n, layer.out_ch, g.ho, g.wo);
    const auto W = kernel_map(layer);
    const bool relu = layer.activation == Activation::relu;

    auto run_chunk = [&](std::size_t chunk) {
        const std::size_t s0 = chunk * g.per_chunk;
        const std::size_t count = std::min(g.per_chunk, g.n - s0);
        ColMat cols;
        im2col(input, layer, g, s0, count, cols);
        const ColMat r = W * cols;
        for (std::size_t s = 0; s < count; ++s) {
            for (std::size_t o = 0; o < layer.out_ch; ++o) {
                double* dst = &out.at(s0 + s, o, 0, 0);
                for (std::size_t p = 0; p < g.positions; ++p) {
                    const double v = r(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(s * g.positions + p)) +
                                     layer.bias[o];
                    dst[p] = relu && v < 0.0 ? 0.0 : v;
                }
            }
        }
    };

    const auto chunks = static_cast<std::ptrdiff_t>(g.chunks);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t c = 0; c < chunks; ++c) run_chunk(static_cast<std::size_t>(c));
    } else {
        for (std::ptrdiff_t c = 0; c < chunks; ++c) run_chunk(static_cast<std::size_t>(c));
    }

    if (cache) {
        cache->layer = &layer;
        cache->version = layer.version;
        cache->input = input;
        cache->output = out;
    }
    return out;
}

ConvGrads conv2d_backward(const TensorGrid& grad_out, const ConvCache& cache, const ConvLayer& layer, Exec exec) {
    if (cache.layer != &layer) throw ArgumentError("conv cache belongs to a different layer");
    if (cache.version != layer.version) throw ArgumentError("conv cache for " + layer.name + " is stale");
    if (!grad_out.same_shape(cache.output)) {
        throw ArgumentError("grad_out " + grad_out.shape_string() + " does not match forward output " +
                            cache.output.shape_string());
    }
    const TensorGrid& input = cache.input;
    const Geometry g = geometry(input, layer);
    const auto W = kernel_map(layer);
    const auto K = static_cast<Eigen::Index>(g.k_rows);
    const auto O = static_cast<Eigen::Index>(layer.out_ch);
    const bool relu = layer.activation == Activation::relu;

    ConvGrads res;
    res.grad_input = TensorGrid(g.n, g.c, g.h, g.w);
    std::vector<RowMat> part_k(g.chunks);
    std::vector<Eigen::VectorXd> part_b(g.chunks);

    auto run_chunk = [&](std::size_t chunk) {
        const std::size_t s0 = chunk * g.per_chunk;
        const std::size_t count = std::min(g.per_chunk, g.n - s0);
        ColMat gm(O, static_cast<Eigen::Index>(count * g.positions));
        for (std::size_t s = 0; s < count; ++s) {
            for (std::size_t o = 0; o < layer.out_ch; ++o) {
                const double* go = &grad_out.at(s0 + s, o, 0, 0);
                const double* y = &cache.output.at(s0 + s, o, 0, 0);
                for (std::size_t p = 0; p < g.positions; ++p) {
                    gm(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(s * g.positions + p)) =
                        relu && !(y[p] > 0.0) ? 0.0 : go[p];
                }
            }
        }
        ColMat cols;
        im2col(input, layer, g, s0, count, cols);
        part_k[chunk] = gm * cols.transpose();
        part_b[chunk] = gm.rowwise().sum();
        const ColMat gcols = W.transpose() * gm;
        col2im_add(gcols, layer, g, s0, count, res.grad_input);
    };

    const auto chunks = static_cast<std::ptrdiff_t>(g.chunks);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t c = 0; c < chunks; ++c) run_chunk(static_cast<std::size_t>(c));
    } else {
        for (std::ptrdiff_t c = 0; c < chunks; ++c) run_chunk(static_cast<std::size_t>(c));
    }

    // ordered reduction over chunks
    RowMat gk = RowMat::Zero(O, K);
    Eigen::VectorXd gb = Eigen::VectorXd::Zero(O);
    for (std::size_t c = 0; c < g.chunks; ++c) {
        gk += part_k[c];
        gb += part_b[c];
    }
    res.grad_kernel.assign(gk.data(), gk.data() + gk.size());
    res.grad_bias.assign(gb.data(), gb.data() + gb.size());
    return res;
}

void accumulate(ConvLayer& layer, const ConvGrads& g) {
    for (std::size_t i = 0; i < layer.grad_kernel.size(); ++i) layer.grad_kernel[i] += g.grad_kernel[i];
    for (std::size_t i = 0; i < layer.grad_bias.size(); ++i) layer.grad_bias[i] += g.grad_bias[i];
}

}  // namespace itof::nn
