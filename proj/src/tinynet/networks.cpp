#include "itof/tinynet/networks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace itof::nn {

double softplus(double x) noexcept { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double softplus_inverse(double y) {
    if (!(y > 0.0)) throw ArgumentError("softplus_inverse needs y > 0");
    return y > 30.0 ? y : std::log(std::expm1(y));
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

const char* to_string(ModelKind k) noexcept { return k == ModelKind::D ? "D" : "SD"; }

ModelKind parse_model_kind(const std::string& s) {
    if (s == "D" || s == "d") return ModelKind::D;
    if (s == "SD" || s == "sd") return ModelKind::SD;
    throw ArgumentError("unknown model '" + s + "' (expected D or SD)");
}

namespace {

std::pair<TensorGrid, TensorGrid> split_channels(const TensorGrid& t, std::size_t first) {
    TensorGrid a(t.n(), first, t.h(), t.w());
    TensorGrid b(t.n(), t.c() - first, t.h(), t.w());
    const std::size_t plane = t.h() * t.w();
    for (std::size_t s = 0; s < t.n(); ++s) {
        const double* src = &t.at(s, 0, 0, 0);
        std::copy_n(src, first * plane, &a.at(s, 0, 0, 0));
        std::copy_n(src + first * plane, (t.c() - first) * plane, &b.at(s, 0, 0, 0));
    }
    return {std::move(a), std::move(b)};
}

// dst[:, :, y0 + i, x0 + j] += src[:, :, i, j]
void add_at(TensorGrid& dst, const TensorGrid& src, std::size_t y0, std::size_t x0) {
    for (std::size_t s = 0; s < src.n(); ++s)
        for (std::size_t c = 0; c < src.c(); ++c)
            for (std::size_t y = 0; y < src.h(); ++y)
                for (std::size_t x = 0; x < src.w(); ++x) dst.at(s, c, y0 + y, x0 + x) += src.at(s, c, y, x);
}

void add_in_place(TensorGrid& dst, const TensorGrid& src) {
    auto d = dst.values();
    auto s = src.values();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

TensorGrid back(ConvLayer& layer, const TensorGrid& grad, const ConvCache& cache, Exec exec) {
    auto g = conv2d_backward(grad, cache, layer, exec);
    accumulate(layer, g);
    return std::move(g.grad_input);
}

std::vector<ParamRef> collect(const std::vector<ConvLayer*>& layers) {
    std::vector<ParamRef> out;
    for (auto* l : layers) {
        for (auto& p : l->params()) out.push_back(std::move(p));
    }
    return out;
}

std::size_t count(const std::vector<const ConvLayer*>& layers) {
    std::size_t n = 0;
    for (const auto* l : layers) n += l->parameter_count();
    return n;
}

std::string describe(const std::string& title, const std::vector<const ConvLayer*>& layers) {
    std::string out = title + "\n";
    char line[160];
    for (const auto* l : layers) {
        std::snprintf(line, sizeof line, "  %-12s %3zu -> %-3zu %zux%zu %-8s %7zu\n", l->name.c_str(), l->in_ch,
                      l->out_ch, l->kh, l->kw, l->activation == Activation::relu ? "relu" : "identity",
                      l->parameter_count());
        out += line;
    }
    std::snprintf(line, sizeof line, "  trainable parameters: %zu\n", count(layers));
    out += line;
    return out;
}

}  // namespace

// ---- D ---------------------------------------------------------------------

DirectEstimator::DirectEstimator(std::size_t ch, std::size_t width)
    : width_(width),
      a_("d.branch3", ch, width / 2, 3, 3, Activation::relu),
      b_("d.branch1", ch, width / 2, 1, 1, Activation::relu),
      h1_("d.hidden1", width, width, 1, 1, Activation::relu),
      h2_("d.hidden2", width, width, 1, 1, Activation::relu),
      out_("d.out", width, ch, 1, 1, Activation::identity) {
    if (width < 2 || width % 2 != 0) throw ArgumentError("D width must be even and >= 2");
}

void DirectEstimator::init(std::mt19937_64& rng) {
    a_.init_uniform(rng);
    b_.init_uniform(rng);
    h1_.init_uniform(rng);
    h2_.init_uniform(rng);
    out_.init_zero();
}

TensorGrid DirectEstimator::forward(const TensorGrid& x3, const TensorGrid& residual, Cache* cache,
                                    Exec exec) const {
    if (x3.h() != 3 || x3.w() != 3) throw ArgumentError("D expects a 3x3 input, got " + x3.shape_string());
    if (residual.n() != x3.n() || residual.c() != out_.out_ch || residual.h() != 1 || residual.w() != 1) {
        throw ArgumentError("D residual has shape " + residual.shape_string());
    }
    auto a = conv2d_forward(x3, a_, cache ? &cache->a : nullptr, exec);
    auto b = conv2d_forward(x3.crop(1, 1, 1, 1), b_, cache ? &cache->b : nullptr, exec);
    auto h = conv2d_forward(TensorGrid::concat_channels(a, b), h1_, cache ? &cache->h1 : nullptr, exec);
    h = conv2d_forward(h, h2_, cache ? &cache->h2 : nullptr, exec);
    auto y = conv2d_forward(h, out_, cache ? &cache->out : nullptr, exec);
    add_in_place(y, residual);
    return y;
}

TensorGrid DirectEstimator::backward(const TensorGrid& grad_out, const Cache& cache, Exec exec) {
    auto g = back(out_, grad_out, cache.out, exec);
    g = back(h2_, g, cache.h2, exec);
    g = back(h1_, g, cache.h1, exec);
    auto [ga, gb] = split_channels(g, width_ / 2);
    auto gx = back(a_, ga, cache.a, exec);
    add_at(gx, back(b_, gb, cache.b, exec), 1, 1);
    return gx;
}

std::vector<ConvLayer*> DirectEstimator::layers() { return {&a_, &b_, &h1_, &h2_, &out_}; }
std::vector<const ConvLayer*> DirectEstimator::layers() const { return {&a_, &b_, &h1_, &h2_, &out_}; }

// ---- S ---------------------------------------------------------------------

SpatialExtractor::SpatialExtractor(std::size_t ch, std::size_t width)
    : conv_{ConvLayer("s.conv1", ch, width, 3, 3, Activation::relu),
            ConvLayer("s.conv2", width, width, 3, 3, Activation::relu),
            ConvLayer("s.conv3", width, width, 3, 3, Activation::relu),
            ConvLayer("s.conv4", width, ch, 3, 3, Activation::identity)} {}

void SpatialExtractor::init(std::mt19937_64& rng) {
    for (std::size_t i = 0; i < 3; ++i) conv_[i].init_uniform(rng);
    conv_[3].init_zero();
}

TensorGrid SpatialExtractor::forward(const TensorGrid& x, Cache* cache, Exec exec) const {
    if (x.h() < 9 || x.w() < 9) throw ArgumentError("S expects at least 9x9, got " + x.shape_string());
    TensorGrid h = x;
    for (std::size_t i = 0; i < 4; ++i) h = conv2d_forward(h, conv_[i], cache ? &cache->conv[i] : nullptr, exec);
    add_in_place(h, x.crop(4, 4, h.h(), h.w()));
    return h;
}

TensorGrid SpatialExtractor::backward(const TensorGrid& grad_out, const Cache& cache, Exec exec) {
    TensorGrid g = grad_out;
    for (std::size_t i = 4; i-- > 0;) g = back(conv_[i], g, cache.conv[i], exec);
    add_at(g, grad_out, 4, 4);
    return g;
}

std::vector<ConvLayer*> SpatialExtractor::layers() { return {&conv_[0], &conv_[1], &conv_[2], &conv_[3]}; }
std::vector<const ConvLayer*> SpatialExtractor::layers() const {
    return {&conv_[0], &conv_[1], &conv_[2], &conv_[3]};
}

// ---- S + D -----------------------------------------------------------------

MpiNet::MpiNet(ModelKind kind, std::size_t freq_count, std::uint64_t seed, std::size_t d_width)
    : kind_(kind), freq_count_(freq_count) {
    if (freq_count == 0) throw ArgumentError("network needs at least one frequency");
    if (d_width == 0) d_width = kind == ModelKind::D ? 32 : 8;
    std::mt19937_64 rng(seed);
    if (kind == ModelKind::SD) {
        spatial_ = SpatialExtractor(channels(), 32);
        spatial_.init(rng);
    }
    direct_ = DirectEstimator(channels(), d_width);
    direct_.init(rng);
}

TensorGrid MpiNet::forward(const TensorGrid& patch, Cache* cache, Exec exec) const {
    const std::size_t rf = receptive_field();
    if (patch.c() != channels()) {
        throw ArgumentError("patch has " + std::to_string(patch.c()) + " channels, network expects " +
                            std::to_string(channels()));
    }
    if (patch.h() != patch.w() || patch.h() % 2 == 0) throw ArgumentError("patch must be square with odd size");
    if (patch.h() < rf) {
        throw ArgumentError("patch " + patch.shape_string() + " smaller than receptive field " + std::to_string(rf));
    }
    const std::size_t off = (patch.h() - rf) / 2;
    TensorGrid window = off == 0 ? patch : patch.crop(off, off, rf, rf);
    TensorGrid residual = window.crop(rf / 2, rf / 2, 1, 1);
    TensorGrid y;
    if (kind_ == ModelKind::D) {
        y = direct_.forward(window, residual, cache ? &cache->d : nullptr, exec);
    } else {
        auto s = spatial_.forward(window, cache ? &cache->s : nullptr, exec);
        y = direct_.forward(s, residual, cache ? &cache->d : nullptr, exec);
    }
    if (cache) cache->window = std::move(window);
    return y;
}

TensorGrid MpiNet::backward(const TensorGrid& grad_out, const Cache& cache, Exec exec) {
    const std::size_t rf = receptive_field();
    TensorGrid g = direct_.backward(grad_out, cache.d, exec);
    if (kind_ == ModelKind::SD) g = spatial_.backward(g, cache.s, exec);
    add_at(g, grad_out, rf / 2, rf / 2);
    return g;
}

std::vector<ConvLayer*> MpiNet::layers() {
    std::vector<ConvLayer*> out;
    if (kind_ == ModelKind::SD) out = spatial_.layers();
    for (auto* l : direct_.layers()) out.push_back(l);
    return out;
}

std::vector<const ConvLayer*> MpiNet::layers() const {
    std::vector<const ConvLayer*> out;
    if (kind_ == ModelKind::SD) out = spatial_.layers();
    for (const auto* l : direct_.layers()) out.push_back(l);
    return out;
}

std::vector<ParamRef> MpiNet::params() { return collect(layers()); }

void MpiNet::zero_grad() {
    for (auto* l : layers()) l->zero_grad();
}

std::size_t MpiNet::parameter_count() const { return count(layers()); }

std::string MpiNet::summary() const {
    char title[96];
    std::snprintf(title, sizeof title, "model %s (D width %zu, %zu frequencies)", kind_ == ModelKind::SD ? "S+D" : "D",
                  d_width(), freq_count_);
    return describe(title, layers());
}

// ---- Global ----------------------------------------------------------------

GlobalNet::GlobalNet(std::size_t freq_count, std::uint64_t seed, std::size_t width, GlobalMapping mapping)
    : freq_count_(freq_count), width_(width), mapping_(mapping) {
    if (freq_count == 0 || width == 0) throw ArgumentError("global network needs frequencies and width");
    std::mt19937_64 rng(seed);
    const double head_bias[4] = {
        softplus_inverse(mapping.mass_init),
        softplus_inverse(mapping.b_init / mapping.b_scale),
        softplus_inverse(mapping.k_init - mapping.k_floor),
        softplus_inverse((mapping.lambda_init - mapping.lambda_floor) / mapping.lambda_scale),
    };
    for (std::size_t j = 0; j < 4; ++j) {
        const std::string p = "g" + std::to_string(j);
        branch_[j] = {ConvLayer(p + ".conv1", 4 * freq_count, width, 1, 1, Activation::relu),
                      ConvLayer(p + ".conv2", width, width, 1, 1, Activation::relu),
                      ConvLayer(p + ".head", width, 1, 1, 1, Activation::identity)};
        branch_[j][0].init_uniform(rng);
        branch_[j][1].init_uniform(rng);
        branch_[j][2].init_zero();
        branch_[j][2].bias[0] = head_bias[j];
    }
}

std::vector<WeibullParams> GlobalNet::forward(const TensorGrid& input, std::span<const double> t_d, Cache* cache,
                                              Exec exec) const {
    if (input.c() != 4 * freq_count_ || input.h() != 1 || input.w() != 1) {
        throw ArgumentError("global input has shape " + input.shape_string());
    }
    if (t_d.size() != input.n()) throw ArgumentError("one direct bin per sample required");
    const std::size_t n = input.n();
    std::vector<std::array<double, 4>> raw(n);
    for (std::size_t j = 0; j < 4; ++j) {
        ConvCache* c = cache ? cache->conv[j].data() : nullptr;
        auto h = conv2d_forward(input, branch_[j][0], c, exec);
        h = conv2d_forward(h, branch_[j][1], c ? c + 1 : nullptr, exec);
        h = conv2d_forward(h, branch_[j][2], c ? c + 2 : nullptr, exec);
        for (std::size_t s = 0; s < n; ++s) raw[s][j] = h.at(s, 0, 0, 0);
    }
    const auto& M = mapping_;
    std::vector<WeibullParams> out(n);
    std::vector<double> mass(n);
    for (std::size_t s = 0; s < n; ++s) {
        mass[s] = softplus(raw[s][0]);
        WeibullParams& p = out[s];
        p.b = t_d[s] + M.b_scale * softplus(raw[s][1]);
        p.k = softplus(raw[s][2]) + M.k_floor;
        p.lambda = M.lambda_scale * softplus(raw[s][3]) + M.lambda_floor;
        p.a = mass[s] * p.k * std::exp(-p.k * std::log(p.lambda));
    }
    if (cache) {
        cache->raw = std::move(raw);
        cache->params = out;
        cache->mass = std::move(mass);
    }
    return out;
}

void GlobalNet::backward(std::span<const std::array<double, 4>> grad, const Cache& cache, Exec exec) {
    const std::size_t n = cache.raw.size();
    if (grad.size() != n) throw ArgumentError("global backward: gradient count does not match cache");
    const auto& M = mapping_;
    std::array<TensorGrid, 4> g;
    for (auto& t : g) t = TensorGrid(n, 1, 1, 1);
    for (std::size_t s = 0; s < n; ++s) {
        const auto& r = cache.raw[s];
        const auto& p = cache.params[s];
        const double m = cache.mass[s];
        const double lam_pow = std::exp(-p.k * std::log(p.lambda));
        const double ga = grad[s][0];
        const double d_m = ga * p.k * lam_pow;
        const double d_k = grad[s][2] + ga * m * lam_pow * (1.0 - p.k * std::log(p.lambda));
        const double d_l = grad[s][3] - ga * m * p.k * p.k * lam_pow / p.lambda;
        g[0].at(s, 0, 0, 0) = d_m * sigmoid(r[0]);
        g[1].at(s, 0, 0, 0) = grad[s][1] * M.b_scale * sigmoid(r[1]);
        g[2].at(s, 0, 0, 0) = d_k * sigmoid(r[2]);
        g[3].at(s, 0, 0, 0) = d_l * M.lambda_scale * sigmoid(r[3]);
    }
    for (std::size_t j = 0; j < 4; ++j) {
        auto h = back(branch_[j][2], g[j], cache.conv[j][2], exec);
        h = back(branch_[j][1], h, cache.conv[j][1], exec);
        back(branch_[j][0], h, cache.conv[j][0], exec);
    }
}

std::vector<ConvLayer*> GlobalNet::layers() {
    std::vector<ConvLayer*> out;
    for (auto& b : branch_)
        for (auto& l : b) out.push_back(&l);
    return out;
}

std::vector<const ConvLayer*> GlobalNet::layers() const {
    std::vector<const ConvLayer*> out;
    for (const auto& b : branch_)
        for (const auto& l : b) out.push_back(&l);
    return out;
}

std::vector<ParamRef> GlobalNet::params() { return collect(layers()); }

void GlobalNet::zero_grad() {
    for (auto* l : layers()) l->zero_grad();
}

std::size_t GlobalNet::parameter_count() const { return count(layers()); }

std::string GlobalNet::summary() const {
    char title[96];
    std::snprintf(title, sizeof title, "model Global (4 branches, width %zu, %zu frequencies)", width_, freq_count_);
    return describe(title, layers());
}

}  // namespace itof::nn
