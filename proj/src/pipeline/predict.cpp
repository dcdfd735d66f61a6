#include "itof/pipeline/predict.hpp"

#include <algorithm>
#include <cmath>

#include "itof/pipeline/bilateral.hpp"
#include "itof/pipeline/patches.hpp"

namespace itof::pipeline {

using nn::TensorGrid;

namespace {

constexpr std::size_t kPixelChunk = 1024;

void check_freqs(const nn::Checkpoint& ckpt, const PhasorGrid& meas) {
    if (!(ckpt.freqs == meas.freqs)) throw ArgumentError("checkpoint and frame use different frequency sets");
}

}  // namespace

double phase_epsilon(const PhasorGrid& meas) { return 1e-6 * meas.mean_lowest_amplitude(); }

DirectPrediction predict_direct(const nn::Checkpoint& ckpt, const PhasorGrid& meas, Exec exec) {
    check_freqs(ckpt, meas);
    const std::size_t nf = meas.freqs.size();
    DirectPrediction out;
    out.width = meas.width;
    out.height = meas.height;
    out.freq_count = nf;
    out.v_d.assign(meas.pixel_count() * nf, Phasor{});
    out.scale.assign(meas.pixel_count(), 0.0);
    const std::size_t win = std::max(ckpt.patch, ckpt.net.receptive_field());
    const std::size_t len = 2 * nf * win * win;
    for (std::size_t first = 0; first < meas.pixel_count(); first += kPixelChunk) {
        const std::size_t count = std::min(kPixelChunk, meas.pixel_count() - first);
        TensorGrid w = pixel_windows(meas, win, first, count);
        // the normalization window may be smaller than the receptive field
        std::vector<double> s(count);
        const std::size_t norm = ckpt.patch;
        const std::size_t off = (win - norm) / 2;
        const TensorGrid norm_view = off == 0 ? TensorGrid() : w.crop(off, off, norm, norm);
        for (std::size_t i = 0; i < count; ++i) {
            s[i] = patch_scale(off == 0 ? w : norm_view, i);
            const double inv = s[i] > 0.0 ? 1.0 / s[i] : 0.0;
            for (std::size_t k = 0; k < len; ++k) w.data()[i * len + k] *= inv;
        }
        const TensorGrid y = ckpt.net.forward(w, nullptr, exec);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t p = first + i;
            out.scale[p] = s[i];
            if (!(s[i] > 0.0)) continue;
            for (std::size_t f = 0; f < nf; ++f) {
                out.v_d[p * nf + f] = s[i] * Phasor(y.at(i, 2 * f, 0, 0), y.at(i, 2 * f + 1, 0, 0));
            }
        }
    }
    return out;
}

DepthPrediction fuse_depths(std::span<const Phasor> v, std::size_t width, std::size_t height,
                            const FrequencySet& freqs, double eps, const PredictConfig& config) {
    const std::size_t nf = freqs.size();
    const std::size_t n = width * height;
    if (v.size() != n * nf) throw ArgumentError("phasor count does not match the image size");
    DepthPrediction out;
    out.per_freq.assign(nf, DepthMap(width, height));
    std::vector<double> d(nf);
    for (std::size_t p = 0; p < n; ++p) {
        const auto px = v.subspan(p * nf, nf);
        const bool ok = std::all_of(px.begin(), px.end(), [&](const Phasor& z) { return std::abs(z) > eps; });
        if (!ok) {
            ++out.invalid;
            continue;
        }
        unwrapped_depths(px, freqs, d);
        for (std::size_t f = 0; f < nf; ++f) {
            out.per_freq[f].depth_m[p] = d[f];
            out.per_freq[f].valid[p] = 1;
        }
    }
    if (config.filter) {
        for (auto& m : out.per_freq) m = bilateral_filter(m, config.sigma_s_px, config.sigma_r_m, config.exec);
    }
    out.depth = DepthMap(width, height);
    for (std::size_t p = 0; p < n; ++p) {
        if (!out.per_freq[0].valid[p]) continue;
        double best = out.per_freq[0].depth_m[p];
        for (std::size_t f = 1; f < nf; ++f) best = std::min(best, out.per_freq[f].depth_m[p]);
        out.depth.depth_m[p] = best;
        out.depth.valid[p] = 1;
    }
    return out;
}

DepthPrediction predict_depth(const nn::Checkpoint& ckpt, const PhasorGrid& meas, const PredictConfig& config) {
    const auto direct = predict_direct(ckpt, meas, config.exec);
    return fuse_depths(direct.v_d, meas.width, meas.height, meas.freqs, phase_epsilon(meas), config);
}

DepthPrediction multi_frequency_baseline(const PhasorGrid& meas, const PredictConfig& config) {
    std::vector<Phasor> v(meas.values.begin(), meas.values.end());
    return fuse_depths(v, meas.width, meas.height, meas.freqs, phase_epsilon(meas), config);
}

DepthMap single_frequency_depth(const PhasorGrid& meas, std::size_t index) {
    const std::size_t nf = meas.freqs.size();
    if (index >= nf) throw ArgumentError("frequency index out of range");
    const double eps = phase_epsilon(meas);
    DepthMap out(meas.width, meas.height);
    std::vector<Phasor> px(nf);
    std::vector<double> d(nf);
    for (std::size_t p = 0; p < meas.pixel_count(); ++p) {
        for (std::size_t f = 0; f < nf; ++f) px[f] = Phasor(meas.at(p, f));
        if (!(std::abs(px[0]) > eps) || !(std::abs(px[index]) > eps)) continue;
        unwrapped_depths(px, meas.freqs, d);
        out.depth_m[p] = d[index];
        out.valid[p] = 1;
    }
    return out;
}

TensorGrid global_inputs(const TensorGrid& center, const TensorGrid& v_d) {
    if (!center.same_shape(v_d) || center.h() != 1 || center.w() != 1) {
        throw ArgumentError("global inputs need matching (N, 2F, 1, 1) tensors");
    }
    TensorGrid v_g = center;
    auto g = v_g.values();
    auto d = v_d.values();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= d[i];
    return TensorGrid::concat_channels(v_g, v_d);
}

std::vector<double> direct_bins(const TensorGrid& v_d, const FrequencySet& freqs, double step, std::size_t bins) {
    const std::size_t nf = freqs.size();
    if (v_d.c() != 2 * nf) throw ArgumentError("direct phasors do not match the frequency set");
    std::vector<double> out(v_d.n(), 0.0);
    auto v = PhasorSet::zeros(freqs);
    for (std::size_t s = 0; s < v_d.n(); ++s) {
        for (std::size_t f = 0; f < nf; ++f) v[f] = Phasor(v_d.at(s, 2 * f, 0, 0), v_d.at(s, 2 * f + 1, 0, 0));
        try {
            const auto enc = encode_direct(v, freqs.highest(), step);
            out[s] = static_cast<double>(std::min(enc.t_d, bins - 1));
        } catch (const UndefinedPhaseError&) {
            out[s] = 0.0;
        }
    }
    return out;
}

TransientPrediction predict_transients(const nn::Checkpoint& ckpt, const PhasorGrid& meas,
                                       const DirectPrediction& direct, Exec exec) {
    check_freqs(ckpt, meas);
    const std::size_t nf = meas.freqs.size();
    const std::size_t n = meas.pixel_count();
    TransientPrediction out;
    out.direct.assign(n, DirectEncoding{});
    auto v = PhasorSet::zeros(meas.freqs);
    for (std::size_t p = 0; p < n; ++p) {
        if (!(direct.scale[p] > 0.0)) continue;
        for (std::size_t f = 0; f < nf; ++f) v[f] = direct.at(p, f);
        try {
            auto enc = encode_direct(v, meas.freqs.highest(), ckpt.depth_step_m);
            enc.t_d = std::min(enc.t_d, ckpt.bin_count - 1);
            out.direct[p] = enc;
        } catch (const UndefinedPhaseError&) {
        }
    }
    if (!ckpt.global) return out;

    out.global.assign(n, WeibullParams{});
    for (std::size_t first = 0; first < n; first += kPixelChunk) {
        const std::size_t count = std::min(kPixelChunk, n - first);
        TensorGrid center(count, 2 * nf, 1, 1);
        TensorGrid vd(count, 2 * nf, 1, 1);
        std::vector<double> t_d(count);
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t p = first + i;
            const double s = direct.scale[p];
            const double inv = s > 0.0 ? 1.0 / s : 0.0;
            for (std::size_t f = 0; f < nf; ++f) {
                const auto m = meas.at(p, f);
                center.at(i, 2 * f, 0, 0) = m.real() * inv;
                center.at(i, 2 * f + 1, 0, 0) = m.imag() * inv;
                vd.at(i, 2 * f, 0, 0) = direct.at(p, f).real() * inv;
                vd.at(i, 2 * f + 1, 0, 0) = direct.at(p, f).imag() * inv;
            }
            t_d[i] = static_cast<double>(out.direct[p].t_d);
        }
        auto params = ckpt.global->forward(global_inputs(center, vd), t_d, nullptr, exec);
        for (std::size_t i = 0; i < count; ++i) {
            params[i].a *= direct.scale[first + i];
            out.global[first + i] = params[i];
        }
    }
    return out;
}

}  // namespace itof::pipeline
