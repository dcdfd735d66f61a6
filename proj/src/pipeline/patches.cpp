#include "itof/pipeline/patches.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace itof::pipeline {

using nn::TensorGrid;

namespace {

void copy_sample(const TensorGrid& src, std::size_t i, TensorGrid& dst, std::size_t j) {
    const std::size_t len = src.c() * src.h() * src.w();
    std::copy_n(src.data() + i * len, len, dst.data() + j * len);
}

// numpy-style 'reflect' (edge not repeated)
std::size_t reflect(long i, long n) {
    if (n == 1) return 0;
    const long period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return static_cast<std::size_t>(i < n ? i : period - i);
}

}  // namespace

PatchBatch extract_patches(const TransientFrame& frame, const PhasorGrid& meas, std::size_t patch,
                           std::size_t count, std::uint64_t seed, std::size_t frame_index) {
    if (patch == 0 || patch % 2 == 0) throw ArgumentError("patch size must be odd");
    if (meas.width != frame.width || meas.height != frame.height || !(meas.freqs == frame.freqs())) {
        throw ArgumentError("measurements do not match the frame");
    }
    if (frame.width < patch || frame.height < patch) {
        throw ArgumentError("frame " + std::to_string(frame.width) + "x" + std::to_string(frame.height) +
                            " smaller than patch " + std::to_string(patch));
    }
    const std::size_t nf = meas.freqs.size();
    PatchBatch b;
    b.patch = patch;
    b.freq_count = nf;
    b.input = TensorGrid(count, 2 * nf, patch, patch);
    b.direct = TensorGrid(count, 2 * nf, 1, 1);
    b.direct_phase.assign(count * nf, 0.0);
    b.frame.assign(count, frame_index);
    b.scale.assign(count, 1.0);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> ry(0, frame.height - patch);
    std::uniform_int_distribution<std::size_t> rx(0, frame.width - patch);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t r0 = ry(rng);
        const std::size_t c0 = rx(rng);
        b.row.push_back(r0);
        b.col.push_back(c0);
        for (std::size_t y = 0; y < patch; ++y) {
            for (std::size_t x = 0; x < patch; ++x) {
                const std::size_t p = (r0 + y) * frame.width + c0 + x;
                for (std::size_t f = 0; f < nf; ++f) {
                    const auto v = meas.at(p, f);
                    b.input.at(i, 2 * f, y, x) = v.real();
                    b.input.at(i, 2 * f + 1, y, x) = v.imag();
                }
            }
        }
        const auto vd = frame.direct_measurement(b.center_pixel(i, frame.width));
        for (std::size_t f = 0; f < nf; ++f) {
            b.direct.at(i, 2 * f, 0, 0) = vd[f].real();
            b.direct.at(i, 2 * f + 1, 0, 0) = vd[f].imag();
            b.direct_phase[i * nf + f] = vd[f] == Phasor{} ? 0.0 : phase(vd[f]);
        }
    }
    return b;
}

PatchBatch gather(const PatchBatch& b, std::span<const std::size_t> order) {
    PatchBatch out;
    out.patch = b.patch;
    out.freq_count = b.freq_count;
    const std::size_t n = order.size();
    out.input = TensorGrid(n, b.input.c(), b.input.h(), b.input.w());
    out.direct = TensorGrid(n, b.direct.c(), 1, 1);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t i = order[j];
        copy_sample(b.input, i, out.input, j);
        copy_sample(b.direct, i, out.direct, j);
        for (std::size_t f = 0; f < b.freq_count; ++f) out.direct_phase.push_back(b.direct_phase[i * b.freq_count + f]);
        out.frame.push_back(b.frame[i]);
        out.row.push_back(b.row[i]);
        out.col.push_back(b.col[i]);
        out.scale.push_back(b.scale[i]);
    }
    return out;
}

PatchBatch concat(const std::vector<PatchBatch>& parts) {
    PatchBatch out;
    if (parts.empty()) return out;
    std::size_t n = 0;
    for (const auto& p : parts) {
        if (p.patch != parts[0].patch || p.freq_count != parts[0].freq_count) {
            throw ArgumentError("cannot concatenate patches of different geometry");
        }
        n += p.size();
    }
    out.patch = parts[0].patch;
    out.freq_count = parts[0].freq_count;
    const std::size_t ch = 2 * out.freq_count;
    out.input = TensorGrid(n, ch, out.patch, out.patch);
    out.direct = TensorGrid(n, ch, 1, 1);
    std::size_t j = 0;
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < p.size(); ++i, ++j) {
            copy_sample(p.input, i, out.input, j);
            copy_sample(p.direct, i, out.direct, j);
        }
        out.direct_phase.insert(out.direct_phase.end(), p.direct_phase.begin(), p.direct_phase.end());
        out.frame.insert(out.frame.end(), p.frame.begin(), p.frame.end());
        out.row.insert(out.row.end(), p.row.begin(), p.row.end());
        out.col.insert(out.col.end(), p.col.begin(), p.col.end());
        out.scale.insert(out.scale.end(), p.scale.begin(), p.scale.end());
    }
    return out;
}

double patch_scale(const TensorGrid& t, std::size_t i) {
    double sum = 0.0;
    for (std::size_t y = 0; y < t.h(); ++y) {
        for (std::size_t x = 0; x < t.w(); ++x) sum += 0.5 * std::hypot(t.at(i, 0, y, x), t.at(i, 1, y, x));
    }
    return sum / static_cast<double>(t.h() * t.w());
}

std::optional<NormalizedPatch> normalize_patch(const TensorGrid& patch) {
    if (patch.n() != 1 || patch.c() < 2) throw ArgumentError("normalize_patch expects one (1, 2F, P, P) patch");
    const double s = patch_scale(patch, 0);
    if (!(s > 0.0) || !std::isfinite(s)) return std::nullopt;
    NormalizedPatch out{patch, s};
    for (double& v : out.patch.values()) v /= s;
    return out;
}

std::size_t normalize_batch(PatchBatch& b) {
    std::vector<std::size_t> keep;
    const std::size_t in_len = b.input.c() * b.input.h() * b.input.w();
    const std::size_t d_len = b.direct.c();
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double s = patch_scale(b.input, i);
        if (!(s > 0.0) || !std::isfinite(s)) continue;
        keep.push_back(i);
        for (std::size_t k = 0; k < in_len; ++k) b.input.data()[i * in_len + k] /= s;
        for (std::size_t k = 0; k < d_len; ++k) b.direct.data()[i * d_len + k] /= s;
        b.scale[i] *= s;
    }
    const std::size_t dropped = b.size() - keep.size();
    if (dropped > 0) b = gather(b, keep);
    return dropped;
}

TensorGrid pixel_windows(const PhasorGrid& grid, std::size_t patch, std::size_t first, std::size_t count) {
    if (patch % 2 == 0) throw ArgumentError("patch size must be odd");
    if (first + count > grid.pixel_count()) throw ArgumentError("pixel range outside the grid");
    const std::size_t nf = grid.freqs.size();
    const long half = static_cast<long>(patch / 2);
    const long w = static_cast<long>(grid.width);
    const long h = static_cast<long>(grid.height);
    TensorGrid out(count, 2 * nf, patch, patch);
    for (std::size_t i = 0; i < count; ++i) {
        const long r = static_cast<long>((first + i) / grid.width);
        const long c = static_cast<long>((first + i) % grid.width);
        for (std::size_t y = 0; y < patch; ++y) {
            const std::size_t yy = reflect(r - half + static_cast<long>(y), h);
            for (std::size_t x = 0; x < patch; ++x) {
                const std::size_t xx = reflect(c - half + static_cast<long>(x), w);
                const std::size_t p = yy * grid.width + xx;
                for (std::size_t f = 0; f < nf; ++f) {
                    const auto v = grid.at(p, f);
                    out.at(i, 2 * f, y, x) = v.real();
                    out.at(i, 2 * f + 1, y, x) = v.imag();
                }
            }
        }
    }
    return out;
}

}  // namespace itof::pipeline
