#include "itof/transient_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace itof {

namespace {

constexpr std::size_t kMaxBins = 65536;  // bins are stored as u16

struct PixelResult {
    PixelRecord record;
    std::uint32_t clipped = 0;
};

// Direct return plus one intermediate Lambertian bounce, gathered from a stratified set of
// emitter directions. Each emitter sample deposits flux on wall B, which re-emits towards
// the pixel's surface point x on wall A. In the units of the direct term
// (albedo * cos / d^2), a sample with solid angle dw contributes
//     albedo_A * albedo_B * dw * cos_x * cos_y / (pi * r^2)
// at half the total path length.
PixelResult render_pixel(const WallScene& scene, const RenderConfig& cfg, std::size_t row,
                         std::size_t col, std::vector<double>& scratch) {
    PixelResult out;
    const Camera& cam = scene.camera;
    const Eigen::Vector3d dir = cam.ray(row, col);
    const RayHit hit = scene.intersect(dir);
    if (hit.wall < 0) throw ArgumentError("camera ray misses every wall");
    const Wall& wa = scene.walls[hit.wall];
    const double step = cfg.depth_step_m;

    const double td_real = std::round(hit.distance / step);
    if (td_real >= static_cast<double>(cfg.bin_count)) {
        throw ArgumentError("direct return beyond the last bin; increase bin_count or depth_step_m");
    }
    const auto t_d = static_cast<std::size_t>(td_real);
    const double e_d = wa.albedo * wa.normal.dot(dir) / (hit.distance * hit.distance);
    out.record.t_d = static_cast<std::uint16_t>(t_d);
    out.record.e_d = static_cast<float>(e_d);
    out.record.gt_depth = static_cast<float>(static_cast<double>(t_d) * step);

    if (scene.walls.size() < 2 || cfg.bounce_samples == 0) return out;

    const Eigen::Vector3d x = hit.distance * dir;
    const auto grid = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(cfg.bounce_samples))));
    const double half_w = 0.5 * static_cast<double>(cam.width) / cam.focal_px();
    const double half_h = 0.5 * static_cast<double>(cam.height) / cam.focal_px();
    const double cell_w = 2.0 * half_w / static_cast<double>(grid);
    const double cell_h = 2.0 * half_h / static_cast<double>(grid);
    const double r_min2 = cfg.min_bounce_distance_m * cfg.min_bounce_distance_m;

    std::mt19937_64 rng(mix_seed(scene.seed, row * cam.width + col));
    std::uniform_real_distribution<double> jitter(0.0, 1.0);

    std::fill(scratch.begin(), scratch.end(), 0.0);
    std::size_t first = cfg.bin_count;
    std::size_t last = 0;
    for (std::size_t j = 0; j < grid; ++j) {
        for (std::size_t i = 0; i < grid; ++i) {
            const double su = -half_w + (static_cast<double>(i) + jitter(rng)) * cell_w;
            const double sv = -half_h + (static_cast<double>(j) + jitter(rng)) * cell_h;
            const Eigen::Vector3d d(su, sv, 1.0);
            const double dn = d.norm();
            const Eigen::Vector3d e = d / dn;
            const RayHit h = scene.intersect(e);
            if (h.wall < 0 || h.wall == hit.wall) continue;  // planar walls do not see themselves
            const Wall& wb = scene.walls[h.wall];
            const Eigen::Vector3d y = h.distance * e;
            const Eigen::Vector3d xy = x - y;
            const double r = xy.norm();
            if (!(r > 0.0)) continue;
            const double cos_y = (wb.offset - wb.normal.dot(x)) / r;
            const double cos_x = (wa.offset - wa.normal.dot(y)) / r;
            if (cos_y <= 0.0 || cos_x <= 0.0) continue;
            const double d_omega = cell_w * cell_h / (dn * dn * dn);
            const double energy = wa.albedo * wb.albedo * d_omega * cos_x * cos_y /
                                  (kPi * std::max(r * r, r_min2));
            const double half_path = 0.5 * (hit.distance + r + h.distance);
            auto bin = static_cast<std::size_t>(std::max(0.0, std::round(half_path / step)));
            // the bounce is never shorter than the direct path, rounding may collapse them
            bin = std::max(bin, t_d + 1);
            if (bin >= cfg.bin_count) {
                ++out.clipped;
                continue;
            }
            scratch[bin] += energy;
            first = std::min(first, bin);
            last = std::max(last, bin);
        }
    }
    const double floor = cfg.sparse_floor * e_d;
    for (std::size_t b = first; b <= last && b < cfg.bin_count; ++b) {
        const auto v = static_cast<float>(scratch[b]);
        if (v > floor && v > 0.0f) out.record.global.push_back({static_cast<std::uint16_t>(b), v});
    }
    return out;
}

}  // namespace

PhasorGrid::PhasorGrid(std::size_t w, std::size_t h, FrequencySet f)
    : width(w), height(h), freqs(std::move(f)), values(w * h * freqs.size()) {}

double PhasorGrid::mean_lowest_amplitude() const {
    if (pixel_count() == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t p = 0; p < pixel_count(); ++p) {
        const auto v = at(p, 0);
        sum += amplitude(Phasor(v.real(), v.imag()));
    }
    return sum / static_cast<double>(pixel_count());
}

TransientFrame::TransientFrame(std::size_t w, std::size_t h, std::size_t bins, double step,
                               FrequencySet freqs)
    : width(w), height(h), bin_count(bins), depth_step_m(step), pixels(w * h),
      measurements(w, h, std::move(freqs)) {}

TransientVector TransientFrame::global_transient(std::size_t pixel) const {
    auto x = TransientVector::zeros(bin_count, depth_step_m);
    for (const auto& g : pixels[pixel].global) x.bins[g.bin] += g.value;
    return x;
}

TransientVector TransientFrame::transient(std::size_t pixel) const {
    auto x = global_transient(pixel);
    x.bins[pixels[pixel].t_d] += pixels[pixel].e_d;
    return x;
}

PhasorSet TransientFrame::measurement(std::size_t pixel) const {
    auto v = PhasorSet::zeros(freqs());
    for (std::size_t f = 0; f < freqs().size(); ++f) {
        const auto m = measurements.at(pixel, f);
        v[f] = {m.real(), m.imag()};
    }
    return v;
}

PhasorSet TransientFrame::direct_measurement(std::size_t pixel) const {
    auto v = PhasorSet::zeros(freqs());
    const auto& rec = pixels[pixel];
    for (std::size_t f = 0; f < freqs().size(); ++f) {
        v[f] = static_cast<double>(rec.e_d) * bin_phasor(freqs()[f], rec.t_d, depth_step_m);
    }
    return v;
}

double TransientFrame::global_mass(std::size_t pixel) const {
    double m = 0.0;
    for (const auto& g : pixels[pixel].global) m += g.value;
    return m;
}

void measure_record(const PixelRecord& rec, const FrequencySet& freqs, double depth_step_m,
                    std::span<Phasor> out) {
    for (std::size_t f = 0; f < freqs.size(); ++f) {
        Phasor v = static_cast<double>(rec.e_d) * bin_phasor(freqs[f], rec.t_d, depth_step_m);
        for (const auto& g : rec.global) {
            v += static_cast<double>(g.value) * bin_phasor(freqs[f], g.bin, depth_step_m);
        }
        out[f] = v;
    }
}

namespace {

void measure_all(TransientFrame& frame) {
    const std::size_t nf = frame.freqs().size();
    std::vector<Phasor> tmp(nf);
    for (std::size_t p = 0; p < frame.pixel_count(); ++p) {
        measure_record(frame.pixels[p], frame.freqs(), frame.depth_step_m, tmp);
        for (std::size_t f = 0; f < nf; ++f) {
            frame.measurements.at(p, f) = {static_cast<float>(tmp[f].real()), static_cast<float>(tmp[f].imag())};
        }
    }
}

}  // namespace

TransientFrame remeasure(const TransientFrame& frame, const FrequencySet& freqs) {
    TransientFrame out(frame.width, frame.height, frame.bin_count, frame.depth_step_m, freqs);
    out.meta = frame.meta;
    out.pixels = frame.pixels;
    measure_all(out);
    return out;
}

TransientFrame render_transient(const WallScene& scene, const RenderConfig& cfg, Exec exec) {
    if (cfg.bin_count == 0 || cfg.bin_count > kMaxBins) {
        throw ArgumentError("bin_count must be in [1, 65536]");
    }
    if (!(cfg.depth_step_m > 0.0)) throw ArgumentError("depth_step_m must be positive");
    const Camera& cam = scene.camera;
    TransientFrame frame(cam.width, cam.height, cfg.bin_count, cfg.depth_step_m, cfg.freqs);
    frame.meta.seed = scene.seed;
    frame.meta.wall_count = static_cast<std::uint32_t>(scene.walls.size());
    frame.meta.max_depth_m = scene.max_depth_m;

    const auto n = static_cast<long long>(frame.pixel_count());
    std::vector<std::uint32_t> clipped(frame.pixel_count(), 0);
    if (exec == Exec::parallel) {
        FirstError err;
#pragma omp parallel
        {
            std::vector<double> scratch(cfg.bin_count);
#pragma omp for schedule(dynamic, 16)
            for (long long p = 0; p < n; ++p) {
                err.guard([&] {
                    const auto up = static_cast<std::size_t>(p);
                    auto res = render_pixel(scene, cfg, up / cam.width, up % cam.width, scratch);
                    frame.pixels[up] = std::move(res.record);
                    clipped[up] = res.clipped;
                });
            }
        }
        err.rethrow();
    } else {
        std::vector<double> scratch(cfg.bin_count);
        for (std::size_t p = 0; p < frame.pixel_count(); ++p) {
            auto res = render_pixel(scene, cfg, p / cam.width, p % cam.width, scratch);
            frame.pixels[p] = std::move(res.record);
            clipped[p] = res.clipped;
        }
    }
    for (auto c : clipped) frame.meta.clipped_paths += c;
    measure_all(frame);
    return frame;
}

TransientFrame augment_shift(const TransientFrame& frame, double shift_m, bool grow_bins) {
    if (!(shift_m >= 0.0)) throw ArgumentError("shift must be non-negative");
    const auto shift = static_cast<std::size_t>(std::llround(shift_m / frame.depth_step_m));
    std::size_t needed = 0;
    for (const auto& rec : frame.pixels) {
        needed = std::max<std::size_t>(needed, rec.t_d + shift + 1);
        if (!rec.global.empty()) needed = std::max<std::size_t>(needed, rec.global.back().bin + shift + 1);
    }
    std::size_t bins = frame.bin_count;
    if (needed > bins) {
        if (!grow_bins) {
            throw ArgumentError("shift of " + std::to_string(shift) + " bins overflows " +
                                std::to_string(bins) + " bins");
        }
        bins = needed;
    }
    if (bins > kMaxBins) throw ArgumentError("shifted transient exceeds 65536 bins");

    TransientFrame out(frame.width, frame.height, bins, frame.depth_step_m, frame.freqs());
    out.meta = frame.meta;
    out.pixels = frame.pixels;
    for (auto& rec : out.pixels) {
        rec.t_d = static_cast<std::uint16_t>(rec.t_d + shift);
        rec.gt_depth = static_cast<float>(static_cast<double>(rec.t_d) * frame.depth_step_m);
        for (auto& g : rec.global) g.bin = static_cast<std::uint16_t>(g.bin + shift);
    }
    measure_all(out);
    return out;
}

PhasorGrid add_measurement_noise(const PhasorGrid& v, const NoiseSpec& spec, std::uint64_t seed) {
    if (spec.sigma_rel < 0.0) throw ArgumentError("sigma_rel must be non-negative");
    PhasorGrid out = v;
    if (spec.kind == NoiseKind::none || spec.sigma_rel == 0.0) return out;
    const double sigma = spec.sigma_rel * v.mean_lowest_amplitude();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (auto& z : out.values) {
        const double re = static_cast<double>(z.real()) + normal(rng);
        const double im = static_cast<double>(z.imag()) + normal(rng);
        z = {static_cast<float>(re), static_cast<float>(im)};
    }
    return out;
}

}  // namespace itof
