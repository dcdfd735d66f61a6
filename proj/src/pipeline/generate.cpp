#include "itof/pipeline/generate.hpp"

#include <algorithm>
#include <random>

namespace itof::pipeline {

void GenConfig::validate() const {
    if (scenes == 0) throw ArgumentError("need at least one scene");
    if (walls < 0 || walls > 3) throw ArgumentError("walls must be 1, 2, 3 or mix");
    if (width == 0 || height == 0) throw ArgumentError("resolution must be positive");
    if (bins < 2 || bins > 65535) throw ArgumentError("bins must be in [2, 65535]");
    if (!(depth_step_m > 0.0)) throw ArgumentError("depth step must be positive");
    if (!(max_depth_m > 0.0)) throw ArgumentError("max depth must be positive");
    if (max_depth_m > static_cast<double>(bins) * depth_step_m) {
        throw ArgumentError("max depth does not fit in bins * step");
    }
    if (max_depth_m >= freqs.lowest().ambiguity_range()) {
        throw ArgumentError("max depth exceeds the ambiguity range of the lowest frequency");
    }
    if (!(shift_augment_m >= 0.0)) throw ArgumentError("shift augment must be >= 0");
    if (bounce_samples == 0) throw ArgumentError("bounce samples must be positive");
}

std::vector<TransientFrame> generate_frames(const GenConfig& c, Exec exec) {
    c.validate();
    const auto walls = c.walls == 0 ? wall_mix_sequence(c.scenes, c.seed) : std::vector<int>(c.scenes, c.walls);
    SceneConfig sc;
    sc.width = c.width;
    sc.height = c.height;
    RenderConfig rc;
    rc.bin_count = c.bins;
    rc.depth_step_m = c.depth_step_m;
    rc.bounce_samples = c.bounce_samples;
    rc.freqs = c.freqs;
    std::vector<TransientFrame> out;
    for (std::size_t i = 0; i < c.scenes; ++i) {
        const auto scene = generate_scene(mix_seed(c.seed, i), walls[i], c.max_depth_m, sc);
        out.push_back(render_transient(scene, rc, exec));
        if (c.shift_augment_m > 0.0) {
            const auto& fr = out.back();
            std::size_t last = 0;
            std::size_t last_direct = 0;
            for (const auto& px : fr.pixels) {
                last = std::max<std::size_t>(last, px.t_d);
                last_direct = std::max<std::size_t>(last_direct, px.t_d);
                for (const auto& g : px.global) last = std::max<std::size_t>(last, g.bin);
            }
            const double room = static_cast<double>(c.bins - 1 - last) * c.depth_step_m;
            // keep every direct return inside the unambiguous range
            const double unambiguous =
                0.99 * c.freqs.lowest().ambiguity_range() - static_cast<double>(last_direct) * c.depth_step_m;
            const double max_shift = std::min({c.shift_augment_m, std::max(0.0, room), std::max(0.0, unambiguous)});
            std::mt19937_64 rng(mix_seed(c.seed ^ 0x5368696674ULL, i));
            const double shift = std::uniform_real_distribution<double>(0.0, max_shift)(rng);
            auto shifted = augment_shift(fr, shift, false);
            out.push_back(std::move(shifted));
        }
    }
    return out;
}

}  // namespace itof::pipeline
