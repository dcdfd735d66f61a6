#include "itof/pipeline/evaluate.hpp"

#include <cmath>
#include <cstdio>

#include "itof/pipeline/train.hpp"

namespace itof::pipeline {

DepthMap ground_truth_depth(const TransientFrame& frame) {
    DepthMap gt(frame.width, frame.height);
    for (std::size_t p = 0; p < frame.pixel_count(); ++p) {
        gt.depth_m[p] = frame.pixels[p].gt_depth;
        gt.valid[p] = frame.pixels[p].gt_depth > 0.0f ? 1 : 0;
    }
    return gt;
}

EvalReport score_depths(const std::vector<TransientFrame>& frames, const std::vector<FrameDepths>& depths,
                        const std::string& model, const std::string& single_label) {
    if (frames.empty()) throw ArgumentError("cannot evaluate an empty dataset");
    if (frames.size() != depths.size()) throw ArgumentError("one set of depth maps per frame required");
    EvalReport r;
    r.model = model;
    r.single_label = single_label;
    double sum_model = 0.0;
    double sum_single = 0.0;
    double sum_multi = 0.0;
    for (std::size_t k = 0; k < frames.size(); ++k) {
        const auto& fr = frames[k];
        const auto& d = depths[k];
        if (d.model.size() != fr.pixel_count() || d.single.size() != fr.pixel_count() ||
            d.multi.size() != fr.pixel_count()) {
            throw ArgumentError("depth map size does not match frame " + std::to_string(k));
        }
        FrameEval e;
        e.index = k;
        e.seed = fr.meta.seed;
        e.wall_count = fr.meta.wall_count;
        double fm = 0.0, fs = 0.0, fmu = 0.0;
        for (std::size_t p = 0; p < fr.pixel_count(); ++p) {
            const double gt = fr.pixels[p].gt_depth;
            if (!(gt > 0.0) || !d.model.valid[p] || !d.single.valid[p] || !d.multi.valid[p]) {
                ++e.masked;
                continue;
            }
            ++e.pixels;
            fm += std::abs(d.model.depth_m[p] - gt);
            fs += std::abs(d.single.depth_m[p] - gt);
            fmu += std::abs(d.multi.depth_m[p] - gt);
        }
        if (e.pixels > 0) {
            const double inv = 100.0 / static_cast<double>(e.pixels);
            e.mae_model_cm = fm * inv;
            e.mae_single_cm = fs * inv;
            e.mae_multi_cm = fmu * inv;
        }
        sum_model += fm;
        sum_single += fs;
        sum_multi += fmu;
        r.pixels += e.pixels;
        r.masked += e.masked;
        r.frames.push_back(e);
    }
    if (r.pixels > 0) {
        const double inv = 100.0 / static_cast<double>(r.pixels);
        r.mae_model_cm = sum_model * inv;
        r.mae_single_cm = sum_single * inv;
        r.mae_multi_cm = sum_multi * inv;
    }
    r.improvement = r.mae_single_cm > 0.0 ? 1.0 - r.mae_model_cm / r.mae_single_cm : 0.0;
    return r;
}

EvalReport evaluate(const nn::Checkpoint& ckpt, const std::vector<TransientFrame>& frames, const EvalConfig& config) {
    if (frames.empty()) throw ArgumentError("cannot evaluate an empty dataset");
    std::vector<FrameDepths> depths(frames.size());
    PredictConfig inner = config.predict;
    inner.exec = Exec::serial;
    auto one = [&](std::size_t k) {
        const auto meas = frame_measurements(frames[k], ckpt.freqs, config.noise, config.noise_seed);
        depths[k].model = predict_depth(ckpt, meas, inner).depth;
        depths[k].single = single_frequency_depth(meas, ckpt.freqs.size() - 1);
        depths[k].multi = multi_frequency_baseline(meas, inner).depth;
    };
    const auto n = static_cast<std::ptrdiff_t>(frames.size());
    if (config.predict.exec == Exec::parallel) {
        FirstError err;
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t k = 0; k < n; ++k) err.guard([&] { one(static_cast<std::size_t>(k)); });
        err.rethrow();
    } else {
        for (std::ptrdiff_t k = 0; k < n; ++k) one(static_cast<std::size_t>(k));
    }
    char label[32];
    std::snprintf(label, sizeof label, "%gMHz", ckpt.freqs.highest().hz() / 1e6);
    std::string model = nn::to_string(ckpt.net.kind());
    return score_depths(frames, depths, model, label);
}

std::string EvalReport::to_text() const {
    std::string out;
    char line[200];
    std::snprintf(line, sizeof line, "%-6s %-6s %-5s %8s %7s %12s %12s %12s\n", "frame", "seed", "walls", "pixels",
                  "masked", "model_cm", "single_cm", "multi_cm");
    out += line;
    for (const auto& f : frames) {
        std::snprintf(line, sizeof line, "%-6zu %-6llu %-5u %8zu %7zu %12.4f %12.4f %12.4f\n", f.index,
                      static_cast<unsigned long long>(f.seed % 1000000), f.wall_count, f.pixels, f.masked,
                      f.mae_model_cm, f.mae_single_cm, f.mae_multi_cm);
        out += line;
    }
    std::snprintf(line, sizeof line,
                  "model %s | pixels %zu masked %zu | MAE model %.4f cm | single-frequency %s %.4f cm | "
                  "multi-frequency %.4f cm | improvement %.2f%%\n",
                  model.c_str(), pixels, masked, mae_model_cm, single_label.c_str(), mae_single_cm, mae_multi_cm,
                  100.0 * improvement);
    out += line;
    return out;
}

std::string EvalReport::to_csv() const {
    std::string out = "frame,seed,walls,pixels,masked,mae_model_cm,mae_single_cm,mae_multi_cm\n";
    char line[200];
    for (const auto& f : frames) {
        std::snprintf(line, sizeof line, "%zu,%llu,%u,%zu,%zu,%.6f,%.6f,%.6f\n", f.index,
                      static_cast<unsigned long long>(f.seed), f.wall_count, f.pixels, f.masked, f.mae_model_cm,
                      f.mae_single_cm, f.mae_multi_cm);
        out += line;
    }
    std::snprintf(line, sizeof line, "all,,,%zu,%zu,%.6f,%.6f,%.6f\n", pixels, masked, mae_model_cm, mae_single_cm,
                  mae_multi_cm);
    out += line;
    return out;
}

}  // namespace itof::pipeline
