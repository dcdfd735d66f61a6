#include "itof/pipeline/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "itof/pipeline/patches.hpp"
#include "itof/pipeline/predict.hpp"
#include "itof/tinynet/adam.hpp"
#include "itof/tinynet/losses.hpp"

namespace itof::pipeline {

using nn::TensorGrid;

const char* to_string(LossKind k) noexcept { return k == LossKind::vd ? "vd" : "phase"; }

LossKind parse_loss_kind(const std::string& s) {
    if (s == "vd") return LossKind::vd;
    if (s == "phase") return LossKind::phase;
    throw ArgumentError("unknown loss '" + s + "' (expected vd or phase)");
}

void TrainConfig::validate() const {
    const std::size_t rf = model == nn::ModelKind::D ? 3 : 11;
    if (patch % 2 == 0 || patch < rf) {
        throw ArgumentError("patch must be odd and at least the receptive field (" + std::to_string(rf) + ")");
    }
    if (batch == 0 || global_batch == 0) throw ArgumentError("batch must be >= 1");
    if (!(lr > 0.0) || !(global_lr > 0.0)) throw ArgumentError("learning rates must be positive");
    if (noise.kind == NoiseKind::gaussian && !(noise.sigma_rel >= 0.0)) throw ArgumentError("noise sigma must be >= 0");
}

PhasorGrid frame_measurements(const TransientFrame& frame, const FrequencySet& freqs, const NoiseSpec& noise,
                              std::uint64_t seed) {
    PhasorGrid m = frame.freqs() == freqs ? frame.measurements : remeasure(frame, freqs).measurements;
    if (noise.kind == NoiseKind::none) return m;
    return add_measurement_noise(m, noise, mix_seed(seed, frame.meta.seed));
}

namespace {

constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;
constexpr std::uint64_t kStage1Stream = 0x5354473155ULL;
constexpr std::uint64_t kStage2Stream = 0x5354473255ULL;

struct Prepared {
    std::vector<TransientFrame> frames;
    std::vector<PhasorGrid> meas;
};

// Normalized random patches from every frame, shuffled.
PatchBatch epoch_patches(const Prepared& data, std::size_t patch, std::size_t per_frame, std::uint64_t seed,
                         std::size_t& skipped) {
    std::vector<PatchBatch> parts;
    parts.reserve(data.frames.size());
    for (std::size_t k = 0; k < data.frames.size(); ++k) {
        auto b = extract_patches(data.frames[k], data.meas[k], patch, per_frame, mix_seed(seed, k), k);
        skipped += normalize_batch(b);
        parts.push_back(std::move(b));
    }
    auto all = concat(parts);
    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(mix_seed(seed, 0xffffULL));
    for (std::size_t i = order.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(order[i - 1], order[pick(rng)]);
    }
    return gather(all, order);
}

void check_finite(double loss, int stage, std::size_t epoch, std::size_t step) {
    if (std::isfinite(loss)) return;
    char msg[160];
    std::snprintf(msg, sizeof msg, "training diverged: stage %d epoch %zu step %zu produced loss %g", stage, epoch,
                  step, loss);
    throw DivergenceError(msg);
}

TensorGrid center_pixel(const TensorGrid& patches) {
    const std::size_t c = patches.h() / 2;
    return patches.crop(c, c, 1, 1);
}

}  // namespace

TrainResult train(const TrainConfig& config, const std::vector<TransientFrame>& frames, const EpochCallback& on_epoch) {
    config.validate();
    if (frames.empty()) throw ArgumentError("no training frames");
    const std::size_t bins = frames[0].bin_count;
    const double step = frames[0].depth_step_m;
    Prepared data;
    for (const auto& fr : frames) {
        if (fr.bin_count != bins || fr.depth_step_m != step) {
            throw ArgumentError("training frames disagree on bin count or depth step");
        }
        data.frames.push_back(fr.freqs() == config.freqs ? fr : remeasure(fr, config.freqs));
        data.meas.push_back(frame_measurements(data.frames.back(), config.freqs, config.noise,
                                               mix_seed(config.seed, kNoiseStream)));
    }

    TrainResult res;
    auto& ck = res.checkpoint;
    ck.freqs = config.freqs;
    ck.patch = config.patch;
    ck.depth_step_m = step;
    ck.bin_count = bins;
    ck.net = nn::MpiNet(config.model, config.freqs.size(), mix_seed(config.seed, 1), config.d_width);

    // stage 1
    {
        nn::OptimizerState opt;
        opt.config.lr = config.lr;
        auto params = ck.net.params();
        std::size_t global_step = 0;
        for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
            const auto all = epoch_patches(data, config.patch, config.patches_per_frame,
                                           mix_seed(mix_seed(config.seed, kStage1Stream), epoch), res.skipped_patches);
            double sum = 0.0;
            std::size_t steps = 0;
            for (std::size_t b0 = 0; b0 < all.size(); b0 += config.batch) {
                std::vector<std::size_t> idx(std::min(config.batch, all.size() - b0));
                std::iota(idx.begin(), idx.end(), b0);
                const auto mb = gather(all, idx);
                nn::MpiNet::Cache cache;
                const auto pred = ck.net.forward(mb.input, &cache, config.exec);
                const auto loss = config.loss == LossKind::vd ? nn::loss_mae_vd(pred, mb.direct)
                                                              : nn::loss_mae_phase(pred, mb.direct_phase, 1e-6);
                check_finite(loss.value, 1, epoch, global_step);
                ck.net.zero_grad();
                ck.net.backward(loss.grad, cache, config.exec);
                nn::adam_step(opt, params);
                res.curve.push_back({1, epoch, global_step++, loss.value});
                sum += loss.value;
                ++steps;
            }
            if (on_epoch) on_epoch(1, epoch, steps ? sum / static_cast<double>(steps) : 0.0);
        }
    }

    // stage 2
    if (config.global_epochs > 0) {
        ck.global = nn::GlobalNet(config.freqs.size(), mix_seed(config.seed, 2));
        nn::OptimizerState opt;
        opt.config.lr = config.global_lr;
        auto params = ck.global->params();
        std::size_t global_step = 0;
        for (std::size_t epoch = 0; epoch < config.global_epochs; ++epoch) {
            const auto all = epoch_patches(data, config.patch, config.global_patches_per_frame,
                                           mix_seed(mix_seed(config.seed, kStage2Stream), epoch), res.skipped_patches);
            double sum = 0.0;
            std::size_t steps = 0;
            for (std::size_t b0 = 0; b0 < all.size(); b0 += config.global_batch) {
                std::vector<std::size_t> idx(std::min(config.global_batch, all.size() - b0));
                std::iota(idx.begin(), idx.end(), b0);
                const auto mb = gather(all, idx);
                const auto vd = ck.net.forward(mb.input, nullptr, config.exec);
                const auto t_d = direct_bins(vd, config.freqs, step, bins);
                std::vector<std::vector<double>> targets(mb.size());
                for (std::size_t i = 0; i < mb.size(); ++i) {
                    const auto& fr = data.frames[mb.frame[i]];
                    auto x = fr.global_transient(mb.center_pixel(i, fr.width)).bins;
                    for (double& v : x) v /= mb.scale[i];
                    targets[i] = std::move(x);
                }
                nn::GlobalNet::Cache cache;
                const auto p = ck.global->forward(global_inputs(center_pixel(mb.input), vd), t_d, &cache, config.exec);
                const auto loss = nn::loss_emd_global(p, targets, config.exec);
                check_finite(loss.value, 2, epoch, global_step);
                ck.global->zero_grad();
                ck.global->backward(loss.grad, cache, config.exec);
                nn::adam_step(opt, params);
                res.curve.push_back({2, epoch, global_step++, loss.value});
                sum += loss.value;
                ++steps;
            }
            if (on_epoch) on_epoch(2, epoch, steps ? sum / static_cast<double>(steps) : 0.0);
        }
    }

    nn::round_to_stored_precision(ck);
    return res;
}

std::string loss_curve_csv(const std::vector<LossPoint>& curve) {
    std::string out = "stage,epoch,step,loss\n";
    char line[96];
    for (const auto& p : curve) {
        std::snprintf(line, sizeof line, "%d,%zu,%zu,%.9g\n", p.stage, p.epoch, p.step, p.loss);
        out += line;
    }
    return out;
}

}  // namespace itof::pipeline
