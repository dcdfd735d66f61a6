#pragma once

#include <string>
#include <vector>

#include "itof/pipeline/predict.hpp"

namespace itof::pipeline {

struct EvalConfig {
    PredictConfig predict;
    NoiseSpec noise;
    std::uint64_t noise_seed = 0;
};

struct FrameEval {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::uint32_t wall_count = 0;
    std::size_t pixels = 0;  // scored pixels
    std::size_t masked = 0;
    double mae_model_cm = 0.0;
    double mae_single_cm = 0.0;
    double mae_multi_cm = 0.0;
};

struct EvalReport {
    std::string model;
    std::string single_label;  // e.g. "60MHz"
    std::vector<FrameEval> frames;
    std::size_t pixels = 0;
    std::size_t masked = 0;
    double mae_model_cm = 0.0;  // pixel-weighted over all frames
    double mae_single_cm = 0.0;
    double mae_multi_cm = 0.0;
    double improvement = 0.0;  // 1 - model / single

    std::string to_text() const;
    std::string to_csv() const;
};

struct FrameDepths {
    DepthMap model;
    DepthMap single;
    DepthMap multi;
};

/// Scores depth maps against the frames' ground truth. Only pixels valid in all three
/// maps count; the rest are reported as masked.
EvalReport score_depths(const std::vector<TransientFrame>& frames, const std::vector<FrameDepths>& depths,
                        const std::string& model, const std::string& single_label);

/// Predicts every frame (with the configured noise) and scores it against the
/// highest-frequency single-frequency baseline and the raw multi-frequency baseline.
EvalReport evaluate(const nn::Checkpoint& ckpt, const std::vector<TransientFrame>& frames,
                    const EvalConfig& config = {});

/// Ground-truth depth map of a frame.
DepthMap ground_truth_depth(const TransientFrame& frame);

}  // namespace itof::pipeline
