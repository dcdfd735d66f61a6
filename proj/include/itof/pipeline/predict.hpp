#pragma once

#include <vector>

#include "itof/parallel.hpp"
#include "itof/tinynet/checkpoint.hpp"
#include "itof/transient_sim.hpp"

namespace itof::pipeline {

struct PredictConfig {
    double sigma_s_px = 3.0;
    double sigma_r_m = 0.05;
    bool filter = true;
    Exec exec = Exec::parallel;
};

/// Network output per pixel, de-normalized, pixel-major like PhasorGrid.
struct DirectPrediction {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t freq_count = 0;
    std::vector<Phasor> v_d;
    std::vector<double> scale;  // 0 where the window had no signal

    Phasor at(std::size_t pixel, std::size_t f) const { return v_d[pixel * freq_count + f]; }
};

struct DepthPrediction {
    DepthMap depth;                    // pixel-wise minimum over frequencies
    std::vector<DepthMap> per_freq;    // filtered, before fusion
    std::size_t invalid = 0;
};

/// Sliding reflect-padded window through the network at every pixel.
DirectPrediction predict_direct(const nn::Checkpoint& ckpt, const PhasorGrid& meas, Exec exec = Exec::parallel);

/// Per-frequency unwrapped depths of per-pixel phasors, optionally bilateral-filtered,
/// fused with a pixel-wise minimum. Pixels whose phasor magnitude is <= eps are invalid.
DepthPrediction fuse_depths(std::span<const Phasor> v, std::size_t width, std::size_t height,
                            const FrequencySet& freqs, double eps, const PredictConfig& config);

DepthPrediction predict_depth(const nn::Checkpoint& ckpt, const PhasorGrid& meas, const PredictConfig& config = {});

/// The same fusion applied to the raw measurements.
DepthPrediction multi_frequency_baseline(const PhasorGrid& meas, const PredictConfig& config = {});

/// Unfiltered depth of frequency `index`, unwrapped against the lowest frequency.
DepthMap single_frequency_depth(const PhasorGrid& meas, std::size_t index);

/// 1e-6 of the frame-mean lowest-frequency amplitude.
double phase_epsilon(const PhasorGrid& meas);

/// Stacked (v_g, v_d) Global inputs (N, 4F, 1, 1) from normalized central measurements
/// and normalized direct predictions, both (N, 2F, 1, 1).
nn::TensorGrid global_inputs(const nn::TensorGrid& center, const nn::TensorGrid& v_d);

/// Direct bins of (N, 2F, 1, 1) phasors, clamped to [0, bin_count - 1].
std::vector<double> direct_bins(const nn::TensorGrid& v_d, const FrequencySet& freqs, double depth_step_m,
                                std::size_t bin_count);

struct TransientPrediction {
    std::vector<DirectEncoding> direct;
    std::vector<WeibullParams> global;  // de-normalized; empty without a Global model
};

/// Direct encoding from the predicted phasors and, when the checkpoint has one, the
/// Global model's Weibull lobe per pixel.
TransientPrediction predict_transients(const nn::Checkpoint& ckpt, const PhasorGrid& meas,
                                       const DirectPrediction& direct, Exec exec = Exec::parallel);

}  // namespace itof::pipeline
