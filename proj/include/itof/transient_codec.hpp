#pragma once

// Two-part transient encoding: a deterministic direct impulse recovered from the direct
// phasor, and a four-parameter Weibull-shaped global lobe. Distances are 1-D earth
// mover's distances between cumulative sums.

#include <cstddef>
#include <span>
#include <vector>

#include "itof/phasor_core.hpp"

namespace itof {

struct DirectEncoding {
    std::size_t t_d = 0;
    double e_d = 0.0;
};

/// Direct impulse from ideal direct measurements. The bin comes from the `f_ref` phase
/// unwrapped against the lowest frequency; the magnitude is twice the `f_ref` amplitude.
DirectEncoding encode_direct(const PhasorSet& v_d, const Frequency& f_ref, double depth_step_m);

/// All-zero transient except bins[t_d] = E_d.
TransientVector decode_direct(const DirectEncoding& enc, std::size_t bin_count, double depth_step_m);

/// x(t) = a (t - b)^(k - 1) exp(-((t - b) / lambda)^k) for t > b, zero otherwise.
/// b and lambda are in bins.
struct WeibullParams {
    double a = 0.0;
    double b = 0.0;
    double k = 1.0;
    double lambda = 1.0;
};

void validate(const WeibullParams& p);

std::vector<double> weibull_eval(const WeibullParams& p, std::size_t bin_count);

/// Per-bin partial derivatives of weibull_eval.
struct WeibullGrad {
    std::vector<double> da;
    std::vector<double> db;
    std::vector<double> dk;
    std::vector<double> dlambda;
};

WeibullGrad weibull_grad(const WeibullParams& p, std::size_t bin_count);

/// Mean over bins of |cumsum(x) - cumsum(y)|.
double emd(std::span<const double> x, std::span<const double> y);
double emd(const TransientVector& x, const TransientVector& y);

/// emd(pred, target) and its (sub)gradient with respect to `pred`, written to `grad`.
double emd_with_grad(std::span<const double> pred, std::span<const double> target,
                     std::span<double> grad);

/// Search grid for fit_weibull. b candidates sit `b_offsets` bins before the first
/// non-zero bin of the data; k is linear and lambda log-spaced.
struct WeibullFitConfig {
    std::vector<double> b_offsets{1, 2, 4, 8, 16, 32, 64, 128, 256};
    double k_min = 0.5;
    double k_max = 5.0;
    std::size_t k_steps = 10;
    double lambda_min = 2.0;
    double lambda_max = 2000.0;
    std::size_t lambda_steps = 16;
    std::size_t refine_candidates = 4;
    std::size_t max_refine_rounds = 60;

    std::vector<double> k_grid() const;
    std::vector<double> lambda_grid() const;
};

struct WeibullFit {
    WeibullParams params;
    double emd = 0.0;
};

/// Coarse grid search over (b, k, lambda), then coordinate descent. The scale a is solved
/// exactly for every shape (weighted median of cumulative ratios).
WeibullFit fit_weibull(std::span<const double> x_g, const WeibullFitConfig& config = {});
WeibullFit fit_weibull(const TransientVector& x_g, const WeibullFitConfig& config = {});

/// The L1-optimal scale for a fixed shape: argmin_a sum |a S_t - C_t| over a >= 0.
double best_weibull_scale(std::span<const double> shape_cumsum, std::span<const double> data_cumsum);

}  // namespace itof
