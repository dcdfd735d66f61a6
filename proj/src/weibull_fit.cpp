#include <algorithm>
#include <cmath>
#include <numeric>

#include "itof/transient_codec.hpp"

namespace itof {

std::vector<double> WeibullFitConfig::k_grid() const {
    std::vector<double> g(k_steps);
    for (std::size_t i = 0; i < k_steps; ++i) {
        g[i] = k_steps == 1 ? k_min
                            : k_min + (k_max - k_min) * static_cast<double>(i) / static_cast<double>(k_steps - 1);
    }
    return g;
}

std::vector<double> WeibullFitConfig::lambda_grid() const {
    std::vector<double> g(lambda_steps);
    const double ratio = lambda_max / lambda_min;
    for (std::size_t i = 0; i < lambda_steps; ++i) {
        g[i] = lambda_steps == 1
                   ? lambda_min
                   : lambda_min * std::pow(ratio, static_cast<double>(i) / static_cast<double>(lambda_steps - 1));
    }
    return g;
}

double best_weibull_scale(std::span<const double> shape_cumsum, std::span<const double> data_cumsum) {
    struct Ratio {
        double r;
        double w;
    };
    std::vector<Ratio> ratios;
    ratios.reserve(shape_cumsum.size());
    double total = 0.0;
    for (std::size_t t = 0; t < shape_cumsum.size(); ++t) {
        if (shape_cumsum[t] > 0.0) {
            ratios.push_back({data_cumsum[t] / shape_cumsum[t], shape_cumsum[t]});
            total += shape_cumsum[t];
        }
    }
    if (ratios.empty()) return 0.0;
    std::sort(ratios.begin(), ratios.end(), [](const Ratio& a, const Ratio& b) { return a.r < b.r; });
    double acc = 0.0;
    for (const auto& q : ratios) {
        acc += q.w;
        if (acc >= 0.5 * total) return std::max(0.0, q.r);
    }
    return std::max(0.0, ratios.back().r);
}

namespace {

class FitObjective {
public:
    explicit FitObjective(std::span<const double> x) : n_(x.size()), data_cum_(x.size()), shape_cum_(x.size()) {
        std::partial_sum(x.begin(), x.end(), data_cum_.begin());
    }

    double total_mass() const { return data_cum_.back(); }

    // Fills the cumulative unit-scale shape for (b, k, lambda).
    void shape(double b, double k, double lambda) {
        const double log_lambda = std::log(lambda);
        const auto start = static_cast<std::size_t>(std::floor(b)) + 1;
        double acc = 0.0;
        for (std::size_t t = 0; t < n_; ++t) {
            if (t >= start) {
                const double log_u = std::log(static_cast<double>(t) - b);
                acc += std::exp((k - 1.0) * log_u - std::exp(k * (log_u - log_lambda)));
            }
            shape_cum_[t] = acc;
        }
    }

    double emd_at_scale(double a) const {
        double s = 0.0;
        for (std::size_t t = 0; t < n_; ++t) s += std::abs(a * shape_cum_[t] - data_cum_[t]);
        return s / static_cast<double>(n_);
    }

    // Mass-matched scale: cheap, used by the coarse scan.
    double mass_scale() const {
        const double s = shape_cum_.back();
        return s > 0.0 ? total_mass() / s : 0.0;
    }

    double optimal_scale() const { return best_weibull_scale(shape_cum_, data_cum_); }

private:
    std::size_t n_;
    std::vector<double> data_cum_;
    std::vector<double> shape_cum_;
};

struct Candidate {
    WeibullParams p;
    double emd;
};

}  // namespace

WeibullFit fit_weibull(std::span<const double> x_g, const WeibullFitConfig& config) {
    std::size_t first = x_g.size();
    for (std::size_t t = 0; t < x_g.size(); ++t) {
        if (x_g[t] < 0.0) throw ArgumentError("global transient has negative entries");
        if (x_g[t] > 0.0 && first == x_g.size()) first = t;
    }
    if (first == x_g.size()) throw ArgumentError("cannot fit a Weibull lobe to a zero-mass transient");

    FitObjective obj(x_g);
    const double mass = obj.total_mass();
    const double min_gain = 1e-12 * mass / static_cast<double>(x_g.size());

    std::vector<double> b_grid;
    for (double off : config.b_offsets) {
        const double b = std::max(0.0, static_cast<double>(first) - off);
        if (std::find(b_grid.begin(), b_grid.end(), b) == b_grid.end()) b_grid.push_back(b);
    }
    const auto k_grid = config.k_grid();
    const auto l_grid = config.lambda_grid();

    std::vector<Candidate> best;
    for (double b : b_grid) {
        for (double k : k_grid) {
            for (double l : l_grid) {
                obj.shape(b, k, l);
                const double a = obj.mass_scale();
                if (!(a > 0.0) || !std::isfinite(a)) continue;
                const double e = obj.emd_at_scale(a);
                best.push_back({{a, b, k, l}, e});
            }
        }
    }
    if (best.empty()) throw ArgumentError("no Weibull shape overlaps the data");
    const std::size_t keep = std::min(config.refine_candidates, best.size());
    std::partial_sort(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(keep), best.end(),
                      [](const Candidate& a, const Candidate& b) { return a.emd < b.emd; });
    best.resize(keep);

    auto evaluate = [&](double b, double k, double l, double& a_out) {
        obj.shape(b, k, l);
        a_out = obj.optimal_scale();
        return obj.emd_at_scale(a_out);
    };

    Candidate winner = best.front();
    for (auto cand : best) {
        double a = 0.0;
        cand.emd = evaluate(cand.p.b, cand.p.k, cand.p.lambda, a);
        cand.p.a = a;
        double step_b = 4.0;
        double step_k = 0.25;
        double step_log_l = 0.1;
        for (std::size_t round = 0; round < config.max_refine_rounds; ++round) {
            bool improved = false;
            for (int coord = 0; coord < 3; ++coord) {
                for (double dir : {1.0, -1.0}) {
                    WeibullParams q = cand.p;
                    if (coord == 0) q.b = std::max(0.0, q.b + dir * step_b);
                    if (coord == 1) q.k = std::clamp(q.k + dir * step_k, 0.05, 20.0);
                    if (coord == 2) q.lambda = q.lambda * std::exp(dir * step_log_l);
                    double qa = 0.0;
                    const double e = evaluate(q.b, q.k, q.lambda, qa);
                    if (e < cand.emd - min_gain) {
                        q.a = qa;
                        cand = {q, e};
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) {
                step_b *= 0.5;
                step_k *= 0.5;
                step_log_l *= 0.5;
                if (step_b < 1e-3 && step_k < 1e-4 && step_log_l < 1e-4) break;
            }
        }
        if (cand.emd < winner.emd) winner = cand;
    }
    return {winner.p, winner.emd};
}

WeibullFit fit_weibull(const TransientVector& x_g, const WeibullFitConfig& config) {
    return fit_weibull(std::span<const double>(x_g.bins), config);
}

}  // namespace itof
