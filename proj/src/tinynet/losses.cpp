#include "itof/tinynet/losses.hpp"

#include <cmath>

#include "itof/phasor_core.hpp"

namespace itof::nn {

double wrap_angle(double d) noexcept {
    d = std::remainder(d, kTwoPi);
    return d <= -kPi ? d + kTwoPi : d;
}

LossResult loss_mae_vd(const TensorGrid& pred, const TensorGrid& gt) {
    if (!pred.same_shape(gt)) {
        throw ArgumentError("loss shapes differ: " + pred.shape_string() + " vs " + gt.shape_string());
    }
    LossResult r;
    r.grad = TensorGrid(pred.n(), pred.c(), pred.h(), pred.w());
    if (pred.size() == 0) return r;
    const double inv = 1.0 / static_cast<double>(pred.size());
    auto p = pred.values();
    auto g = gt.values();
    auto out = r.grad.values();
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - g[i];
        sum += std::abs(d);
        out[i] = d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0);
    }
    r.value = sum * inv;
    return r;
}

LossResult loss_mae_phase(const TensorGrid& pred, std::span<const double> gt_phase, double eps) {
    if (pred.c() % 2 != 0 || pred.h() != 1 || pred.w() != 1) {
        throw ArgumentError("phase loss expects (N, 2F, 1, 1), got " + pred.shape_string());
    }
    const std::size_t n = pred.n();
    const std::size_t nf = pred.c() / 2;
    if (gt_phase.size() != n * nf) throw ArgumentError("phase loss: need N x F ground-truth phases");

    LossResult r;
    r.grad = TensorGrid(n, pred.c(), 1, 1);
    std::size_t used = 0;
    double sum = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t f = 0; f < nf; ++f) {
            const double re = pred.at(s, 2 * f, 0, 0);
            const double im = pred.at(s, 2 * f + 1, 0, 0);
            if (!(std::hypot(re, im) > eps)) {
                ++r.masked;
                continue;
            }
            ++used;
            const double d = wrap_angle(std::atan2(im, re) - gt_phase[s * nf + f]);
            sum += std::abs(d);
            const double sgn = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
            const double m2 = re * re + im * im;
            r.grad.at(s, 2 * f, 0, 0) = sgn * (-im / m2);
            r.grad.at(s, 2 * f + 1, 0, 0) = sgn * (re / m2);
        }
    }
    if (used == 0) return r;
    const double inv = 1.0 / static_cast<double>(used);
    r.value = sum * inv;
    for (double& v : r.grad.values()) v *= inv;
    return r;
}

GlobalLossResult loss_emd_global(std::span<const WeibullParams> params,
                                 std::span<const std::vector<double>> targets, Exec exec) {
    if (params.size() != targets.size()) throw ArgumentError("one target per parameter set required");
    GlobalLossResult r;
    const std::size_t n = params.size();
    r.grad.assign(n, {0.0, 0.0, 0.0, 0.0});
    if (n == 0) return r;
    for (const auto& p : params) validate(p);
    const double inv = 1.0 / static_cast<double>(n);
    std::vector<double> per_sample(n, 0.0);

    auto one = [&](std::size_t s) {
        const auto& tgt = targets[s];
        const std::size_t bins = tgt.size();
        const auto curve = weibull_eval(params[s], bins);
        std::vector<double> g_curve(bins, 0.0);
        per_sample[s] = emd_with_grad(curve, tgt, g_curve);
        const auto wg = weibull_grad(params[s], bins);
        std::array<double, 4> acc{0.0, 0.0, 0.0, 0.0};
        for (std::size_t t = 0; t < bins; ++t) {
            acc[0] += g_curve[t] * wg.da[t];
            acc[1] += g_curve[t] * wg.db[t];
            acc[2] += g_curve[t] * wg.dk[t];
            acc[3] += g_curve[t] * wg.dlambda[t];
        }
        for (std::size_t j = 0; j < 4; ++j) r.grad[s][j] = acc[j] * inv;
    };
    const auto count = static_cast<std::ptrdiff_t>(n);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 8)
        for (std::ptrdiff_t s = 0; s < count; ++s) one(static_cast<std::size_t>(s));
    } else {
        for (std::ptrdiff_t s = 0; s < count; ++s) one(static_cast<std::size_t>(s));
    }
    double sum = 0.0;
    for (double v : per_sample) sum += v;
    r.value = sum * inv;
    return r;
}

}  // namespace itof::nn
