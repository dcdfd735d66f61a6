#pragma once

// Central finite differences against analytic gradients, shared by the unit tests and
// the acceptance run.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "itof/tinynet/conv.hpp"
#include "itof/tinynet/losses.hpp"
#include "itof/tinynet/networks.hpp"

namespace gradcheck {

struct Sweep {
    std::size_t points = 0;
    double worst = 0.0;
    std::size_t failures = 0;

    void add(double err, double tol) {
        ++points;
        worst = std::max(worst, err);
        if (!(err < tol)) ++failures;
    }
    bool ok() const { return points > 0 && failures == 0; }
};

inline double rel(double analytic, double numeric, double floor) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// d loss / d x by central differences, restoring x.
inline double central(const std::function<double()>& loss, double& x, double h) {
    const double keep = x;
    x = keep + h;
    const double lp = loss();
    x = keep - h;
    const double lm = loss();
    x = keep;
    return (lp - lm) / (2.0 * h);
}

inline itof::nn::TensorGrid random_tensor(std::size_t n, std::size_t c, std::size_t h, std::size_t w,
                                          std::mt19937_64& rng, double scale = 1.0) {
    itof::nn::TensorGrid t(n, c, h, w);
    std::uniform_real_distribution<double> u(-scale, scale);
    for (double& v : t.values()) v = u(rng);
    return t;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Random conv layers and inputs; the scalar is <weights, conv(x)>. Each point
/// perturbs one input, kernel or bias entry, chosen uniformly among the three.
inline Sweep conv_sweep(std::size_t points, std::uint64_t seed, double tol = 1e-4) {
    using namespace itof::nn;
    std::mt19937_64 rng(seed);
    Sweep sw;
    while (sw.points < points) {
        std::uniform_int_distribution<int> ch(1, 4), ks(0, 1), act(0, 1);
        const std::size_t in_c = ch(rng), out_c = ch(rng);
        const std::size_t k = ks(rng) ? 3 : 1;
        ConvLayer layer("fd", in_c, out_c, k, k, act(rng) ? Activation::relu : Activation::identity);
        layer.init_uniform(rng);
        std::uniform_real_distribution<double> ub(-0.3, 0.3);
        for (double& b : layer.bias) b = ub(rng);
        layer.touch();
        auto x = random_tensor(2, in_c, 5, 5, rng);
        ConvCache cache;
        const auto y = conv2d_forward(x, layer, &cache, itof::Exec::serial);
        const auto wout = random_tensor(y.n(), y.c(), y.h(), y.w(), rng);
        const auto g = conv2d_backward(wout, cache, layer, itof::Exec::serial);

        // pre-activations near zero make the relu kink visible to the stencil
        bool near_kink = false;
        if (layer.activation == Activation::relu) {
            ConvLayer lin = layer;
            lin.activation = Activation::identity;
            const auto pre = conv2d_forward(x, lin, nullptr, itof::Exec::serial);
            for (double v : pre.values()) near_kink |= std::abs(v) < 1e-4;
        }
        if (near_kink) continue;

        ConvLayer probe = layer;
        auto loss = [&] { return dot(wout.values(), conv2d_forward(x, probe, nullptr, itof::Exec::serial).values()); };
        for (int rep = 0; rep < 4 && sw.points < points; ++rep) {
            std::uniform_int_distribution<int> which(0, 2);
            const int w = which(rng);
            double analytic = 0.0, numeric = 0.0;
            if (w == 0) {
                std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
                const std::size_t i = pick(rng);
                analytic = g.grad_input.values()[i];
                numeric = central(loss, x.values()[i], 1e-6);
            } else if (w == 1) {
                std::uniform_int_distribution<std::size_t> pick(0, probe.kernel.size() - 1);
                const std::size_t i = pick(rng);
                analytic = g.grad_kernel[i];
                numeric = central(loss, probe.kernel[i], 1e-6);
            } else {
                std::uniform_int_distribution<std::size_t> pick(0, probe.bias.size() - 1);
                const std::size_t i = pick(rng);
                analytic = g.grad_bias[i];
                numeric = central(loss, probe.bias[i], 1e-6);
            }
            sw.add(rel(analytic, numeric, 1e-6), tol);
        }
    }
    return sw;
}

/// MAE on phasor entries, away from ties.
inline Sweep mae_vd_sweep(std::size_t points, std::uint64_t seed, double tol = 1e-4) {
    using namespace itof::nn;
    std::mt19937_64 rng(seed);
    Sweep sw;
    while (sw.points < points) {
        auto pred = random_tensor(8, 6, 1, 1, rng);
        const auto gt = random_tensor(8, 6, 1, 1, rng);
        const auto r = loss_mae_vd(pred, gt);
        std::uniform_int_distribution<std::size_t> pick(0, pred.size() - 1);
        const std::size_t i = pick(rng);
        if (std::abs(pred.values()[i] - gt.values()[i]) < 1e-4) continue;
        auto loss = [&] { return loss_mae_vd(pred, gt).value; };
        sw.add(rel(r.grad.values()[i], central(loss, pred.values()[i], 1e-6), 1e-8), tol);
    }
    return sw;
}

/// Wrap-aware phase MAE, away from ties and the branch cut of the wrapped difference.
inline Sweep mae_phase_sweep(std::size_t points, std::uint64_t seed, double tol = 1e-4) {
    using namespace itof::nn;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ph(0.0, itof::kTwoPi);
    Sweep sw;
    while (sw.points < points) {
        auto pred = random_tensor(6, 6, 1, 1, rng);
        std::vector<double> gt(6 * 3);
        for (double& g : gt) g = ph(rng);
        const auto r = loss_mae_phase(pred, gt, 1e-6);
        std::uniform_int_distribution<std::size_t> pick(0, pred.size() - 1);
        const std::size_t i = pick(rng);
        const std::size_t s = i / 6, f = (i % 6) / 2;
        const double re = pred.at(s, 2 * f, 0, 0), im = pred.at(s, 2 * f + 1, 0, 0);
        if (std::hypot(re, im) < 0.05) continue;
        const double d = wrap_angle(std::atan2(im, re) - gt[s * 3 + f]);
        if (std::abs(d) < 1e-3 || std::abs(d) > itof::kPi - 1e-3) continue;
        auto loss = [&] { return loss_mae_phase(pred, gt, 1e-6).value; };
        sw.add(rel(r.grad.values()[i], central(loss, pred.values()[i], 1e-7), 1e-8), tol);
    }
    return sw;
}

/// EMD through the Weibull curve with respect to (a, b, k, lambda).
inline Sweep emd_weibull_sweep(std::size_t points, std::uint64_t seed, double tol = 1e-3) {
    using namespace itof;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ua(0.001, 0.05), ub(20.0, 200.0), uk(0.7, 4.0), ul(10.0, 300.0);
    Sweep sw;
    const std::size_t bins = 600;
    while (sw.points < points) {
        std::vector<WeibullParams> ps{{ua(rng), ub(rng), uk(rng), ul(rng)}};
        // target: another lobe, so cumulative differences rarely cross zero at a bin
        const auto tgt = weibull_eval({ua(rng), ub(rng), uk(rng), ul(rng)}, bins);
        std::vector<std::vector<double>> targets{tgt};
        const auto r = nn::loss_emd_global(ps, targets, Exec::serial);
        std::uniform_int_distribution<int> pick(0, 3);
        const int j = pick(rng);
        double* field[4] = {&ps[0].a, &ps[0].b, &ps[0].k, &ps[0].lambda};
        const double h = 1e-6 * std::abs(*field[j]);
        // skip points where a zero of the cumulative difference lies inside the stencil
        {
            const auto curve = weibull_eval(ps[0], bins);
            const auto wg = weibull_grad(ps[0], bins);
            const std::vector<double>* d[4] = {&wg.da, &wg.db, &wg.dk, &wg.dlambda};
            double c = 0.0, dc = 0.0;
            bool near_kink = false;
            for (std::size_t t = 0; t < bins; ++t) {
                c += curve[t] - tgt[t];
                dc += (*d[j])[t];
                near_kink |= std::abs(c) < 4.0 * h * std::abs(dc);
            }
            if (near_kink) continue;
        }
        auto loss = [&] { return nn::loss_emd_global(ps, targets, Exec::serial).value; };
        const double numeric = central(loss, *field[j], h);
        const double scale = std::abs(r.value) / std::abs(*field[j]);
        sw.add(rel(r.grad[0][j], numeric, 1e-6 * scale), tol);
    }
    return sw;
}

}  // namespace gradcheck
