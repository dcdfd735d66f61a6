#include "itof/transient_codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace itof {

DirectEncoding encode_direct(const PhasorSet& v_d, const Frequency& f_ref, double depth_step_m) {
    if (!(depth_step_m > 0.0)) throw ArgumentError("depth_step_m must be positive");
    std::size_t ref = v_d.size();
    for (std::size_t f = 0; f < v_d.size(); ++f) {
        if (v_d.freqs[f] == f_ref) ref = f;
    }
    if (ref == v_d.size()) throw ArgumentError("reference frequency not in the phasor set");

    const double anchor = depth_from_phase(phase(v_d[0]), v_d.freqs.lowest());
    const double depth =
        ref == 0 ? anchor : unwrap_depth(depth_from_phase(phase(v_d[ref]), f_ref), f_ref, anchor);
    DirectEncoding enc;
    enc.t_d = static_cast<std::size_t>(std::max(0.0, std::round(depth / depth_step_m)));
    enc.e_d = 2.0 * amplitude(v_d[ref]);
    return enc;
}

TransientVector decode_direct(const DirectEncoding& enc, std::size_t bin_count, double depth_step_m) {
    if (enc.t_d >= bin_count) {
        throw ArgumentError("t_d " + std::to_string(enc.t_d) + " outside " + std::to_string(bin_count) + " bins");
    }
    auto x = TransientVector::zeros(bin_count, depth_step_m);
    x.bins[enc.t_d] = enc.e_d;
    return x;
}

void validate(const WeibullParams& p) {
    if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.k) || !std::isfinite(p.lambda)) {
        throw ArgumentError("Weibull parameters must be finite");
    }
    if (p.a < 0.0) throw ArgumentError("Weibull scale a must be >= 0");
    if (p.b < 0.0) throw ArgumentError("Weibull shift b must be >= 0");
    if (!(p.k > 0.0)) throw ArgumentError("Weibull shape k must be > 0");
    if (!(p.lambda > 0.0)) throw ArgumentError("Weibull spread lambda must be > 0");
}

std::vector<double> weibull_eval(const WeibullParams& p, std::size_t bin_count) {
    validate(p);
    std::vector<double> out(bin_count, 0.0);
    if (p.a == 0.0) return out;
    const double log_lambda = std::log(p.lambda);
    const auto start = static_cast<std::size_t>(std::floor(p.b)) + 1;
    for (std::size_t t = start; t < bin_count; ++t) {
        const double u = static_cast<double>(t) - p.b;
        const double log_u = std::log(u);
        const double zk = std::exp(p.k * (log_u - log_lambda));
        out[t] = p.a * std::exp((p.k - 1.0) * log_u - zk);
    }
    return out;
}

WeibullGrad weibull_grad(const WeibullParams& p, std::size_t bin_count) {
    validate(p);
    WeibullGrad g{std::vector<double>(bin_count, 0.0), std::vector<double>(bin_count, 0.0),
                  std::vector<double>(bin_count, 0.0), std::vector<double>(bin_count, 0.0)};
    const double log_lambda = std::log(p.lambda);
    const auto start = static_cast<std::size_t>(std::floor(p.b)) + 1;
    for (std::size_t t = start; t < bin_count; ++t) {
        const double u = static_cast<double>(t) - p.b;
        const double log_u = std::log(u);
        const double log_z = log_u - log_lambda;
        const double zk = std::exp(p.k * log_z);
        const double shape = std::exp((p.k - 1.0) * log_u - zk);
        const double value = p.a * shape;
        g.da[t] = shape;
        g.db[t] = value * (-(p.k - 1.0) + p.k * zk) / u;
        g.dk[t] = value * (log_u - zk * log_z);
        g.dlambda[t] = value * p.k * zk / p.lambda;
    }
    return g;
}

double emd(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ArgumentError("emd on vectors of different length");
    if (x.empty()) return 0.0;
    double cx = 0.0;
    double cy = 0.0;
    double sum = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        cx += x[t];
        cy += y[t];
        sum += std::abs(cx - cy);
    }
    return sum / static_cast<double>(x.size());
}

double emd(const TransientVector& x, const TransientVector& y) { return emd(x.bins, y.bins); }

double emd_with_grad(std::span<const double> pred, std::span<const double> target,
                     std::span<double> grad) {
    if (pred.size() != target.size() || grad.size() != pred.size()) {
        throw ArgumentError("emd on vectors of different length");
    }
    const std::size_t n = pred.size();
    if (n == 0) return 0.0;
    const double inv_n = 1.0 / static_cast<double>(n);
    double cp = 0.0;
    double ct = 0.0;
    double sum = 0.0;
    // grad[s] = (1/n) sum_{t >= s} sign(P_t - T_t); stash the signs, then suffix-sum
    for (std::size_t t = 0; t < n; ++t) {
        cp += pred[t];
        ct += target[t];
        const double d = cp - ct;
        sum += std::abs(d);
        grad[t] = d > 0.0 ? inv_n : (d < 0.0 ? -inv_n : 0.0);
    }
    for (std::size_t t = n - 1; t-- > 0;) grad[t] += grad[t + 1];
    return sum * inv_n;
}

}  // namespace itof
