#include "itof/tinynet/adam.hpp"

#include <cmath>

namespace itof::nn {

void adam_step(OptimizerState& state, std::span<const ParamRef> params) {
    if (state.m.empty() && state.step == 0) {
        for (const auto& p : params) {
            if (p.value.size() != p.grad.size()) throw ArgumentError("parameter " + p.name + " has mismatched grad");
            state.m.emplace_back(p.value.size(), 0.0);
            state.v.emplace_back(p.value.size(), 0.0);
        }
    }
    if (state.m.size() != params.size()) throw ArgumentError("optimizer state holds a different parameter count");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (state.m[i].size() != params[i].value.size() || params[i].grad.size() != params[i].value.size()) {
            throw ArgumentError("optimizer state shape mismatch for " + params[i].name);
        }
    }

    const auto& c = state.config;
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double corr1 = 1.0 - std::pow(c.beta1, t);
    const double corr2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto value = params[i].value;
        auto grad = params[i].grad;
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (std::size_t j = 0; j < value.size(); ++j) {
            const double g = grad[j];
            m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g;
            v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g * g;
            value[j] -= c.lr * (m[j] / corr1) / (std::sqrt(v[j] / corr2) + c.eps);
        }
        if (params[i].version) ++*params[i].version;
    }
}

}  // namespace itof::nn
