#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "itof/transient_sim.hpp"

namespace testutil {

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

inline double rel_err(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// small {20, 50, 60} MHz frame renders are shared by several suites
inline itof::TransientFrame small_frame(std::uint64_t seed, int walls, std::size_t size = 16,
                                        std::size_t samples = 256) {
    itof::SceneConfig sc;
    sc.width = size;
    sc.height = size;
    auto scene = itof::generate_scene(seed, walls, 5.0, sc);
    itof::RenderConfig rc;
    rc.bounce_samples = samples;
    return itof::render_transient(scene, rc);
}

}  // namespace testutil
