#include "itof/transient_sim.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace itof {

namespace {

constexpr double kDeg = kPi / 180.0;

Eigen::Matrix3d rot_x(double a) { return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()).toRotationMatrix(); }
Eigen::Matrix3d rot_y(double a) { return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitY()).toRotationMatrix(); }
Eigen::Matrix3d rot_z(double a) { return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix(); }

double interior_angle(const Wall& a, const Wall& b) {
    return kPi - std::acos(std::clamp(a.normal.dot(b.normal), -1.0, 1.0));
}

struct Candidate {
    std::vector<Eigen::Vector3d> normals;
    std::vector<double> offsets;
};

Candidate sample_geometry(std::mt19937_64& rng, int wall_count) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
    Candidate c;
    if (wall_count == 1) {
        const Eigen::Matrix3d r = rot_y(uniform(-30, 30) * kDeg) * rot_x(uniform(-30, 30) * kDeg);
        c.normals.push_back(r * Eigen::Vector3d::UnitZ());
        c.offsets.push_back(1.0);
        return c;
    }

    // two walls meeting at an edge, opening towards the camera
    const double interior = uniform(60.0, 120.0) * kDeg;
    const double beta = 0.5 * (kPi - interior);
    c.normals.emplace_back(-std::sin(beta), 0.0, std::cos(beta));
    c.normals.emplace_back(std::sin(beta), 0.0, std::cos(beta));
    c.offsets.push_back(1.0);
    c.offsets.push_back(uniform(0.7, 1.4));

    Eigen::Matrix3d orient = Eigen::Matrix3d::Identity();
    if (wall_count == 2) {
        // vertical or horizontal junction
        if (u(rng) < 0.5) orient = rot_z(0.5 * kPi);
    } else {
        // floor or ceiling closing the corner
        const double tilt = uniform(0.0, 35.0) * kDeg;
        const double side = u(rng) < 0.5 ? -1.0 : 1.0;
        c.normals.emplace_back(0.0, side * std::cos(tilt), std::sin(tilt));
        c.offsets.push_back(uniform(0.6, 1.2));
    }
    const Eigen::Matrix3d r =
        rot_y(uniform(-15, 15) * kDeg) * rot_x(uniform(-15, 15) * kDeg) * orient;
    for (auto& n : c.normals) n = (r * n).normalized();
    return c;
}

}  // namespace

double Camera::focal_px() const { return 0.5 * static_cast<double>(width) / std::tan(0.5 * fov_x_rad); }

Eigen::Vector3d Camera::ray(std::size_t row, std::size_t col) const {
    const double f = focal_px();
    const double x = (static_cast<double>(col) + 0.5 - 0.5 * static_cast<double>(width)) / f;
    const double y = -(static_cast<double>(row) + 0.5 - 0.5 * static_cast<double>(height)) / f;
    return Eigen::Vector3d(x, y, 1.0).normalized();
}

RayHit WallScene::intersect(const Eigen::Vector3d& dir) const {
    RayHit hit;
    hit.distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < walls.size(); ++i) {
        const double c = walls[i].normal.dot(dir);
        if (c <= 0.0) continue;
        const double t = walls[i].offset / c;
        if (t < hit.distance) {
            hit.distance = t;
            hit.wall = static_cast<int>(i);
        }
    }
    return hit;
}

FrequencySet default_frequencies() { return FrequencySet{20e6, 50e6, 60e6}; }

WallScene generate_scene(std::uint64_t seed, int wall_count, double max_depth_m,
                         const SceneConfig& config) {
    if (wall_count < 1 || wall_count > 3) {
        throw ArgumentError("wall_count must be 1, 2 or 3, got " + std::to_string(wall_count));
    }
    if (!(max_depth_m > 0.0)) throw ArgumentError("max_depth_m must be positive");

    WallScene scene;
    scene.seed = seed;
    scene.max_depth_m = max_depth_m;
    scene.camera.width = config.width;
    scene.camera.height = config.height;
    scene.camera.fov_x_rad = config.fov_x_deg * kDeg;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t pixels = config.width * config.height;

    for (int attempt = 0; attempt < 10000; ++attempt) {
        const Candidate c = sample_geometry(rng, wall_count);
        scene.walls.clear();
        for (std::size_t i = 0; i < c.normals.size(); ++i) {
            Wall w;
            w.normal = c.normals[i];
            w.offset = c.offsets[i];
            w.albedo = config.albedo_min + (config.albedo_max - config.albedo_min) * u(rng);
            scene.walls.push_back(w);
        }
        const double fill = 0.6 + 0.35 * u(rng);

        bool ok = true;
        for (std::size_t i = 0; i < scene.walls.size() && ok; ++i) {
            for (std::size_t j = i + 1; j < scene.walls.size(); ++j) {
                const double a = interior_angle(scene.walls[i], scene.walls[j]) / kDeg;
                if (a < config.dihedral_min_deg || a > config.dihedral_max_deg) ok = false;
            }
        }
        if (!ok) continue;

        double far = 0.0;
        std::vector<std::size_t> coverage(scene.walls.size(), 0);
        for (std::size_t r = 0; r < config.height && ok; ++r) {
            for (std::size_t col = 0; col < config.width; ++col) {
                const Eigen::Vector3d d = scene.camera.ray(r, col);
                const RayHit h = scene.intersect(d);
                if (h.wall < 0 || !std::isfinite(h.distance)) {
                    ok = false;
                    break;
                }
                if (scene.walls[h.wall].normal.dot(d) < config.min_incidence_cos) {
                    ok = false;
                    break;
                }
                far = std::max(far, h.distance);
                ++coverage[h.wall];
            }
        }
        if (!ok) continue;
        for (std::size_t cov : coverage) {
            if (static_cast<double>(cov) < config.min_wall_coverage * static_cast<double>(pixels)) ok = false;
        }
        if (!ok) continue;

        // rescaling every offset keeps the geometry and moves the farthest hit to fill * max_depth
        const double scale = fill * max_depth_m / far;
        for (auto& w : scene.walls) w.offset *= scale;
        return scene;
    }
    throw ArgumentError("could not sample a valid scene for seed " + std::to_string(seed));
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::array<std::size_t, 3> wall_mix_counts(std::size_t scenes) {
    constexpr std::array<double, 3> weights{53.0, 95.0, 74.0};
    constexpr double total = 222.0;
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double exact = static_cast<double>(scenes) * weights[i] / total;
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        remainder[i] = exact - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < scenes; ++k, ++assigned) ++counts[order[k % 3]];
    return counts;
}

std::vector<int> wall_mix_sequence(std::size_t scenes, std::uint64_t seed) {
    const auto counts = wall_mix_counts(scenes);
    std::vector<int> seq;
    seq.reserve(scenes);
    for (int w = 1; w <= 3; ++w) seq.insert(seq.end(), counts[w - 1], w);
    std::mt19937_64 rng(mix_seed(seed, 0x6d6978ULL));
    // Fisher-Yates with an explicit draw so the order does not depend on std::shuffle internals
    for (std::size_t i = seq.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(seq[i - 1], seq[j]);
    }
    return seq;
}

}  // namespace itof
