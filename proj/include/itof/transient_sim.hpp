#pragma once

// Walls-style scene generation and two-bounce Lambertian transient rendering.

#include <Eigen/Core>

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "itof/parallel.hpp"
#include "itof/phasor_core.hpp"

namespace itof {

/// Pinhole camera at the origin looking down +z, y up, rows top to bottom.
struct Camera {
    std::size_t width = 64;
    std::size_t height = 64;
    double fov_x_rad = 60.0 * kPi / 180.0;

    double focal_px() const;
    /// Unit direction through the center of pixel (row, col).
    Eigen::Vector3d ray(std::size_t row, std::size_t col) const;
};

/// Plane `normal . p = offset` with the outward normal pointing away from the camera.
/// The walls of a scene bound a convex room that contains the camera, so the visible
/// part of every wall is implied by the other planes and the camera frustum.
struct Wall {
    Eigen::Vector3d normal;
    double offset = 1.0;
    double albedo = 1.0;
};

struct RayHit {
    int wall = -1;
    double distance = 0.0;
};

struct WallScene {
    std::vector<Wall> walls;
    Camera camera;
    double max_depth_m = 5.0;
    std::uint64_t seed = 0;

    /// First wall hit along unit direction `dir` from the origin.
    RayHit intersect(const Eigen::Vector3d& dir) const;
};

/// Sampling ranges for scene generation. The dihedral range is our choice, not a measured one.
struct SceneConfig {
    std::size_t width = 64;
    std::size_t height = 64;
    double fov_x_deg = 60.0;
    double dihedral_min_deg = 60.0;
    double dihedral_max_deg = 120.0;
    double albedo_min = 0.2;
    double albedo_max = 1.0;
    double min_incidence_cos = 0.25;
    double min_wall_coverage = 0.05;
};

WallScene generate_scene(std::uint64_t seed, int wall_count, double max_depth_m,
                         const SceneConfig& config = {});

/// Frequencies of the reference datasets: 20, 50 and 60 MHz.
FrequencySet default_frequencies();

struct GlobalSample {
    std::uint16_t bin = 0;
    float value = 0.0f;
    friend bool operator==(const GlobalSample&, const GlobalSample&) = default;
};

/// Sparse per-pixel transient: a direct impulse plus global samples after it.
struct PixelRecord {
    float gt_depth = 0.0f;
    std::uint16_t t_d = 0;
    float e_d = 0.0f;
    std::vector<GlobalSample> global;
    friend bool operator==(const PixelRecord&, const PixelRecord&) = default;
};

struct FrameMeta {
    std::uint64_t seed = 0;
    std::uint32_t wall_count = 0;
    double max_depth_m = 0.0;
    std::uint32_t clipped_paths = 0;
    friend bool operator==(const FrameMeta&, const FrameMeta&) = default;
};

/// Per-pixel complex measurements, pixel-major: value(pixel, f).
struct PhasorGrid {
    std::size_t width = 0;
    std::size_t height = 0;
    FrequencySet freqs;
    std::vector<std::complex<float>> values;

    PhasorGrid(std::size_t w, std::size_t h, FrequencySet f);

    std::size_t pixel_count() const noexcept { return width * height; }
    std::complex<float>& at(std::size_t pixel, std::size_t f) { return values[pixel * freqs.size() + f]; }
    std::complex<float> at(std::size_t pixel, std::size_t f) const {
        return values[pixel * freqs.size() + f];
    }
    /// Mean amplitude of the lowest frequency over the grid.
    double mean_lowest_amplitude() const;
    friend bool operator==(const PhasorGrid&, const PhasorGrid&) = default;
};

struct TransientFrame {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t bin_count = 0;
    double depth_step_m = 0.0;
    FrameMeta meta;
    std::vector<PixelRecord> pixels;
    PhasorGrid measurements;

    TransientFrame(std::size_t w, std::size_t h, std::size_t bins, double step, FrequencySet freqs);

    const FrequencySet& freqs() const noexcept { return measurements.freqs; }
    std::size_t pixel_count() const noexcept { return width * height; }

    TransientVector transient(std::size_t pixel) const;
    TransientVector global_transient(std::size_t pixel) const;
    PhasorSet measurement(std::size_t pixel) const;
    /// Ideal measurements of the direct impulse alone.
    PhasorSet direct_measurement(std::size_t pixel) const;
    double global_mass(std::size_t pixel) const;

    friend bool operator==(const TransientFrame&, const TransientFrame&) = default;
};

/// Double-precision measurements of a sparse pixel record.
void measure_record(const PixelRecord& rec, const FrequencySet& freqs, double depth_step_m,
                    std::span<Phasor> out);

/// Recomputes all measurements of `frame` for `freqs` from its transients.
TransientFrame remeasure(const TransientFrame& frame, const FrequencySet& freqs);

struct RenderConfig {
    std::size_t bin_count = 2000;
    double depth_step_m = 0.0025;
    /// Emitter samples per pixel for the second bounce, rounded up to a square grid.
    std::size_t bounce_samples = 2304;
    FrequencySet freqs = default_frequencies();
    /// Lower bound on the inter-reflection distance in the geometry term.
    double min_bounce_distance_m = 0.1;
    /// Global samples below floor * E_d are dropped from the sparse record.
    double sparse_floor = 1e-8;
};

TransientFrame render_transient(const WallScene& scene, const RenderConfig& config,
                                Exec exec = Exec::parallel);

/// Translates every transient by round(shift_m / step) bins and re-measures.
/// With `grow_bins` the bin count is extended to fit; otherwise overflow throws.
TransientFrame augment_shift(const TransientFrame& frame, double shift_m, bool grow_bins = false);

enum class NoiseKind { none, gaussian };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::none;
    /// Standard deviation relative to the frame-mean lowest-frequency amplitude.
    double sigma_rel = 0.0;
};

/// Adds i.i.d. zero-mean Gaussian noise to every real and imaginary channel.
PhasorGrid add_measurement_noise(const PhasorGrid& v, const NoiseSpec& spec, std::uint64_t seed);

/// Wall counts {1, 2, 3} for `scenes` frames in the 53/95/74 proportion (largest remainder).
std::array<std::size_t, 3> wall_mix_counts(std::size_t scenes);

/// Wall count per scene for a mixed dataset, deterministically interleaved.
std::vector<int> wall_mix_sequence(std::size_t scenes, std::uint64_t seed);

/// splitmix64 finalizer, used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

}  // namespace itof
