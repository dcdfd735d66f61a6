#pragma once

// Multi-frequency iToF measurement model: transient <-> phasor, phase/depth
// conversion, unwrapping and the direct/global subdivision.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "itof/errors.hpp"

namespace itof {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Modulation frequency in Hz. Strictly positive and finite.
class Frequency {
public:
    explicit Frequency(double hz);

    double hz() const noexcept { return hz_; }
    /// Unambiguous one-way range c / (2 f).
    double ambiguity_range() const noexcept { return kSpeedOfLight / (2.0 * hz_); }

    friend bool operator==(const Frequency&, const Frequency&) = default;

private:
    double hz_;
};

/// Non-empty, strictly ascending list of modulation frequencies.
class FrequencySet {
public:
    explicit FrequencySet(std::vector<Frequency> freqs);
    FrequencySet(std::initializer_list<double> hz);
    static FrequencySet from_hz(std::span<const double> hz);

    std::size_t size() const noexcept { return freqs_.size(); }
    const Frequency& operator[](std::size_t i) const { return freqs_[i]; }
    const Frequency& lowest() const noexcept { return freqs_.front(); }
    const Frequency& highest() const noexcept { return freqs_.back(); }
    std::vector<double> hz() const;

    auto begin() const noexcept { return freqs_.begin(); }
    auto end() const noexcept { return freqs_.end(); }

    friend bool operator==(const FrequencySet&, const FrequencySet&) = default;

private:
    std::vector<Frequency> freqs_;
};

using Phasor = std::complex<double>;

/// Per-pixel backscatter histogram; bin b sits at one-way depth b * depth_step_m.
struct TransientVector {
    std::vector<double> bins;
    double depth_step_m = 0.0025;

    std::size_t bin_count() const noexcept { return bins.size(); }

    static TransientVector zeros(std::size_t bin_count, double depth_step_m);
    static TransientVector impulse(std::size_t bin_count, double depth_step_m, std::size_t bin,
                                   double magnitude);
};

/// One phasor per frequency of `freqs`.
struct PhasorSet {
    FrequencySet freqs;
    std::vector<Phasor> values;

    PhasorSet(FrequencySet f, std::vector<Phasor> v);
    static PhasorSet zeros(const FrequencySet& f);

    std::size_t size() const noexcept { return values.size(); }
    const Phasor& operator[](std::size_t i) const { return values[i]; }
    Phasor& operator[](std::size_t i) { return values[i]; }
};

/// Round-trip time of the light for bin `bin`: tau = 2 * bin * step / c.
double bin_round_trip_time(double bin, double depth_step_m) noexcept;

/// e^{i 2 pi f tau(bin)}; the single column of the measurement model for one frequency.
Phasor bin_phasor(const Frequency& f, double bin, double depth_step_m) noexcept;

/// Dense 2F x T measurement model. Rows 2f / 2f+1 hold cos / sin of 2 pi f_m tau(t).
class MeasurementMatrix {
public:
    MeasurementMatrix(FrequencySet freqs, std::size_t bin_count, double depth_step_m);

    std::size_t rows() const noexcept { return 2 * freqs_.size(); }
    std::size_t cols() const noexcept { return bin_count_; }
    double at(std::size_t row, std::size_t col) const { return data_[row * bin_count_ + col]; }
    const FrequencySet& freqs() const noexcept { return freqs_; }
    double depth_step_m() const noexcept { return depth_step_; }

private:
    FrequencySet freqs_;
    std::size_t bin_count_;
    double depth_step_;
    std::vector<double> data_;
};

MeasurementMatrix build_measurement_matrix(const FrequencySet& freqs, std::size_t bin_count,
                                           double depth_step_m);

/// v = Phi x.
PhasorSet transient_to_measurements(const TransientVector& x, const MeasurementMatrix& m);

/// Half the phasor magnitude (the sinusoid amplitude convention).
double amplitude(const Phasor& v) noexcept;

/// Four-quadrant phase in [0, 2 pi). Throws UndefinedPhaseError for the zero phasor.
double phase(const Phasor& v);

/// d = c phi / (4 pi f).
double depth_from_phase(double phi, const Frequency& f) noexcept;

/// Inverse of depth_from_phase, wrapped to [0, 2 pi).
double phase_from_depth(double depth_m, const Frequency& f) noexcept;

/// wrapped + n R(f_high) with integer n >= 0 closest to `anchor`; ties go to the smaller n.
double unwrap_depth(double wrapped, const Frequency& f_high, double anchor) noexcept;

/// Depth at every frequency of `v`, each unwrapped against the lowest-frequency depth.
std::vector<double> unwrapped_depths(const PhasorSet& v);
void unwrapped_depths(std::span<const Phasor> v, const FrequencySet& freqs, std::span<double> out);

/// v_g = v - v_d.
PhasorSet split_direct_global(const PhasorSet& v, const PhasorSet& v_d);

/// Per-pixel depth in meters with a validity mask, row-major.
struct DepthMap {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> depth_m;
    std::vector<std::uint8_t> valid;

    DepthMap() = default;
    DepthMap(std::size_t w, std::size_t h)
        : width(w), height(h), depth_m(w * h, 0.0), valid(w * h, 0) {}

    std::size_t size() const noexcept { return width * height; }
    double& at(std::size_t row, std::size_t col) { return depth_m[row * width + col]; }
    double at(std::size_t row, std::size_t col) const { return depth_m[row * width + col]; }
    bool is_valid(std::size_t i) const { return valid[i] != 0; }
};

}  // namespace itof
