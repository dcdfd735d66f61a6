#include "itof/phasor_core.hpp"

#include <cmath>
#include <string>

namespace itof {

Frequency::Frequency(double hz) : hz_(hz) {
    if (!(hz > 0.0) || !std::isfinite(hz)) {
        throw ArgumentError("frequency must be positive and finite, got " + std::to_string(hz));
    }
}

FrequencySet::FrequencySet(std::vector<Frequency> freqs) : freqs_(std::move(freqs)) {
    if (freqs_.empty()) throw ArgumentError("frequency set is empty");
    for (std::size_t i = 1; i < freqs_.size(); ++i) {
        if (!(freqs_[i].hz() > freqs_[i - 1].hz())) {
            throw ArgumentError("frequency set must be strictly ascending");
        }
    }
}

FrequencySet::FrequencySet(std::initializer_list<double> hz)
    : FrequencySet(from_hz(std::span<const double>(hz.begin(), hz.size()))) {}

FrequencySet FrequencySet::from_hz(std::span<const double> hz) {
    std::vector<Frequency> f;
    f.reserve(hz.size());
    for (double v : hz) f.emplace_back(v);
    return FrequencySet(std::move(f));
}

std::vector<double> FrequencySet::hz() const {
    std::vector<double> out;
    out.reserve(freqs_.size());
    for (const auto& f : freqs_) out.push_back(f.hz());
    return out;
}

TransientVector TransientVector::zeros(std::size_t bin_count, double depth_step_m) {
    return TransientVector{std::vector<double>(bin_count, 0.0), depth_step_m};
}

TransientVector TransientVector::impulse(std::size_t bin_count, double depth_step_m,
                                         std::size_t bin, double magnitude) {
    if (bin >= bin_count) throw ArgumentError("impulse bin out of range");
    auto x = zeros(bin_count, depth_step_m);
    x.bins[bin] = magnitude;
    return x;
}

PhasorSet::PhasorSet(FrequencySet f, std::vector<Phasor> v) : freqs(std::move(f)), values(std::move(v)) {
    if (values.size() != freqs.size()) {
        throw ArgumentError("phasor count does not match frequency count");
    }
}

PhasorSet PhasorSet::zeros(const FrequencySet& f) {
    return PhasorSet(f, std::vector<Phasor>(f.size(), Phasor{}));
}

double bin_round_trip_time(double bin, double depth_step_m) noexcept {
    return 2.0 * bin * depth_step_m / kSpeedOfLight;
}

Phasor bin_phasor(const Frequency& f, double bin, double depth_step_m) noexcept {
    const double arg = kTwoPi * f.hz() * bin_round_trip_time(bin, depth_step_m);
    return {std::cos(arg), std::sin(arg)};
}

MeasurementMatrix::MeasurementMatrix(FrequencySet freqs, std::size_t bin_count, double depth_step_m)
    : freqs_(std::move(freqs)), bin_count_(bin_count), depth_step_(depth_step_m) {
    if (bin_count == 0) throw ArgumentError("bin_count must be positive");
    if (!(depth_step_m > 0.0) || !std::isfinite(depth_step_m)) {
        throw ArgumentError("depth_step_m must be positive");
    }
    data_.resize(rows() * bin_count_);
    for (std::size_t f = 0; f < freqs_.size(); ++f) {
        double* re = &data_[(2 * f) * bin_count_];
        double* im = &data_[(2 * f + 1) * bin_count_];
        for (std::size_t t = 0; t < bin_count_; ++t) {
            const Phasor p = bin_phasor(freqs_[f], static_cast<double>(t), depth_step_);
            re[t] = p.real();
            im[t] = p.imag();
        }
    }
}

MeasurementMatrix build_measurement_matrix(const FrequencySet& freqs, std::size_t bin_count,
                                           double depth_step_m) {
    return MeasurementMatrix(freqs, bin_count, depth_step_m);
}

PhasorSet transient_to_measurements(const TransientVector& x, const MeasurementMatrix& m) {
    if (x.bin_count() != m.cols()) {
        throw ArgumentError("transient has " + std::to_string(x.bin_count()) +
                            " bins, measurement model expects " + std::to_string(m.cols()));
    }
    auto out = PhasorSet::zeros(m.freqs());
    for (std::size_t f = 0; f < m.freqs().size(); ++f) {
        double re = 0.0;
        double im = 0.0;
        for (std::size_t t = 0; t < m.cols(); ++t) {
            re += m.at(2 * f, t) * x.bins[t];
            im += m.at(2 * f + 1, t) * x.bins[t];
        }
        out[f] = {re, im};
    }
    return out;
}

double amplitude(const Phasor& v) noexcept { return 0.5 * std::abs(v); }

double phase(const Phasor& v) {
    if (v.real() == 0.0 && v.imag() == 0.0) throw UndefinedPhaseError("phase of a zero phasor");
    double phi = std::atan2(v.imag(), v.real());
    if (phi < 0.0) phi += kTwoPi;
    // atan2 of a tiny negative imaginary part rounds up to exactly 2 pi
    if (phi >= kTwoPi) phi -= kTwoPi;
    return phi;
}

double depth_from_phase(double phi, const Frequency& f) noexcept {
    return kSpeedOfLight * phi / (4.0 * kPi * f.hz());
}

double phase_from_depth(double depth_m, const Frequency& f) noexcept {
    double phi = std::fmod(4.0 * kPi * f.hz() * depth_m / kSpeedOfLight, kTwoPi);
    if (phi < 0.0) phi += kTwoPi;
    return phi;
}

double unwrap_depth(double wrapped, const Frequency& f_high, double anchor) noexcept {
    const double range = f_high.ambiguity_range();
    const double q = (anchor - wrapped) / range;
    if (!(q > 0.0)) return wrapped;
    double n = std::floor(q);
    // ties (q - n == 0.5) stay on the smaller n
    if (q - n > 0.5) n += 1.0;
    return wrapped + n * range;
}

void unwrapped_depths(std::span<const Phasor> v, const FrequencySet& freqs, std::span<double> out) {
    const double anchor = depth_from_phase(phase(v[0]), freqs[0]);
    out[0] = anchor;
    for (std::size_t f = 1; f < freqs.size(); ++f) {
        out[f] = unwrap_depth(depth_from_phase(phase(v[f]), freqs[f]), freqs[f], anchor);
    }
}

std::vector<double> unwrapped_depths(const PhasorSet& v) {
    std::vector<double> out(v.size());
    unwrapped_depths(v.values, v.freqs, out);
    return out;
}

PhasorSet split_direct_global(const PhasorSet& v, const PhasorSet& v_d) {
    if (!(v.freqs == v_d.freqs)) throw ArgumentError("frequency sets differ");
    auto out = PhasorSet::zeros(v.freqs);
    for (std::size_t f = 0; f < v.size(); ++f) out[f] = v[f] - v_d[f];
    return out;
}

}  // namespace itof
