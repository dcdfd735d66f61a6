#include "itof/dataset_io.hpp"

#include <string>

#include "byte_io.hpp"

namespace itof {

namespace {

using detail::Reader;
using detail::Writer;

constexpr std::array<char, 4> kMagic{'T', 'I', 'T', 'F'};
constexpr std::array<char, 4> kWeibullTag{'W', 'B', 'P', 'M'};

}  // namespace

std::vector<std::uint8_t> encode_dataset(const std::vector<TransientFrame>& frames,
                                         const std::vector<WeibullParamMap>& weibull_maps) {
    Writer w;
    w.put_tag(kMagic);
    w.put<std::uint16_t>(kTitfVersion);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(frames.size()));
    for (const auto& fr : frames) {
        w.put<std::uint32_t>(static_cast<std::uint32_t>(fr.width));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(fr.height));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(fr.bin_count));
        w.put<double>(fr.depth_step_m);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(fr.freqs().size()));
        for (const auto& f : fr.freqs()) w.put<double>(f.hz());
        w.put<std::uint64_t>(fr.meta.seed);
        w.put<std::uint32_t>(fr.meta.wall_count);
        w.put<double>(fr.meta.max_depth_m);
        w.put<std::uint32_t>(fr.meta.clipped_paths);
        for (std::size_t p = 0; p < fr.pixel_count(); ++p) {
            const auto& rec = fr.pixels[p];
            if (rec.global.size() > 0xffff) throw ArgumentError("too many global samples for one pixel");
            w.put<float>(rec.gt_depth);
            w.put<std::uint16_t>(rec.t_d);
            w.put<float>(rec.e_d);
            w.put<std::uint16_t>(static_cast<std::uint16_t>(rec.global.size()));
            for (const auto& g : rec.global) {
                w.put<std::uint16_t>(g.bin);
                w.put<float>(g.value);
            }
            for (std::size_t f = 0; f < fr.freqs().size(); ++f) {
                const auto v = fr.measurements.at(p, f);
                w.put<float>(v.real());
                w.put<float>(v.imag());
            }
        }
    }
    for (const auto& m : weibull_maps) {
        w.put_tag(kWeibullTag);
        w.put<std::uint32_t>(m.frame);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(m.params.size()));
        for (const auto& p : m.params) {
            for (float v : p) w.put<float>(v);
        }
    }
    return w.take();
}

Dataset decode_dataset(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    if (r.get_tag("magic") != kMagic) throw FormatError("bad magic, not a TITF file", 0);
    const std::size_t version_at = r.pos();
    const auto version = r.get<std::uint16_t>("version");
    if (version != kTitfVersion) {
        throw FormatError("unsupported TITF version " + std::to_string(version), version_at);
    }
    const auto count = r.get<std::uint32_t>("frame count");

    Dataset ds;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t frame_at = r.pos();
        const auto width = r.get<std::uint32_t>("width");
        const auto height = r.get<std::uint32_t>("height");
        const auto bins = r.get<std::uint32_t>("bin count");
        const auto step = r.get<double>("depth step");
        const auto nf = r.get<std::uint32_t>("frequency count");
        if (nf == 0 || bins == 0 || bins > 65536 || !(step > 0.0)) {
            throw FormatError("invalid frame header", frame_at);
        }
        // reject sizes the remaining bytes cannot possibly hold before allocating
        const std::uint64_t min_pixel_bytes = 12 + 8ull * nf;
        if (static_cast<std::uint64_t>(width) * height * min_pixel_bytes > bytes.size()) {
            throw FormatError("frame dimensions exceed file size", frame_at);
        }
        std::vector<double> hz(nf);
        for (auto& f : hz) f = r.get<double>("frequency");
        FrequencySet freqs = [&] {
            try {
                return FrequencySet::from_hz(hz);
            } catch (const ArgumentError& e) {
                throw FormatError(std::string("invalid frequency list: ") + e.what(), frame_at);
            }
        }();
        TransientFrame fr(width, height, bins, step, std::move(freqs));
        fr.meta.seed = r.get<std::uint64_t>("seed");
        fr.meta.wall_count = r.get<std::uint32_t>("wall count");
        fr.meta.max_depth_m = r.get<double>("max depth");
        fr.meta.clipped_paths = r.get<std::uint32_t>("clipped paths");
        for (std::size_t p = 0; p < fr.pixel_count(); ++p) {
            const std::size_t pixel_at = r.pos();
            auto& rec = fr.pixels[p];
            rec.gt_depth = r.get<float>("gt depth");
            rec.t_d = r.get<std::uint16_t>("t_d");
            rec.e_d = r.get<float>("E_d");
            const auto ng = r.get<std::uint16_t>("global count");
            if (rec.t_d >= bins) throw FormatError("direct bin out of range", pixel_at);
            rec.global.resize(ng);
            for (auto& g : rec.global) {
                g.bin = r.get<std::uint16_t>("global bin");
                g.value = r.get<float>("global value");
                if (g.bin >= bins) throw FormatError("global bin out of range", pixel_at);
            }
            for (std::size_t f = 0; f < nf; ++f) {
                const float re = r.get<float>("phasor re");
                const float im = r.get<float>("phasor im");
                fr.measurements.at(p, f) = {re, im};
            }
        }
        ds.frames.push_back(std::move(fr));
    }
    while (!r.done()) {
        const std::size_t chunk_at = r.pos();
        if (r.get_tag("chunk tag") != kWeibullTag) throw FormatError("unknown chunk", chunk_at);
        WeibullParamMap m;
        m.frame = r.get<std::uint32_t>("chunk frame");
        const auto n = r.get<std::uint32_t>("chunk pixel count");
        if (m.frame >= ds.frames.size() || n != ds.frames[m.frame].pixel_count()) {
            throw FormatError("parameter map does not match its frame", chunk_at);
        }
        m.params.resize(n);
        for (auto& p : m.params) {
            for (auto& v : p) v = r.get<float>("weibull parameter");
        }
        ds.weibull_maps.push_back(std::move(m));
    }
    return ds;
}

void write_dataset(const std::vector<TransientFrame>& frames, const std::filesystem::path& path,
                   const std::vector<WeibullParamMap>& weibull_maps) {
    detail::write_file(path, encode_dataset(frames, weibull_maps));
}

Dataset read_dataset(const std::filesystem::path& path) { return decode_dataset(detail::read_file(path)); }

}  // namespace itof
