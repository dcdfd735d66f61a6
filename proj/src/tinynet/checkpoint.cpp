#include "itof/tinynet/checkpoint.hpp"

#include <cmath>

#include "../byte_io.hpp"

namespace itof::nn {

namespace {

constexpr std::array<char, 4> kMagic{'T', 'N', 'E', 'T'};

void put_layers(detail::Writer& w, const std::vector<const ConvLayer*>& layers) {
    for (const auto* l : layers) {
        w.put_string(l->name + ".kernel");
        w.put<std::uint8_t>(4);
        for (auto d : {l->out_ch, l->in_ch, l->kh, l->kw}) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
        for (double v : l->kernel) w.put<float>(static_cast<float>(v));
        w.put_string(l->name + ".bias");
        w.put<std::uint8_t>(1);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(l->out_ch));
        for (double v : l->bias) w.put<float>(static_cast<float>(v));
    }
}

void get_tensor(detail::Reader& r, const std::string& name, const std::vector<std::size_t>& shape,
                std::vector<double>& dst) {
    const std::size_t at = r.pos();
    const auto got = r.get_string("tensor name");
    if (got != name) throw FormatError("expected tensor " + name + ", found " + got, at);
    const auto rank = r.get<std::uint8_t>("tensor rank");
    if (rank != shape.size()) throw FormatError("tensor " + name + " has wrong rank", at);
    for (auto d : shape) {
        if (r.get<std::uint32_t>("tensor dim") != d) throw FormatError("tensor " + name + " has wrong shape", at);
    }
    for (auto& v : dst) {
        v = static_cast<double>(r.get<float>("tensor data"));
        if (!std::isfinite(v)) throw FormatError("tensor " + name + " holds non-finite values", r.pos());
    }
}

void get_layers(detail::Reader& r, const std::vector<ConvLayer*>& layers) {
    for (auto* l : layers) {
        get_tensor(r, l->name + ".kernel", {l->out_ch, l->in_ch, l->kh, l->kw}, l->kernel);
        get_tensor(r, l->name + ".bias", {l->out_ch}, l->bias);
        l->touch();
    }
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
    detail::Writer w;
    w.put_tag(kMagic);
    w.put<std::uint16_t>(kTnetVersion);
    w.put<std::uint8_t>(c.net.kind() == ModelKind::D ? 0 : 1);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(c.net.d_width()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(c.freqs.size()));
    for (const auto& f : c.freqs) w.put<double>(f.hz());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(c.patch));
    w.put<double>(c.depth_step_m);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(c.bin_count));
    w.put<std::uint8_t>(c.global ? 1 : 0);
    std::size_t tensors = 2 * c.net.layers().size();
    if (c.global) {
        const auto& m = c.global->mapping();
        w.put<std::uint32_t>(static_cast<std::uint32_t>(c.global->width()));
        for (double v : {m.b_scale, m.lambda_scale, m.lambda_floor, m.k_floor, m.mass_init, m.b_init, m.k_init,
                         m.lambda_init}) {
            w.put<double>(v);
        }
        tensors += 2 * c.global->layers().size();
    }
    w.put<std::uint32_t>(static_cast<std::uint32_t>(tensors));
    put_layers(w, c.net.layers());
    if (c.global) put_layers(w, c.global->layers());
    return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
    detail::Reader r(bytes);
    if (r.get_tag("magic") != kMagic) throw FormatError("not a TNET checkpoint", 0);
    const auto version = r.get<std::uint16_t>("version");
    if (version != kTnetVersion) throw FormatError("unsupported TNET version " + std::to_string(version), 4);
    const std::size_t kind_at = r.pos();
    const auto kind = r.get<std::uint8_t>("model kind");
    if (kind > 1) throw FormatError("unknown model kind", kind_at);
    const auto d_width = r.get<std::uint32_t>("D width");
    const std::size_t nf_at = r.pos();
    const auto nf = r.get<std::uint32_t>("frequency count");
    if (nf == 0 || nf > 64) throw FormatError("bad frequency count", nf_at);
    std::vector<double> hz(nf);
    for (auto& f : hz) f = r.get<double>("frequency");

    Checkpoint c;
    try {
        c.freqs = FrequencySet::from_hz(hz);
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("bad frequency list: ") + e.what(), nf_at);
    }
    c.patch = r.get<std::uint32_t>("patch");
    c.depth_step_m = r.get<double>("depth step");
    c.bin_count = r.get<std::uint32_t>("bin count");
    const bool has_global = r.get<std::uint8_t>("global flag") != 0;
    try {
        c.net = MpiNet(kind == 0 ? ModelKind::D : ModelKind::SD, nf, 0, d_width);
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("bad model header: ") + e.what(), kind_at);
    }
    if (has_global) {
        const std::size_t at = r.pos();
        const auto width = r.get<std::uint32_t>("global width");
        GlobalMapping m;
        for (double* v : {&m.b_scale, &m.lambda_scale, &m.lambda_floor, &m.k_floor, &m.mass_init, &m.b_init,
                          &m.k_init, &m.lambda_init}) {
            *v = r.get<double>("global mapping");
        }
        try {
            c.global = GlobalNet(nf, 0, width, m);
        } catch (const ArgumentError& e) {
            throw FormatError(std::string("bad global header: ") + e.what(), at);
        }
    }
    const std::size_t count_at = r.pos();
    const auto tensors = r.get<std::uint32_t>("tensor count");
    std::size_t expected = 2 * c.net.layers().size() + (c.global ? 2 * c.global->layers().size() : 0);
    if (tensors != expected) throw FormatError("tensor count does not match the model", count_at);
    get_layers(r, c.net.layers());
    if (c.global) get_layers(r, c.global->layers());
    if (!r.done()) throw FormatError("trailing bytes after checkpoint", r.pos());
    return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    detail::write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(detail::read_file(path)); }

void round_to_stored_precision(Checkpoint& ckpt) {
    auto round = [](const std::vector<ConvLayer*>& layers) {
        for (auto* l : layers) {
            for (auto& v : l->kernel) v = static_cast<double>(static_cast<float>(v));
            for (auto& v : l->bias) v = static_cast<double>(static_cast<float>(v));
            l->touch();
        }
    };
    round(ckpt.net.layers());
    if (ckpt.global) round(ckpt.global->layers());
}

}  // namespace itof::nn
