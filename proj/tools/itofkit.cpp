// itofkit command line: dataset generation, training, evaluation, inference, Weibull
// fitting, plots and model summaries.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <string>
#include <vector>

#include "itof/dataset_io.hpp"
#include "itof/pipeline/evaluate.hpp"
#include "itof/pipeline/generate.hpp"
#include "itof/pipeline/report.hpp"
#include "itof/pipeline/train.hpp"
#include "itof/tinynet/checkpoint.hpp"

namespace fs = std::filesystem;
using namespace itof;

namespace {

enum Exit : int { kOk = 0, kIo = 1, kUsage = 2, kDiverged = 3 };

struct Common {
    std::string out = ".";
    std::uint64_t seed = 1;
    int threads = 0;
};

fs::path resolve(const Common& c, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : fs::path(c.out) / path;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

FrequencySet freqs_from_mhz(const std::vector<double>& mhz) {
    std::vector<double> hz;
    for (double f : mhz) hz.push_back(f * 1e6);
    return FrequencySet::from_hz(hz);
}

std::vector<TransientFrame> load_frames(const Common& c, const std::vector<std::string>& files) {
    std::vector<TransientFrame> frames;
    for (const auto& f : files) {
        auto ds = read_dataset(resolve(c, f));
        for (auto& fr : ds.frames) frames.push_back(std::move(fr));
    }
    return frames;
}

NoiseSpec noise_from(double sigma) {
    NoiseSpec n;
    if (sigma > 0.0) {
        n.kind = NoiseKind::gaussian;
        n.sigma_rel = sigma;
    }
    return n;
}

// ---- gen -------------------------------------------------------------------

struct GenOpts {
    std::size_t scenes = 1;
    std::string walls = "mix";
    std::string res = "64x64";
    std::size_t bins = 2000;
    double step_m = 0.0025;
    double max_depth = 5.0;
    double shift_augment = 0.0;
    std::size_t samples = 2304;
    std::vector<double> freqs_mhz{20, 50, 60};
    std::string file = "dataset.titf";
};

int cmd_gen(const Common& c, const GenOpts& o) {
    pipeline::GenConfig g;
    g.scenes = o.scenes;
    g.walls = o.walls == "mix" ? 0 : std::stoi(o.walls);
    std::smatch m;
    static const std::regex res_re(R"((\d+)x(\d+))");
    if (!std::regex_match(o.res, m, res_re)) throw ArgumentError("--res must look like HxW");
    g.height = std::stoul(m[1]);
    g.width = std::stoul(m[2]);
    g.bins = o.bins;
    g.depth_step_m = o.step_m;
    g.max_depth_m = o.max_depth;
    g.bounce_samples = o.samples;
    g.freqs = freqs_from_mhz(o.freqs_mhz);
    g.shift_augment_m = o.shift_augment;
    g.seed = c.seed;
    g.validate();

    const auto frames = pipeline::generate_frames(g);
    const fs::path path = resolve(c, o.file);
    write_dataset(frames, path);

    std::array<std::size_t, 3> counts{0, 0, 0};
    for (const auto& fr : frames) counts[fr.meta.wall_count - 1] += 1;
    nlohmann::ordered_json manifest;
    manifest["dataset"] = o.file;
    manifest["format"] = "TITF";
    manifest["version"] = kTitfVersion;
    manifest["frames"] = frames.size();
    manifest["scenes"] = o.scenes;
    manifest["wall_counts"] = {{"1", counts[0]}, {"2", counts[1]}, {"3", counts[2]}};
    manifest["resolution"] = {{"height", g.height}, {"width", g.width}};
    manifest["bins"] = g.bins;
    manifest["step_m"] = g.depth_step_m;
    manifest["max_depth_m"] = g.max_depth_m;
    manifest["freqs_mhz"] = o.freqs_mhz;
    manifest["seed"] = c.seed;
    manifest["shift_augment_m"] = o.shift_augment;
    std::uint64_t clipped = 0;
    for (const auto& fr : frames) clipped += fr.meta.clipped_paths;
    manifest["clipped_paths"] = clipped;
    write_text(resolve(c, o.file + ".manifest.json"), manifest.dump(2) + "\n");
    std::printf("wrote %zu frames (walls 1/2/3: %zu/%zu/%zu) to %s\n", frames.size(), counts[0], counts[1], counts[2],
                path.string().c_str());
    return kOk;
}

// ---- train -----------------------------------------------------------------

struct TrainOpts {
    std::vector<std::string> data;
    std::string model = "D";
    std::size_t d_width = 0;
    std::vector<double> freqs_mhz{20, 50, 60};
    std::size_t patch = 11;
    std::size_t batch = 2048;
    double lr = 1e-4;
    std::size_t epochs = 1;
    std::size_t patches_per_frame = 256;
    std::string loss = "vd";
    double noise_sigma = 0.0;
    std::size_t global_epochs = 0;
    std::size_t global_batch = 256;
    std::size_t global_patches_per_frame = 256;
    double global_lr = 1e-3;
    std::string checkpoint = "model.tnet";
};

int cmd_train(const Common& c, const TrainOpts& o) {
    pipeline::TrainConfig t;
    t.model = nn::parse_model_kind(o.model);
    t.d_width = o.d_width;
    t.freqs = freqs_from_mhz(o.freqs_mhz);
    t.patch = o.patch;
    t.batch = o.batch;
    t.lr = o.lr;
    t.epochs = o.epochs;
    t.patches_per_frame = o.patches_per_frame;
    t.seed = c.seed;
    t.loss = pipeline::parse_loss_kind(o.loss);
    t.noise = noise_from(o.noise_sigma);
    t.global_epochs = o.global_epochs;
    t.global_batch = o.global_batch;
    t.global_patches_per_frame = o.global_patches_per_frame;
    t.global_lr = o.global_lr;
    t.validate();

    const auto frames = load_frames(c, o.data);
    const auto res = pipeline::train(t, frames, [](int stage, std::size_t epoch, double loss) {
        std::printf("stage %d epoch %zu mean loss %.6g\n", stage, epoch, loss);
    });
    nn::save_checkpoint(res.checkpoint, resolve(c, o.checkpoint));
    write_text(resolve(c, o.checkpoint + ".loss.csv"), pipeline::loss_curve_csv(res.curve));
    std::string summary = res.checkpoint.net.summary();
    if (res.checkpoint.global) summary += res.checkpoint.global->summary();
    write_text(resolve(c, o.checkpoint + ".summary.txt"), summary);
    std::printf("%sskipped patches: %zu\n", summary.c_str(), res.skipped_patches);
    return kOk;
}

// ---- eval / infer ----------------------------------------------------------

struct EvalOpts {
    std::string checkpoint;
    std::vector<std::string> data;
    double noise_sigma = 0.0;
    std::uint64_t noise_seed = 0;
    double sigma_s = 3.0;
    double sigma_r = 0.05;
    bool no_filter = false;
    bool oracle = false;
    std::string report = "eval";
};

pipeline::PredictConfig predict_config(double sigma_s, double sigma_r, bool no_filter) {
    pipeline::PredictConfig p;
    p.sigma_s_px = sigma_s;
    p.sigma_r_m = sigma_r;
    p.filter = !no_filter;
    if (!(sigma_s > 0.0) || !(sigma_r > 0.0)) throw ArgumentError("bilateral sigmas must be positive");
    return p;
}

int cmd_eval(const Common& c, const EvalOpts& o) {
    const auto pc = predict_config(o.sigma_s, o.sigma_r, o.no_filter);
    const auto frames = load_frames(c, o.data);
    if (frames.empty()) throw ArgumentError("no frames to evaluate");
    pipeline::EvalReport rep;
    if (o.oracle) {
        // ground truth standing in for the prediction; baselines from the raw measurements
        std::vector<pipeline::FrameDepths> d;
        for (const auto& fr : frames) {
            const auto meas = pipeline::frame_measurements(fr, fr.freqs(), noise_from(o.noise_sigma), o.noise_seed);
            d.push_back({pipeline::ground_truth_depth(fr), pipeline::single_frequency_depth(meas, fr.freqs().size() - 1),
                         pipeline::multi_frequency_baseline(meas, pc).depth});
        }
        char label[32];
        std::snprintf(label, sizeof label, "%gMHz", frames[0].freqs().highest().hz() / 1e6);
        rep = pipeline::score_depths(frames, d, "ground-truth", label);
    } else {
        if (o.checkpoint.empty()) throw ArgumentError("--checkpoint is required unless --oracle is given");
        const auto ck = nn::load_checkpoint(resolve(c, o.checkpoint));
        pipeline::EvalConfig ec;
        ec.predict = pc;
        ec.noise = noise_from(o.noise_sigma);
        ec.noise_seed = o.noise_seed;
        rep = pipeline::evaluate(ck, frames, ec);
    }
    write_text(resolve(c, o.report + ".txt"), rep.to_text());
    write_text(resolve(c, o.report + ".csv"), rep.to_csv());
    std::printf("%s", rep.to_text().c_str());
    return kOk;
}

struct InferOpts {
    std::string checkpoint;
    std::vector<std::string> data;
    double noise_sigma = 0.0;
    std::uint64_t noise_seed = 0;
    double sigma_s = 3.0;
    double sigma_r = 0.05;
    bool no_filter = false;
    double error_range = 0.05;
    std::string prefix = "pred";
};

int cmd_infer(const Common& c, const InferOpts& o) {
    const auto pc = predict_config(o.sigma_s, o.sigma_r, o.no_filter);
    if (!(o.error_range > 0.0)) throw ArgumentError("--error-range must be positive");
    const auto ck = nn::load_checkpoint(resolve(c, o.checkpoint));
    const auto frames = load_frames(c, o.data);
    for (std::size_t k = 0; k < frames.size(); ++k) {
        const auto meas = pipeline::frame_measurements(frames[k], ck.freqs, noise_from(o.noise_sigma), o.noise_seed);
        const auto pred = pipeline::predict_depth(ck, meas, pc);
        const auto gt = pipeline::ground_truth_depth(frames[k]);
        double lo = 1e30, hi = 0.0;
        for (std::size_t p = 0; p < gt.size(); ++p) {
            lo = std::min(lo, gt.depth_m[p]);
            hi = std::max(hi, gt.depth_m[p]);
        }
        const std::string stem = o.prefix + "_" + std::to_string(k);
        pipeline::write_ppm(pipeline::depth_image(pred.depth, lo, hi), resolve(c, stem + "_depth.ppm"));
        pipeline::write_ppm(pipeline::error_image(pred.depth, gt, o.error_range), resolve(c, stem + "_error.ppm"));
        std::string csv;
        char cell[32];
        for (std::size_t y = 0; y < pred.depth.height; ++y) {
            for (std::size_t x = 0; x < pred.depth.width; ++x) {
                const std::size_t i = y * pred.depth.width + x;
                std::snprintf(cell, sizeof cell, "%s%.6f", x ? "," : "", pred.depth.valid[i] ? pred.depth.depth_m[i] : NAN);
                csv += cell;
            }
            csv += "\n";
        }
        write_text(resolve(c, stem + "_depth.csv"), csv);
    }
    std::printf("wrote depth maps for %zu frames\n", frames.size());
    return kOk;
}

// ---- fit-weibull -----------------------------------------------------------

struct FitOpts {
    std::string data;
    std::string output = "fitted.titf";
};

int cmd_fit(const Common& c, const FitOpts& o) {
    auto ds = read_dataset(resolve(c, o.data));
    std::vector<WeibullParamMap> maps;
    std::string csv = "frame,pixel,a,b,k,lambda,emd\n";
    char line[160];
    for (std::size_t k = 0; k < ds.frames.size(); ++k) {
        const auto& fr = ds.frames[k];
        WeibullParamMap m;
        m.frame = static_cast<std::uint32_t>(k);
        m.params.assign(fr.pixel_count(), {0.0f, 0.0f, 1.0f, 1.0f});
        std::vector<WeibullFit> fits(fr.pixel_count());
        const auto n = static_cast<std::ptrdiff_t>(fr.pixel_count());
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t p = 0; p < n; ++p) {
            const auto x = fr.global_transient(static_cast<std::size_t>(p));
            if (fr.global_mass(static_cast<std::size_t>(p)) > 0.0) fits[static_cast<std::size_t>(p)] = fit_weibull(x);
        }
        for (std::size_t p = 0; p < fr.pixel_count(); ++p) {
            const auto& w = fits[p].params;
            if (w.a > 0.0) {
                m.params[p] = {static_cast<float>(w.a), static_cast<float>(w.b), static_cast<float>(w.k),
                               static_cast<float>(w.lambda)};
            }
            std::snprintf(line, sizeof line, "%zu,%zu,%.9g,%.9g,%.9g,%.9g,%.9g\n", k, p, w.a, w.b, w.k, w.lambda,
                          fits[p].emd);
            csv += line;
        }
        maps.push_back(std::move(m));
    }
    write_dataset(ds.frames, resolve(c, o.output), maps);
    write_text(resolve(c, o.output + ".params.csv"), csv);
    std::printf("fitted %zu frames\n", ds.frames.size());
    return kOk;
}

// ---- plot ------------------------------------------------------------------

struct PlotOpts {
    std::string data;
    std::size_t frame = 0;
    std::size_t row = 0;
    std::size_t col = 0;
    std::string checkpoint;
    bool fit = false;
    std::string output = "transient.ppm";
};

int cmd_plot(const Common& c, const PlotOpts& o) {
    const auto ds = read_dataset(resolve(c, o.data));
    if (o.frame >= ds.frames.size()) throw ArgumentError("--frame out of range");
    const auto& fr = ds.frames[o.frame];
    if (o.row >= fr.height || o.col >= fr.width) throw ArgumentError("--row/--col outside the frame");
    const std::size_t p = o.row * fr.width + o.col;
    const auto x_g = fr.global_transient(p);
    std::vector<double> overlay;
    if (o.fit && fr.global_mass(p) > 0.0) overlay = weibull_eval(fit_weibull(x_g).params, fr.bin_count);
    if (!o.checkpoint.empty()) {
        const auto ck = nn::load_checkpoint(resolve(c, o.checkpoint));
        if (!ck.global) throw ArgumentError("checkpoint has no Global model");
        const auto meas = pipeline::frame_measurements(fr, ck.freqs, {}, 0);
        const auto direct = pipeline::predict_direct(ck, meas);
        const auto tp = pipeline::predict_transients(ck, meas, direct);
        overlay = weibull_eval(tp.global[p], fr.bin_count);
    }
    const auto img = pipeline::plot_transient(x_g.bins, fr.pixels[p].t_d, fr.pixels[p].e_d, overlay);
    pipeline::write_ppm(img, resolve(c, o.output));
    std::printf("plotted frame %zu pixel (%zu, %zu): t_d %u, E_d %.6g, global mass %.6g\n", o.frame, o.row, o.col,
                static_cast<unsigned>(fr.pixels[p].t_d), static_cast<double>(fr.pixels[p].e_d), fr.global_mass(p));
    return kOk;
}

// ---- summary ---------------------------------------------------------------

struct SummaryOpts {
    std::string checkpoint;
    std::size_t freq_count = 3;
};

int cmd_summary(const Common& c, const SummaryOpts& o) {
    std::string text;
    if (!o.checkpoint.empty()) {
        const auto ck = nn::load_checkpoint(resolve(c, o.checkpoint));
        text = ck.net.summary();
        if (ck.global) text += ck.global->summary();
    } else {
        if (o.freq_count == 0) throw ArgumentError("--freq-count must be positive");
        text = nn::MpiNet(nn::ModelKind::D, o.freq_count, c.seed, 32).summary();
        text += nn::MpiNet(nn::ModelKind::SD, o.freq_count, c.seed, 8).summary();
        text += nn::GlobalNet(o.freq_count, c.seed).summary();
    }
    std::printf("%s", text.c_str());
    return kOk;
}

// Root options plus the active subcommand's section; replay with
//   itofkit --config <file> <subcommand>
std::string snapshot(const CLI::App& app, const CLI::App& sub, const Common& c) {
    std::string out = "out=\"" + c.out + "\"\nseed=" + std::to_string(c.seed) + "\n";
    if (c.threads > 0) out += "threads=" + std::to_string(c.threads) + "\n";
    (void)app;
    out += "[" + sub.get_name() + "]\n" + sub.config_to_str(true, false);
    return out;
}

int env_threads() {
    if (const char* e = std::getenv("ITOFKIT_THREADS")) {
        try {
            return std::max(0, std::stoi(e));
        } catch (const std::exception&) {
            throw ArgumentError("ITOFKIT_THREADS must be an integer");
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"itofkit: multi-frequency iToF MPI correction and transient reconstruction"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "INI/TOML config file; flags on the command line win")->check(CLI::ExistingFile);
    app.allow_config_extras(false);

    Common common;
    app.add_option("--out", common.out, "Output directory; relative paths resolve against it")->capture_default_str();
    app.add_option("--seed", common.seed, "Seed for every random choice")->capture_default_str();
    app.add_option("--threads", common.threads, "Thread cap (default: ITOFKIT_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);

    GenOpts gen;
    auto* g = app.add_subcommand("gen", "Render a synthetic wall dataset");
    g->add_option("--scenes", gen.scenes, "Number of scenes")->required()->check(CLI::PositiveNumber);
    g->add_option("--walls", gen.walls, "1, 2, 3 or mix")->check(CLI::IsMember({"1", "2", "3", "mix"}))
        ->capture_default_str();
    g->add_option("--res", gen.res, "Resolution HxW")->capture_default_str();
    g->add_option("--bins", gen.bins, "Transient bins")->capture_default_str();
    g->add_option("--step-m", gen.step_m, "Depth step per bin in meters")->capture_default_str();
    g->add_option("--max-depth", gen.max_depth, "Farthest wall distance in meters")->capture_default_str();
    g->add_option("--shift-augment", gen.shift_augment, "Append a copy shifted by up to this many meters")
        ->capture_default_str();
    g->add_option("--samples", gen.samples, "Second-bounce samples per pixel")->capture_default_str();
    g->add_option("--freqs", gen.freqs_mhz, "Modulation frequencies in MHz")->delimiter(',')->capture_default_str();
    g->add_option("--file", gen.file, "Dataset file name")->capture_default_str();

    TrainOpts tr;
    auto* t = app.add_subcommand("train", "Train D or S+D, optionally followed by Global");
    t->add_option("--data", tr.data, "Training datasets")->required()->delimiter(',');
    t->add_option("--model", tr.model, "D or SD")->check(CLI::IsMember({"D", "SD"}))->capture_default_str();
    t->add_option("--d-width", tr.d_width, "Feature maps in D (0: 32 for D, 8 for SD)")->capture_default_str();
    t->add_option("--freqs", tr.freqs_mhz, "Frequencies in MHz")->delimiter(',')->capture_default_str();
    t->add_option("--patch", tr.patch, "Patch size")->capture_default_str();
    t->add_option("--batch", tr.batch, "Batch size")->check(CLI::PositiveNumber)->capture_default_str();
    t->add_option("--lr", tr.lr, "ADAM learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    t->add_option("--epochs", tr.epochs, "Epochs")->capture_default_str();
    t->add_option("--patches-per-frame", tr.patches_per_frame, "Random patches per frame and epoch")
        ->capture_default_str();
    t->add_option("--loss", tr.loss, "vd or phase")->check(CLI::IsMember({"vd", "phase"}))->capture_default_str();
    t->add_option("--noise-sigma", tr.noise_sigma, "Gaussian noise relative to the mean amplitude")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    t->add_option("--global-epochs", tr.global_epochs, "Epochs of the Global stage (0 skips it)")
        ->capture_default_str();
    t->add_option("--global-batch", tr.global_batch, "Global stage batch size")->capture_default_str();
    t->add_option("--global-patches-per-frame", tr.global_patches_per_frame, "Global stage patches per frame")
        ->capture_default_str();
    t->add_option("--global-lr", tr.global_lr, "Global stage learning rate")->capture_default_str();
    t->add_option("--checkpoint", tr.checkpoint, "Checkpoint file name")->capture_default_str();

    EvalOpts ev;
    auto* e = app.add_subcommand("eval", "Depth MAE of a checkpoint against both baselines");
    e->add_option("--checkpoint", ev.checkpoint, "Checkpoint");
    e->add_option("--data", ev.data, "Datasets")->required()->delimiter(',');
    e->add_option("--noise-sigma", ev.noise_sigma, "Test noise")->check(CLI::NonNegativeNumber)->capture_default_str();
    e->add_option("--noise-seed", ev.noise_seed, "Test noise seed")->capture_default_str();
    e->add_option("--sigma-s", ev.sigma_s, "Bilateral spatial sigma in pixels")->capture_default_str();
    e->add_option("--sigma-r", ev.sigma_r, "Bilateral range sigma in meters")->capture_default_str();
    e->add_flag("--no-filter", ev.no_filter, "Skip the bilateral filter");
    e->add_flag("--oracle", ev.oracle, "Score the ground truth itself");
    e->add_option("--report", ev.report, "Report file stem")->capture_default_str();

    InferOpts in;
    auto* i = app.add_subcommand("infer", "Depth and error maps for every frame");
    i->add_option("--checkpoint", in.checkpoint, "Checkpoint")->required();
    i->add_option("--data", in.data, "Datasets")->required()->delimiter(',');
    i->add_option("--noise-sigma", in.noise_sigma, "Noise")->check(CLI::NonNegativeNumber)->capture_default_str();
    i->add_option("--noise-seed", in.noise_seed, "Noise seed")->capture_default_str();
    i->add_option("--sigma-s", in.sigma_s, "Bilateral spatial sigma in pixels")->capture_default_str();
    i->add_option("--sigma-r", in.sigma_r, "Bilateral range sigma in meters")->capture_default_str();
    i->add_flag("--no-filter", in.no_filter, "Skip the bilateral filter");
    i->add_option("--error-range", in.error_range, "Error in meters mapped to full red")->capture_default_str();
    i->add_option("--prefix", in.prefix, "Output file prefix")->capture_default_str();

    FitOpts fit;
    auto* f = app.add_subcommand("fit-weibull", "Fit a Weibull lobe to every global transient");
    f->add_option("--data", fit.data, "Dataset")->required();
    f->add_option("--output", fit.output, "Dataset with parameter maps")->capture_default_str();

    PlotOpts pl;
    auto* p = app.add_subcommand("plot", "Plot one pixel's transient");
    p->add_option("--data", pl.data, "Dataset")->required();
    p->add_option("--frame", pl.frame, "Frame index")->capture_default_str();
    p->add_option("--row", pl.row, "Pixel row")->capture_default_str();
    p->add_option("--col", pl.col, "Pixel column")->capture_default_str();
    p->add_option("--checkpoint", pl.checkpoint, "Overlay the Global prediction of this checkpoint");
    p->add_flag("--fit", pl.fit, "Overlay a fitted Weibull lobe");
    p->add_option("--output", pl.output, "Image file name")->capture_default_str();

    SummaryOpts su;
    auto* s = app.add_subcommand("summary", "Layer tables and parameter counts");
    s->add_option("--checkpoint", su.checkpoint, "Summarize this checkpoint instead of the default models");
    s->add_option("--freq-count", su.freq_count, "Frequencies for the default models")->capture_default_str();

    for (auto* sub : {g, t, e, i, f, p, s}) sub->configurable();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex);
        return kUsage;
    }

    try {
        set_thread_limit(common.threads > 0 ? common.threads : env_threads());
        fs::create_directories(common.out);
        auto* sub = app.get_subcommands().front();
        write_text(fs::path(common.out) / (sub->get_name() + ".config.ini"), snapshot(app, *sub, common));
        if (sub == g) return cmd_gen(common, gen);
        if (sub == t) return cmd_train(common, tr);
        if (sub == e) return cmd_eval(common, ev);
        if (sub == i) return cmd_infer(common, in);
        if (sub == f) return cmd_fit(common, fit);
        if (sub == p) return cmd_plot(common, pl);
        return cmd_summary(common, su);
    } catch (const ArgumentError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kUsage;
    } catch (const DivergenceError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kDiverged;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kIo;
    }
}
