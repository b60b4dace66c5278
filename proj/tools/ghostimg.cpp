// ghostimg: command-line front end for the ghost-imaging toolkit.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gi/binary_io.hpp"
#include "gi/datapipe.hpp"
#include "gi/error.hpp"
#include "gi/forward.hpp"
#include "gi/harness.hpp"
#include "gi/nn/checkpoint.hpp"
#include "gi/nn/train.hpp"
#include "gi/patterns.hpp"
#include "gi/recon.hpp"
#include "json_config.hpp"

namespace fs = std::filesystem;
using namespace gi;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

struct Globals {
    std::uint64_t seed = 0;
    std::string out;
    std::optional<double> desk_scale;
};

fs::path require_out(const Globals& g) {
    if (g.out.empty()) fail(ErrorKind::InvalidArgument, "--out is required");
    return g.out;
}

fs::path out_dir(const Globals& g) {
    const auto dir = require_out(g);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

// ---- gen-patterns ----

struct PatternOpts {
    std::string kind = "random-binary";
    std::size_t width = 32;
    std::size_t height = 32;
    std::optional<std::size_t> count;
    std::optional<double> rate;
    gi::EmitterLayout layout;
    std::optional<double> pitch_mm;
};

void add_pattern_cmd(CLI::App& app, Globals& g, PatternOpts& o) {
    auto* cmd = app.add_subcommand("gen-patterns", "Generate an illumination pattern stack");
    cmd->add_option("--kind", o.kind,
                    "random-binary | random-uniform | hadamard | hadamard-signed | hadamard-orthonormal | interference")
        ->capture_default_str();
    cmd->add_option("--width", o.width)->capture_default_str();
    cmd->add_option("--height", o.height)->capture_default_str();
    cmd->add_option("--count", o.count, "number of patterns M");
    cmd->add_option("--rate", o.rate, "sampling rate M/N (alternative to --count)");
    cmd->add_option("--emitters", o.layout.emitter_count)->capture_default_str();
    cmd->add_option("--disk-mm", o.layout.disk_diameter_mm)->capture_default_str();
    cmd->add_option("--pinhole-mm", o.layout.pinhole_diameter_mm)->capture_default_str();
    cmd->add_option("--wavelength-nm", o.layout.wavelength_nm)->capture_default_str();
    cmd->add_option("--distance-m", o.layout.propagation_distance_m)->capture_default_str();
    cmd->add_option("--pitch-mm", o.pitch_mm, "detector pixel pitch");
    cmd->add_flag("--envelope", o.layout.pinhole_envelope, "apply the single-pinhole envelope");
    cmd->callback([&] {
        const std::size_t n = o.width * o.height;
        std::size_t m = n;
        if (o.count && o.rate) fail(ErrorKind::InvalidArgument, "give --count or --rate, not both");
        if (o.count) m = *o.count;
        if (o.rate) {
            require(*o.rate > 0.0, ErrorKind::InvalidArgument, "--rate must be positive");
            m = static_cast<std::size_t>(std::llround(*o.rate * static_cast<double>(n)));
        }
        PatternStack s;
        if (o.kind == "random-binary" || o.kind == "random-uniform") {
            s = gen_random_patterns(g.seed, m, o.width, o.height,
                                    o.kind == "random-binary" ? RandomDistribution::Binary
                                                              : RandomDistribution::Uniform);
        } else if (o.kind == "hadamard" || o.kind == "hadamard-signed" || o.kind == "hadamard-orthonormal") {
            s = o.kind == "hadamard" ? gen_hadamard_patterns(o.width, o.height)
                                     : hadamard_signed(o.width, o.height, o.kind == "hadamard-orthonormal");
            if (m < s.m_patterns) s = s.prefix(m);
        } else if (o.kind == "interference") {
            o.layout.detector_pitch_mm = o.pitch_mm;
            s = gen_interference_patterns(o.layout, g.seed, m, o.width, o.height);
        } else {
            fail(ErrorKind::InvalidArgument, "unknown pattern kind '" + o.kind + "'");
        }
        save_patterns(require_out(g), s);
        std::cout << fmt::format("{} patterns {}x{} kind={} checksum={}\n", s.m_patterns, s.width, s.height,
                                 to_string(s.kind), s.checksum());
    });
}

// ---- gram ----

void add_gram_cmd(CLI::App& app, Globals& g) {
    static std::string patterns;
    static GramOptions opts;
    static bool no_cond = false;
    auto* cmd = app.add_subcommand("gram", "Gram-matrix diagnostics of a pattern stack");
    cmd->add_option("--patterns", patterns)->required();
    cmd->add_option("--pixel-cap", opts.pixel_cap)->capture_default_str();
    cmd->add_flag("--no-condition", no_cond, "skip the condition number");
    cmd->callback([&g] {
        opts.compute_condition_number = !no_cond;
        const auto s = load_patterns(patterns);
        const auto d = gram_diagnostics(s, opts);
        const auto text = fmt::format(
            "patterns={}\nchecksum={}\nfrobenius_deviation={}\nmax_off_diagonal_coherence={}\ncondition_number={}\n",
            s.m_patterns, s.checksum(), d.frobenius_deviation, d.max_off_diagonal_coherence, d.condition_number);
        std::cout << text;
        if (!g.out.empty()) write_text_file(g.out, text);
    });
}

// ---- measure ----

void add_measure_cmd(CLI::App& app, Globals& g) {
    static std::string patterns, image, noise = "none", csv;
    auto* cmd = app.add_subcommand("measure", "Simulate bucket-detector readings");
    cmd->add_option("--patterns", patterns)->required();
    cmd->add_option("--image", image)->required();
    cmd->add_option("--noise", noise, "none | gaussian:<sigma> | poisson:<photons per unit>")->capture_default_str();
    cmd->add_option("--csv", csv, "also write index,value rows");
    cmd->callback([&g] {
        const auto s = load_patterns(patterns);
        const auto x = load_gray_image(image);
        DetectorNoise dn;
        if (noise != "none") {
            const auto colon = noise.find(':');
            if (colon == std::string::npos) fail(ErrorKind::InvalidArgument, "bad --noise '" + noise + "'");
            const auto kind = noise.substr(0, colon);
            double v = 0.0;
            try {
                v = std::stod(noise.substr(colon + 1));
            } catch (const std::exception&) {
                fail(ErrorKind::InvalidArgument, "bad --noise '" + noise + "'");
            }
            if (kind == "gaussian") dn = DetectorNoise::gaussian(v);
            else if (kind == "poisson") dn = DetectorNoise::poisson(v);
            else fail(ErrorKind::InvalidArgument, "bad --noise '" + noise + "'");
        }
        const auto b = measure_noisy(s, x, dn, g.seed);
        save_buckets(require_out(g), b);
        if (!csv.empty()) write_text_file(csv, buckets_to_csv(b));
        std::cout << fmt::format("{} bucket values\n", b.size());
    });
}

// ---- reconstruct ----

void add_reconstruct_cmd(CLI::App& app, Globals& g) {
    static std::string patterns, buckets, method = "bc-plain", basis = "dct2d", image;
    static std::optional<std::size_t> sparsity;
    static std::optional<double> tol;
    auto* cmd = app.add_subcommand("reconstruct", "Recover an image from patterns and buckets");
    cmd->add_option("--patterns", patterns)->required();
    cmd->add_option("--buckets", buckets)->required();
    cmd->add_option("--method", method, "bc-plain | bc-centered | cs-omp")->capture_default_str();
    cmd->add_option("--basis", basis, "dct2d | identity")->capture_default_str();
    cmd->add_option("--sparsity", sparsity);
    cmd->add_option("--tol", tol, "OMP residual tolerance");
    cmd->add_option("--image", image, "also write the display-normalized image (.pgm or .png)");
    cmd->callback([&g] {
        const auto s = load_patterns(patterns);
        const auto b = load_buckets(buckets);
        Reconstruction r;
        if (method == "bc-plain" || method == "bc-centered") {
            r = bc_reconstruct(s, b, method == "bc-plain" ? BcMode::Plain : BcMode::Centered);
        } else if (method == "cs-omp") {
            const auto res = omp_reconstruct(s, b, {sparse_basis_from_string(basis), sparsity, tol});
            for (const auto& w : res.solution.warnings) warn(w);
            r = res.reconstruction;
        } else {
            fail(ErrorKind::InvalidArgument, "unknown method '" + method + "'");
        }
        save_reconstruction(require_out(g), r);
        if (!image.empty()) save_gray_image(image, normalize_for_display(r));
    });
}

// ---- gen-images ----

void add_gen_images_cmd(CLI::App& app, Globals& g) {
    static std::size_t count = 10, width = 32, height = 32, first = 0;
    auto* cmd = app.add_subcommand("gen-images", "Write synthetic piecewise-flat test scenes as PGM");
    cmd->add_option("--count", count)->capture_default_str();
    cmd->add_option("--width", width)->capture_default_str();
    cmd->add_option("--height", height)->capture_default_str();
    cmd->add_option("--first-index", first, "scene index of the first image")->capture_default_str();
    cmd->callback([&g] {
        const auto dir = out_dir(g);
        for (std::size_t i = 0; i < count; ++i)
            save_gray_image(dir / fmt::format("scene-{:06}.pgm", first + i),
                            synthetic_scene(width, height, g.seed, first + i));
        std::cout << fmt::format("{} images in {}\n", count, dir.string());
    });
}

// ---- build-dataset ----

void add_build_dataset_cmd(CLI::App& app, Globals& g) {
    static std::string images, patterns, split = "train", mode = "plain";
    static std::optional<std::size_t> patch, stride;
    auto* cmd = app.add_subcommand("build-dataset", "Pair clean patches with their speckle observations");
    cmd->add_option("--images", images, "directory of grayscale images")->required();
    cmd->add_option("--patterns", patterns)->required();
    cmd->add_option("--patch", patch, "patch size (default: stack width)");
    cmd->add_option("--stride", stride, "patch stride (default: patch size)");
    cmd->add_option("--split", split)->capture_default_str();
    cmd->add_option("--mode", mode, "plain | centered")->capture_default_str();
    cmd->callback([&g] {
        const auto s = load_patterns(patterns);
        const auto size = patch.value_or(s.width);
        auto manifest = scan_directory(images, size, stride.value_or(size), split);
        for (const auto& e : manifest.entries)
            if (e.patches == 0) warn(fmt::format("{} is smaller than a {}px patch and contributes nothing", e.path, size));
        const auto archive = build_training_set(manifest, s, bc_mode_from_string(mode));
        save_archive(require_out(g), archive);
        std::cout << fmt::format("{} pairs from {} images, stack {}\n", archive.pairs.size(), manifest.entries.size(),
                                 archive.manifest.stack_checksum);
    });
}

// ---- training options shared by train and ablate-augmentation ----

struct TrainOpts {
    std::optional<std::size_t> epochs;
    std::size_t batch = 16;
    double lr = 1e-3;
    std::vector<std::size_t> milestones;
    double lr_decay = 0.1;
    std::string optimizer = "adam";
    std::string augmentation = "none";
    std::optional<std::size_t> depth;
    std::optional<std::size_t> channels;
    std::optional<double> grad_clip;
};

void add_train_options(CLI::App* cmd, TrainOpts& o) {
    cmd->add_option("--epochs", o.epochs, "default: last mark of the (scaled) checkpoint grid");
    cmd->add_option("--batch", o.batch)->capture_default_str();
    cmd->add_option("--lr", o.lr)->capture_default_str();
    cmd->add_option("--lr-milestones", o.milestones, "epochs after which lr is multiplied by --lr-decay");
    cmd->add_option("--lr-decay", o.lr_decay)->capture_default_str();
    cmd->add_option("--optimizer", o.optimizer, "adam | sgd-momentum")->capture_default_str();
    cmd->add_option("--depth", o.depth, "default 17, or 7 with --desk-scale");
    cmd->add_option("--channels", o.channels, "default 64, or 32 with --desk-scale");
    cmd->add_option("--grad-clip", o.grad_clip, "global gradient-norm threshold");
}

struct Training {
    nn::NetworkSpec spec;
    nn::TrainConfig config;
};

Training resolve_training(const TrainOpts& o, const Globals& g) {
    Training t;
    t.spec = g.desk_scale ? nn::NetworkSpec::desk() : nn::NetworkSpec::full();
    if (o.depth) t.spec.depth = *o.depth;
    if (o.channels) t.spec.channels = *o.channels;
    auto& c = t.config;
    const auto marks = nn::scaled_checkpoints(g.desk_scale.value_or(1.0));
    c.epochs = o.epochs.value_or(marks.back());
    for (auto m : marks)
        if (m <= c.epochs) c.checkpoint_epochs.push_back(m);
    if (c.checkpoint_epochs.empty() || c.checkpoint_epochs.back() != c.epochs) c.checkpoint_epochs.push_back(c.epochs);
    c.batch_size = o.batch;
    c.learning_rate = o.lr;
    c.lr_milestones = o.milestones;
    c.lr_decay = o.lr_decay;
    c.optimizer = nn::optimizer_from_string(o.optimizer);
    c.augmentation = augmentation_from_string(o.augmentation);
    c.init_seed = g.seed;
    c.shuffle_seed = g.seed;
    c.augment_seed = g.seed;
    c.grad_clip = o.grad_clip;
    return t;
}

// ---- train ----

void add_train_cmd(CLI::App& app, Globals& g) {
    static TrainOpts o;
    static std::string dataset, patterns, task = "speckle";
    static double sigma = 25.0;
    auto* cmd = app.add_subcommand("train", "Train a residual denoiser");
    cmd->add_option("--dataset", dataset, "archive from build-dataset")->required();
    cmd->add_option("--patterns", patterns, "stack expected at training time (checked against the archive)");
    cmd->add_option("--task", task, "speckle | gaussian")->capture_default_str();
    cmd->add_option("--sigma", sigma, "gaussian task noise level, in 1/255 units")->capture_default_str();
    cmd->add_option("--augmentation", o.augmentation, "none | hflip | rotation | hflip+rotation")
        ->capture_default_str();
    add_train_options(cmd, o);
    cmd->callback([&g] {
        const auto dir = out_dir(g);
        const auto archive = load_archive(dataset);
        require(!archive.pairs.empty(), ErrorKind::InvalidArgument, "dataset archive holds no pairs");
        if (!patterns.empty())
            if (auto w = stack_mismatch_warning(archive.manifest, load_patterns(patterns))) warn(*w);
        const auto t = resolve_training(o, g);

        nn::CheckpointMeta meta;
        meta.task = task;
        meta.recon_mode = archive.manifest.recon_mode;
        meta.sampling_rate = archive.manifest.sampling_rate;
        std::vector<TrainingPair> pairs;
        if (task == "speckle") {
            meta.stack_checksum = archive.manifest.stack_checksum;
            pairs = archive.pairs;
        } else if (task == "gaussian") {
            meta.sigma = sigma / 255.0;
            meta.stack_checksum.clear();
            std::vector<ImagePlane> clean;
            for (const auto& p : archive.pairs)
                clean.emplace_back(p.width, p.height, std::vector<double>(p.clean.begin(), p.clean.end()));
            pairs = nn::gaussian_pairs(clean, meta.sigma, g.seed);
        } else {
            fail(ErrorKind::InvalidArgument, "unknown task '" + task + "'");
        }

        auto sink = [&](std::size_t epoch, const nn::NetworkParams& p, std::span<const double> curve) {
            auto m = meta;
            m.epoch = epoch;
            nn::save_checkpoint(dir / fmt::format("ckpt-epoch-{:05}.ginn", epoch), {m, p});
            std::cout << fmt::format("epoch {} mean loss {:.6f}\n", epoch, curve.back());
        };
        const auto result = nn::train(t.spec, pairs, t.config, sink);
        meta.epoch = t.config.epochs;
        nn::save_checkpoint(dir / "final.ginn", {meta, result.params});
        write_text_file(dir / "loss.csv", nn::loss_curve_csv(result.loss_curve));
    });
}

// ---- denoise ----

void add_denoise_cmd(CLI::App& app, Globals& g) {
    static std::string checkpoint, input;
    auto* cmd = app.add_subcommand("denoise", "Apply a trained denoiser to a reconstruction or image");
    cmd->add_option("--checkpoint", checkpoint)->required();
    cmd->add_option("--input", input, ".girc reconstruction (display-normalized first) or grayscale image")
        ->required();
    cmd->callback([&g] {
        const auto ckpt = nn::load_checkpoint(checkpoint);
        const auto bytes = read_file(input);
        const bool raw = bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "GIRC");
        const ImagePlane y = raw ? normalize_for_display(deserialize_reconstruction(bytes)) : load_gray_image(input);
        save_gray_image(require_out(g), nn::denoise(ckpt.params, y));
    });
}

// ---- evaluation plans ----

struct PlanOpts {
    std::string test_images;
    std::string patterns;
    std::string mismatched;
    std::vector<std::string> methods;
    std::vector<double> rates{0.5, 1.0};
    std::string mode = "plain";
    std::optional<std::size_t> sparsity;
    std::string basis = "dct2d";
    std::string dataset;
    bool stretch = true;
};

void add_plan_options(CLI::App* cmd, PlanOpts& o) {
    cmd->add_option("--test-images", o.test_images, "directory of held-out images")->required();
    cmd->add_option("--patterns", o.patterns, "primary stack")->required();
    cmd->add_option("--mode", o.mode, "plain | centered correlation")->capture_default_str();
    cmd->add_option("--dataset", o.dataset, "training archive; its images must not appear among the test images");
    cmd->add_option("--stretch-images", o.stretch, "min-max stretch test images to [0,1] before scoring")
        ->capture_default_str();
}

ExperimentPlan build_plan(const PlanOpts& o, const Globals& g) {
    ExperimentPlan plan;
    plan.primary = load_patterns(o.patterns);
    if (!o.mismatched.empty()) plan.mismatched = load_patterns(o.mismatched);
    const auto manifest = scan_directory(o.test_images, plan.primary.width, plan.primary.width, "test");
    if (!o.dataset.empty()) require_disjoint(load_archive(o.dataset).manifest, manifest);
    plan.test_images = load_manifest_images(manifest);
    for (const auto& e : manifest.entries) plan.image_names.push_back(e.path);
    for (const auto& m : o.methods) plan.methods.push_back(MethodSpec::parse(m));
    plan.rates = o.rates;
    plan.recon_mode = bc_mode_from_string(o.mode);
    plan.omp.basis = sparse_basis_from_string(o.basis);
    plan.omp.sparsity = o.sparsity;
    plan.seed = g.seed;
    plan.out_dir = g.out;
    plan.stretch_images = o.stretch;
    return plan;
}

void write_outputs(const fs::path& dir, const std::string& stem, const MetricTable& t, const CLI::App* app) {
    emit_report(t, ReportFormat::Csv, dir / (stem + ".csv"));
    emit_report(t, ReportFormat::PlotData, dir / (stem + "_plot.csv"));
    std::string notes;
    for (const auto& n : t.notes) {
        notes += n + "\n";
        warn(n);
    }
    write_text_file(dir / (stem + "_notes.txt"), notes);
    write_text_file(dir / (stem + "_record.json"), JsonConfig::options_json(app->get_parent(), true).dump(2) + "\n");
    for (const auto& r : t.rows)
        if (r.image == kAverageRow)
            std::cout << fmt::format("{:<20} rate {:<5} psnr {:8.3f} dB  ssim {:.4f}\n", r.method, r.rate, r.psnr, r.ssim);
}

void add_evaluate_cmd(CLI::App& app, Globals& g) {
    static PlanOpts o;
    auto* cmd = app.add_subcommand("evaluate", "Compare reconstruction methods on held-out images");
    add_plan_options(cmd, o);
    cmd->add_option("--methods", o.methods, "bc, cs-omp, nn-gaussian:<ckpt>, nn-speckle:<ckpt>")->required();
    cmd->add_option("--rates", o.rates)->capture_default_str();
    cmd->add_option("--sparsity", o.sparsity, "OMP atoms (default N/10)");
    cmd->add_option("--basis", o.basis, "OMP basis: dct2d | identity")->capture_default_str();
    cmd->callback([&g, cmd] {
        const auto dir = out_dir(g);
        const auto table = run_comparison(build_plan(o, g));
        write_outputs(dir, "comparison", table, cmd);
    });
}

void add_mismatch_cmd(CLI::App& app, Globals& g) {
    static PlanOpts o;
    static std::string checkpoint;
    auto* cmd = app.add_subcommand("mismatch", "Matched versus mismatched speckle sequences");
    add_plan_options(cmd, o);
    cmd->add_option("--mismatched-patterns", o.mismatched)->required();
    cmd->add_option("--checkpoint", checkpoint, "denoiser trained on the primary stack")->required();
    cmd->callback([&g, cmd] {
        const auto dir = out_dir(g);
        o.methods = {"nn-speckle:" + checkpoint};
        const auto res = run_mismatch_experiment(build_plan(o, g));
        write_outputs(dir, "mismatch", res.table, cmd);
        std::cout << fmt::format("matched {:.3f} dB, mismatched {:.3f} dB, gap {:.3f} dB\n", res.mean_matched,
                                 res.mean_mismatched, res.mean_gap());
    });
}

void add_ablate_cmd(CLI::App& app, Globals& g) {
    static PlanOpts o;
    static TrainOpts t;
    static std::vector<std::string> settings{"none", "hflip", "rotation", "hflip+rotation"};
    auto* cmd = app.add_subcommand("ablate-augmentation", "Train one denoiser per augmentation setting");
    add_plan_options(cmd, o);
    cmd->get_option("--dataset")->required();
    cmd->add_option("--settings", settings)->capture_default_str();
    add_train_options(cmd, t);
    cmd->callback([&g, cmd] {
        const auto dir = out_dir(g);
        auto plan = build_plan(o, g);
        auto archive = load_archive(o.dataset);
        if (auto w = stack_mismatch_warning(archive.manifest, plan.primary)) warn(*w);
        const auto tr = resolve_training(t, g);
        AblationSetup setup{tr.spec, tr.config, std::move(archive.pairs), {}};
        for (const auto& s : settings) setup.settings.push_back(augmentation_from_string(s));
        const auto res = run_augmentation_ablation(plan, setup);
        write_outputs(dir, "ablation", res.table, cmd);
    });
}

void add_report_cmd(CLI::App& app, Globals& g) {
    static std::string table, format = "csv";
    auto* cmd = app.add_subcommand("report", "Re-emit a metric table as CSV or plot data");
    cmd->add_option("--table", table, "CSV written by evaluate, mismatch or ablate-augmentation")->required();
    cmd->add_option("--format", format, "csv | plot-data")->capture_default_str();
    cmd->callback([&g] {
        const auto t = parse_report_csv(std::string(
            [&] { const auto b = read_file(table); return std::string(b.begin(), b.end()); }()));
        ReportFormat f;
        if (format == "csv") f = ReportFormat::Csv;
        else if (format == "plot-data") f = ReportFormat::PlotData;
        else fail(ErrorKind::InvalidArgument, "unknown format '" + format + "'");
        if (g.out.empty()) std::cout << render_report(t, f);
        else emit_report(t, f, g.out);
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ghost-imaging simulation, reconstruction and denoising toolkit", "ghostimg"};
    app.require_subcommand(1);
    app.fallthrough();
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file: top-level keys are global options, nested objects per verb");

    Globals g;
    app.add_option("--seed", g.seed, "seed for every random stream")->capture_default_str();
    app.add_option("--out", g.out, "output file or directory");
    app.add_option("--desk-scale", g.desk_scale,
                   "scale the 500/1000/1500/2000 epoch grid and use the 7-layer, 32-channel network");

    PatternOpts pattern_opts;
    add_pattern_cmd(app, g, pattern_opts);
    add_gram_cmd(app, g);
    add_measure_cmd(app, g);
    add_reconstruct_cmd(app, g);
    add_gen_images_cmd(app, g);
    add_build_dataset_cmd(app, g);
    add_train_cmd(app, g);
    add_denoise_cmd(app, g);
    add_evaluate_cmd(app, g);
    add_mismatch_cmd(app, g);
    add_ablate_cmd(app, g);
    add_report_cmd(app, g);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::NumericalFailure ? kExitNumerical : kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitOk;
}
