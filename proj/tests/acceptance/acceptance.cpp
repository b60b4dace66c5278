// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <fmt/format.h>

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <map>
#include <numeric>
#include <optional>
#include <set>

#include <unistd.h>

#include "gi/binary_io.hpp"
#include "gi/datapipe.hpp"
#include "gi/error.hpp"
#include "gi/forward.hpp"
#include "gi/harness.hpp"
#include "gi/metrics.hpp"
#include "gi/nn/checkpoint.hpp"
#include "gi/nn/layers.hpp"
#include "gi/nn/network.hpp"
#include "gi/nn/train.hpp"
#include "gi/patterns.hpp"
#include "gi/recon.hpp"

using namespace gi;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

int failures = 0;
std::set<int> selected;  // empty runs everything

bool wanted(int id) { return selected.empty() || selected.count(id) > 0; }

void report(int id, const std::string& name, const std::function<Verdict()>& check) {
    if (!wanted(id)) return;
    const auto t0 = Clock::now();
    Verdict v;
    try {
        v = check();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!v.pass) ++failures;
    std::cout << fmt::format("criterion {:>2} {} {} ({:.1f} s): {}\n", id, v.pass ? "PASS" : "FAIL", name, secs,
                             v.detail)
              << std::flush;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

ImagePlane random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> px(w * h);
    for (auto& v : px) v = u(rng);
    return ImagePlane(w, h, std::move(px));
}

// ---- 1 --------------------------------------------------------------------

Verdict orthogonal_oracle() {
    const auto t0 = Clock::now();
    ExperimentPlan plan;
    plan.test_images = synthetic_scenes(8, 8, 11, 4);
    plan.test_images.push_back(random_image(8, 8, 5));
    plan.primary = hadamard_signed(8, 8);
    plan.methods = {MethodSpec::parse("bc")};
    plan.rates = {1.0};
    const auto table = run_comparison(plan);
    double worst_psnr = INFINITY;
    for (const auto& r : table.rows) worst_psnr = std::min(worst_psnr, r.psnr);

    double worst_r = 0.0;
    const auto ortho = hadamard_signed(8, 8, true);
    for (const auto& x : plan.test_images)
        for (double v : residual_decompose(ortho, x).residual.field) worst_r = std::max(worst_r, std::abs(v));
    const double secs = seconds_since(t0);
    return {worst_psnr >= 100.0 && worst_r <= 1e-10 && secs < 1.0,
            fmt::format("min psnr {:.1f} dB, max |R| {:.2e}, {:.3f} s", worst_psnr, worst_r, secs)};
}

// ---- 2 --------------------------------------------------------------------

Verdict decomposition_identity() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(77);
    double worst = 0.0;
    bool bit_exact = true;
    for (int inst = 0; inst < 20; ++inst) {
        const std::size_t w = 1 + rng() % 16, h = 1 + rng() % 16, n = w * h;
        const std::size_t m = 1 + rng() % (2 * n);
        const auto kind = inst % 2 ? RandomDistribution::Binary : RandomDistribution::Uniform;
        const auto s = gen_random_patterns(rng(), m, w, h, kind);
        const auto o = random_image(w, h, rng());
        const auto d = residual_decompose(s, o);
        for (std::size_t i = 0; i < n; ++i)
            worst = std::max(worst, std::abs(d.correlation.field[i] - o.pixels()[i] - d.residual.field[i]));

        const auto b = measure(s, o);
        const auto g = bc_reconstruct(s, b, BcMode::Plain);
        for (std::size_t r = 0; r < n; ++r) {
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) acc += static_cast<double>(s.data[j * n + r]) * b.values[j];
            bit_exact = bit_exact && g.field[r] == acc;
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-10 && bit_exact && secs < 10.0,
            fmt::format("max |G-O-R| {:.2e}, brute force {}, {:.3f} s", worst, bit_exact ? "bit-exact" : "differs",
                        secs)};
}

// ---- 3 --------------------------------------------------------------------

Verdict omp_recovery() {
    const auto t0 = Clock::now();
    const std::size_t n = 64, m = 40;
    const auto psi = sparsifying_basis(SparseBasis::Dct2d, 8, 8);
    int exact = 0;
    bool monotone = true;
    std::vector<std::uint64_t> failed;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
        std::uniform_real_distribution<double> mag(1.0, 2.0);
        for (int k = 0; k < 5; ++k) theta(idx[k]) = (rng() % 2 ? 1.0 : -1.0) * mag(rng);

        std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
        Eigen::MatrixXd p(m, n);
        for (Eigen::Index i = 0; i < p.rows(); ++i)
            for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = g(rng);
        const Eigen::VectorXd bv = p * (psi * theta);
        const BucketSeries b{std::vector<double>(bv.data(), bv.data() + bv.size())};

        OmpOptions opts;
        opts.sparsity = 5;
        opts.residual_tol = 0.0;
        const auto sol = omp_reconstruct(p, 8, 8, b, opts).solution;
        for (std::size_t i = 1; i < sol.residual_norms.size(); ++i)
            monotone = monotone && sol.residual_norms[i] <= sol.residual_norms[i - 1];
        const std::set<std::size_t> got(sol.support.begin(), sol.support.end()), want(idx.begin(), idx.begin() + 5);
        if (got == want && (sol.coefficients - theta).cwiseAbs().maxCoeff() <= 1e-8)
            ++exact;
        else
            failed.push_back(seed);
    }
    const double secs = seconds_since(t0);
    std::string seeds;
    for (auto s : failed) seeds += fmt::format(" {}", s);
    return {exact >= 18 && monotone && secs < 10.0,
            fmt::format("{}/20 exact, residual {}, failed seeds:{}{}, {:.3f} s", exact,
                        monotone ? "non-increasing" : "increased", seeds.empty() ? " none" : "", seeds, secs)};
}

// ---- 4 --------------------------------------------------------------------

// Relative error with a floor at 1e-3 of the largest gradient, so entries that
// are zero up to rounding do not dominate.
struct GradCheck {
    double worst = 0.0;
    void compare(std::span<const double> analytic, std::span<const double> numeric, double scale = 0.0) {
        if (scale == 0.0)
            for (double v : numeric) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            const double denom = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-3 * scale, 1e-12});
            worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
        }
    }
};

std::vector<double> central_differences(std::span<double> x, const std::function<double()>& f, double h) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f();
        x[i] = keep - h;
        const double down = f();
        x[i] = keep;
        out[i] = (up - down) / (2 * h);
    }
    return out;
}

std::vector<double> normal_values(std::size_t n, std::uint64_t seed, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sd);
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

double weighted_sum(const nn::Tensor& t, const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += t.data()[i] * w[i];
    return s;
}

Verdict gradient_fidelity() {
    const auto t0 = Clock::now();
    const nn::Shape shape{2, 3, 6, 5};
    constexpr double h = 1e-6;

    // Convolution: input, weight and bias gradients of sum(out * w).
    GradCheck conv;
    {
        nn::Tensor x(shape, normal_values(shape.size(), 1));
        nn::ConvParams p{4, 3, 3, normal_values(4 * 3 * 9, 2, 0.3), normal_values(4, 3)};
        const auto wts = normal_values(2 * 4 * 30, 4);
        nn::ConvGradients grads(p);
        const nn::Tensor gout(nn::Shape{2, 4, 6, 5}, wts);
        const auto dx = nn::conv2d_backward(x, p, gout, grads);
        auto f = [&] { return weighted_sum(nn::conv2d(x, p), wts); };
        conv.compare(dx.data(), central_differences(x.data(), f, h));
        conv.compare(grads.weight, central_differences(p.weight, f, h));
        conv.compare(grads.bias, central_differences(p.bias, f, h));
    }

    // ReLU, with inputs kept at least 0.1 away from the kink.
    GradCheck relu;
    {
        auto v = normal_values(shape.size(), 5);
        for (auto& e : v) e = e >= 0 ? e + 0.1 : e - 0.1;
        nn::Tensor x(shape, v);
        const auto wts = normal_values(shape.size(), 6);
        const auto dx = nn::relu_backward(x, nn::Tensor(shape, wts));
        relu.compare(dx.data(), central_differences(x.data(), [&] { return weighted_sum(nn::relu(x), wts); }, h));
    }

    // Batch norm in train mode, through the batch statistics.
    GradCheck bn;
    {
        nn::Tensor x(shape, normal_values(shape.size(), 7, 2.0));
        auto p = nn::BatchNormParams::identity(3, 1e-5);
        p.gamma = {0.7, 1.3, -0.4};
        p.beta = {0.1, -0.2, 0.3};
        const auto wts = normal_values(shape.size(), 8);
        nn::BatchNormCache cache;
        nn::batch_norm(x, p, nn::Mode::Train, &cache);
        nn::BatchNormGradients grads(3);
        const auto dx = nn::batch_norm_backward(nn::Tensor(shape, wts), p, cache, grads);
        auto f = [&] { return weighted_sum(nn::batch_norm(x, p, nn::Mode::Train), wts); };
        bn.compare(dx.data(), central_differences(x.data(), f, h));
        bn.compare(grads.gamma, central_differences(p.gamma, f, h));
        bn.compare(grads.beta, central_differences(p.beta, f, h));
    }

    // Whole network, depth 3 on 8x8 inputs.
    GradCheck net;
    {
        nn::NetworkSpec spec{3, 4, 3, 1, 1e-5};
        auto params = nn::init_network(spec, 9);
        std::vector<TrainingPair> batch;
        for (std::uint64_t k = 0; k < 2; ++k) batch.push_back(make_pair(random_image(8, 8, 20 + k), random_image(8, 8, 30 + k), 1.0));
        auto res = nn::loss_gi(params, batch);
        auto views = nn::parameter_views(params);
        auto gviews = nn::gradient_views(res.grads);
        std::vector<std::vector<double>> numeric;
        double scale = 0.0;
        for (auto& v : views) {
            numeric.push_back(central_differences(v, [&] { return nn::loss_gi(params, batch).loss; }, h));
            for (double g : numeric.back()) scale = std::max(scale, std::abs(g));
        }
        for (std::size_t v = 0; v < views.size(); ++v) net.compare(gviews[v], numeric[v], scale);
    }

    const double secs = seconds_since(t0);
    const bool ok = conv.worst <= 1e-4 && relu.worst <= 1e-4 && bn.worst <= 1e-4 && net.worst <= 1e-3 && secs < 30.0;
    return {ok, fmt::format("conv {:.1e}, relu {:.1e}, batch norm {:.1e}, network {:.1e}, {:.2f} s", conv.worst,
                            relu.worst, bn.worst, net.worst, secs)};
}

// ---- 5 --------------------------------------------------------------------

Verdict overfit_sanity() {
    const auto t0 = Clock::now();
    const auto stack = gen_random_patterns(1, 1024, 32, 32, RandomDistribution::Uniform);
    const auto clean = synthetic_scene(32, 32, 3, 0);
    const auto pairs = build_training_set(std::vector<ImagePlane>{clean}, stack, BcMode::Plain);

    nn::TrainConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 1;
    cfg.init_seed = cfg.shuffle_seed = cfg.augment_seed = 5;
    const auto run = nn::train(nn::NetworkSpec::desk(), pairs, cfg);
    const double ratio = run.loss_curve.back() / run.loss_curve.front();

    const ImagePlane noisy = speckle_observation(stack, clean, BcMode::Plain);
    const double before = psnr(clean, noisy), after = psnr(clean, nn::denoise(run.params, noisy));
    const double secs = seconds_since(t0);
    return {ratio < 0.1 && after - before >= 5.0 && secs < 120.0,
            fmt::format("final/initial loss {:.4f}, psnr {:.2f} -> {:.2f} dB, {:.1f} s", ratio, before, after, secs)};
}

// ---- 6, 7, 8 --------------------------------------------------------------

// Desk-scale study shared by the method-ordering, mismatch and augmentation checks.
struct DeskStudy {
    static constexpr std::size_t kSize = 32;
    static constexpr std::size_t kTrain = 300;
    static constexpr std::size_t kTest = 8;

    fs::path dir;
    ExperimentPlan plan;
    AblationResult ablation;
    MetricTable comparison;
    MismatchResult mismatch;
    double method_seconds = 0.0;

    explicit DeskStudy(fs::path work) : dir(std::move(work)) {
        fs::create_directories(dir);
        plan.test_images = synthetic_scenes(kSize, kSize, 1, kTest, 100000);
        plan.primary = gen_random_patterns(1, kSize * kSize, kSize, kSize, RandomDistribution::Uniform);
        plan.mismatched = gen_random_patterns(2, kSize * kSize, kSize, kSize, RandomDistribution::Uniform);
        plan.rates = {1.0};
        plan.seed = 1;

        const auto scenes = synthetic_scenes(kSize, kSize, 1, kTrain, 0);
        const auto train_manifest = manifest_from_images("synthetic", scenes, kSize, kSize, "train");
        const auto test_manifest = manifest_from_images("synthetic", plan.test_images, kSize, kSize, "test");
        require_disjoint(train_manifest, test_manifest);

        nn::TrainConfig cfg;
        cfg.epochs = nn::scaled_checkpoints(0.05).back();
        cfg.lr_milestones = {cfg.epochs * 6 / 10, cfg.epochs * 85 / 100};
        cfg.checkpoint_epochs = nn::scaled_checkpoints(0.05);
        cfg.init_seed = cfg.shuffle_seed = cfg.augment_seed = 1;

        // Speckle-conditioned denoiser, trained with and without augmentation.
        const auto t0 = Clock::now();
        AblationSetup setup;
        setup.config = cfg;
        setup.training = build_training_set(scenes, plan.primary, BcMode::Plain);
        setup.settings = {Augmentation::None, Augmentation::HFlipRotation};
        ablation = run_augmentation_ablation(plan, setup);
        const double speckle_seconds = seconds_since(t0) / 2.0;

        const auto t1 = Clock::now();
        nn::Checkpoint speckle{{}, ablation.runs[0].params};
        speckle.meta.stack_checksum = plan.primary.checksum();
        speckle.meta.sampling_rate = 1.0;
        speckle.meta.epoch = cfg.epochs;
        nn::save_checkpoint(dir / "speckle.ginn", speckle);

        // Gaussian-noise baseline with the same schedule.
        auto gauss = nn::gaussian_denoiser_baseline(nn::NetworkSpec::desk(), scenes, 25.0 / 255.0, cfg, 1);
        nn::Checkpoint gck{{}, gauss.params};
        gck.meta.task = "gaussian";
        gck.meta.sigma = 25.0 / 255.0;
        gck.meta.epoch = cfg.epochs;
        nn::save_checkpoint(dir / "gaussian.ginn", gck);

        plan.methods = {MethodSpec::parse("bc"), MethodSpec::parse("cs-omp"),
                        MethodSpec::parse("nn-speckle:" + (dir / "speckle.ginn").string()),
                        MethodSpec::parse("nn-gaussian:" + (dir / "gaussian.ginn").string())};
        comparison = run_comparison(plan);
        method_seconds = speckle_seconds + seconds_since(t1);

        auto mplan = plan;
        mplan.methods = {plan.methods[2]};
        mismatch = run_mismatch_experiment(mplan);

        emit_report(comparison, ReportFormat::Csv, dir / "comparison.csv");
        emit_report(mismatch.table, ReportFormat::Csv, dir / "mismatch.csv");
        emit_report(ablation.table, ReportFormat::Csv, dir / "ablation.csv");
        emit_report(ablation.table, ReportFormat::PlotData, dir / "ablation_plot.csv");
    }
};

Verdict method_ordering(const DeskStudy& s) {
    const auto& t = s.comparison;
    const double bc = t.mean_psnr("bc"), omp = t.mean_psnr("cs-omp");
    const double spk = t.mean_psnr(s.plan.methods[2].name()), gau = t.mean_psnr(s.plan.methods[3].name());
    const bool ok = bc < omp && omp < spk && spk - omp >= 1.0 && spk > gau && s.method_seconds < 1800.0;
    return {ok, fmt::format("bc {:.2f}, cs-omp {:.2f}, nn-speckle {:.2f}, nn-gaussian {:.2f} dB (speckle - omp {:+.2f} dB), "
                            "{:.0f} s",
                            bc, omp, spk, gau, spk - omp, s.method_seconds)};
}

Verdict mismatch_property(const DeskStudy& s) {
    return {s.mismatch.mean_gap() >= 0.5, fmt::format("matched {:.2f}, mismatched {:.2f} dB, gap {:+.2f} dB",
                                                      s.mismatch.mean_matched, s.mismatch.mean_mismatched,
                                                      s.mismatch.mean_gap())};
}

Verdict augmentation_property(const DeskStudy& s) {
    const double none = s.ablation.table.mean_psnr("aug-none");
    const double hr = s.ablation.table.mean_psnr("aug-hflip+rotation");
    return {none - hr >= 0.5, fmt::format("none {:.2f}, hflip+rotation {:.2f} dB, margin {:+.2f} dB", none, hr, none - hr)};
}

// ---- 9 --------------------------------------------------------------------

// Runs from inside root with relative paths, so recorded paths match between runs.
int run_cli(const fs::path& root, const std::string& args) {
    const std::string cmd = fmt::format("cd \"{}\" && \"{}\" {} > /dev/null 2>&1", root.string(), GHOSTIMG_PATH, args);
    return std::system(cmd.c_str());
}

bool run_pipeline(const fs::path& root) {
    fs::create_directories(root);
    const auto q = [](const std::string& rel) { return rel; };
    const std::vector<std::string> steps{
        "--seed 3 --out " + q("a.gips") + " gen-patterns --kind random-uniform --width 16 --height 16 --rate 1",
        "--seed 4 --out " + q("b.gips") + " gen-patterns --kind interference --width 16 --height 16 --rate 1",
        "--out " + q("a.gram") + " gram --patterns " + q("a.gips"),
        "--seed 5 --out " + q("train") + " gen-images --count 12 --width 16 --height 16",
        "--seed 5 --out " + q("test") + " gen-images --count 3 --width 16 --height 16 --first-index 1000",
        "--out " + q("train.gids") + " build-dataset --images " + q("train") + " --patterns " + q("a.gips"),
        "--seed 6 --desk-scale 0.002 --out " + q("speckle") + " train --dataset " + q("train.gids") +
            " --patterns " + q("a.gips") + " --depth 3 --channels 4 --batch 4 --augmentation hflip+rotation",
        "--seed 6 --desk-scale 0.002 --out " + q("gauss") + " train --dataset " + q("train.gids") +
            " --task gaussian --depth 3 --channels 4 --batch 4",
        "--seed 7 --out " + q("eval") + " evaluate --test-images " + q("test") + " --patterns " + q("a.gips") +
            " --methods bc cs-omp nn-speckle:" + q("speckle/final.ginn") + " nn-gaussian:" + q("gauss/final.ginn"),
        "--seed 7 --out " + q("report.csv") + " report --table " + q("eval/comparison.csv") + " --format plot-data",
    };
    for (const auto& s : steps)
        if (run_cli(root, s) != 0) {
            std::cout << "  pipeline step failed: ghostimg " << s << "\n";
            return false;
        }
    return true;
}

std::map<std::string, std::vector<std::uint8_t>> tree_bytes(const fs::path& root) {
    std::map<std::string, std::vector<std::uint8_t>> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path());
    return out;
}

Verdict determinism(const fs::path& work) {
    if (!run_pipeline(work / "run1") || !run_pipeline(work / "run2")) return {false, "pipeline did not complete"};
    const auto a = tree_bytes(work / "run1"), b = tree_bytes(work / "run2");
    std::size_t same = 0;
    std::string diff;
    for (const auto& [name, bytes] : a) {
        const auto it = b.find(name);
        if (it == b.end() || it->second != bytes)
            diff += " " + name;
        else
            ++same;
    }
    const bool ok = diff.empty() && a.size() == b.size() && a.count("a.gips") && a.count("speckle/final.ginn") &&
                    a.count("eval/comparison.csv");
    return {ok, fmt::format("{} of {} files byte-identical{}", same, a.size(), diff.empty() ? "" : "; differ:" + diff)};
}

// ---- 10 -------------------------------------------------------------------

Verdict metric_values() {
    const auto a = ImagePlane::filled(16, 16, 0.3), b = ImagePlane::filled(16, 16, 0.4);
    const double p20 = psnr(a, b);
    const double p255 = psnr(ImagePlane::filled(4, 4, 0.0), ImagePlane::filled(4, 4, 1.0), 255.0);
    const auto x = random_image(20, 20, 1), y = random_image(20, 20, 2);
    const double self = ssim(x, x), sym = std::abs(ssim(x, y) - ssim(y, x));
    const bool ok = std::abs(p20 - 20.0) <= 1e-12 && std::abs(p255 - 48.1308) <= 1e-3 && self == 1.0 && sym <= 1e-12;
    return {ok, fmt::format("psnr {:.15f} dB, {:.4f} dB; ssim(x,x) {}, |ssim(x,y)-ssim(y,x)| {:.1e}", p20, p255,
                            self, sym)};
}

}  // namespace

// Optional arguments restrict the run to the listed criterion numbers.
int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    const auto work = fs::temp_directory_path() / fmt::format("gi_acceptance_{}", ::getpid());
    fs::remove_all(work);
    fs::create_directories(work);

    report(1, "orthogonal oracle", orthogonal_oracle);
    report(2, "decomposition identity", decomposition_identity);
    report(3, "omp recovery", omp_recovery);
    report(4, "gradient fidelity", gradient_fidelity);
    report(5, "overfit sanity", overfit_sanity);
    report(10, "metric values", metric_values);
    report(9, "cli determinism", [&] { return determinism(work / "cli"); });

    std::optional<DeskStudy> study;
    std::string study_error;
    if (wanted(6) || wanted(7) || wanted(8)) {
        std::cout << "training desk-scale denoisers for criteria 6-8...\n" << std::flush;
        try {
            study.emplace(work / "desk");
        } catch (const std::exception& e) {
            study_error = e.what();
        }
    }
    auto with_study = [&](auto check) {
        return [&, check]() -> Verdict {
            if (!study) return {false, "desk study failed: " + study_error};
            return check(*study);
        };
    };
    report(6, "method ordering", with_study(method_ordering));
    report(7, "mismatch property", with_study(mismatch_property));
    report(8, "augmentation property", with_study(augmentation_property));
    if (study) {
        const fs::path keep = fs::current_path() / "acceptance_artifacts";
        fs::create_directories(keep);
        for (const char* f : {"comparison.csv", "mismatch.csv", "ablation.csv", "ablation_plot.csv"})
            fs::copy_file(work / "desk" / f, keep / f, fs::copy_options::overwrite_existing);
    }

    fs::remove_all(work);
    std::cout << fmt::format("{} criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
