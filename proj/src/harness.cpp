#include "gi/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "gi/binary_io.hpp"
#include "gi/datapipe.hpp"
#include "gi/error.hpp"
#include "gi/forward.hpp"
#include "gi/metrics.hpp"
#include "gi/nn/checkpoint.hpp"

namespace gi {

namespace fs = std::filesystem;

std::string MethodSpec::name() const {
    switch (kind) {
        case Kind::Bc: return "bc";
        case Kind::CsOmp: return "cs-omp";
        case Kind::NnGaussian: return "nn-gaussian";
        case Kind::NnSpeckle: return "nn-speckle";
    }
    return "?";
}

MethodSpec MethodSpec::parse(const std::string& text) {
    const auto colon = text.find(':');
    const auto head = text.substr(0, colon);
    const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
    MethodSpec m;
    if (head == "bc") m.kind = Kind::Bc;
    else if (head == "cs-omp") m.kind = Kind::CsOmp;
    else if (head == "nn-gaussian") m.kind = Kind::NnGaussian;
    else if (head == "nn-speckle") m.kind = Kind::NnSpeckle;
    else fail(ErrorKind::PlanError, "unknown method '" + text + "'");
    const bool nn = m.kind == Kind::NnGaussian || m.kind == Kind::NnSpeckle;
    if (nn && tail.empty()) fail(ErrorKind::PlanError, "method " + head + " needs a checkpoint (" + head + ":<path>)");
    if (!nn && !tail.empty()) fail(ErrorKind::PlanError, "method " + head + " takes no argument");
    m.checkpoint = tail;
    return m;
}

double MetricTable::mean_psnr(const std::string& method, std::optional<double> rate) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows)
        if (r.image != kAverageRow && r.method == method && (!rate || r.rate == *rate)) {
            sum += r.psnr;
            ++n;
        }
    require(n > 0, ErrorKind::InvalidArgument, "no rows for method " + method);
    return sum / static_cast<double>(n);
}

PatternStack stack_at_rate(const PatternStack& stack, double rate) {
    require(rate > 0.0 && std::isfinite(rate), ErrorKind::PlanError, "sampling rate must be positive");
    const auto m = static_cast<std::size_t>(std::llround(rate * static_cast<double>(stack.pixels())));
    if (m < 1 || m > stack.m_patterns)
        fail(ErrorKind::PlanError, fmt::format("rate {} needs {} patterns but the stack has {}", rate, m,
                                               stack.m_patterns));
    return m == stack.m_patterns ? stack : stack.prefix(m);
}

namespace {

std::vector<std::string> names_for(const ExperimentPlan& plan) {
    if (!plan.image_names.empty()) {
        require(plan.image_names.size() == plan.test_images.size(), ErrorKind::PlanError,
                "image names do not match the test images");
        return plan.image_names;
    }
    std::vector<std::string> n;
    for (std::size_t i = 0; i < plan.test_images.size(); ++i) n.push_back(fmt::format("image-{:04}", i));
    return n;
}

void check_images(const ExperimentPlan& plan) {
    require(!plan.test_images.empty(), ErrorKind::PlanError, "plan has no test images");
    for (const auto& x : plan.test_images)
        require(x.width() == plan.primary.width && x.height() == plan.primary.height, ErrorKind::PlanError,
                fmt::format("test image {}x{} does not match the {}x{} stack", x.width(), x.height(),
                            plan.primary.width, plan.primary.height));
}

// Appends "#k" to repeated labels so every series stays distinct.
std::vector<std::string> unique_labels(std::vector<std::string> labels) {
    std::map<std::string, int> seen;
    for (auto& l : labels) {
        const int k = ++seen[l];
        if (k > 1) l += fmt::format("#{}", k);
    }
    return labels;
}

ExperimentPlan prepared(const ExperimentPlan& plan) {
    if (!plan.stretch_images) return plan;
    auto out = plan;
    for (auto& x : out.test_images) x = stretch_to_unit_range(x);
    return out;
}

// SSIM is left undefined (NaN) for images smaller than its window.
MetricReport score(const ImagePlane& reference, const ImagePlane& test) {
    const SsimOptions opts;
    if (reference.width() < opts.window || reference.height() < opts.window)
        return {psnr(reference, test), std::numeric_limits<double>::quiet_NaN()};
    return evaluate(reference, test);
}

// Per (method, rate): an average row and one plot point; then the fixed row order.
void finish(MetricTable& t, std::uint64_t seed) {
    if (std::any_of(t.rows.begin(), t.rows.end(), [](const MetricRow& r) { return std::isnan(r.ssim); }))
        t.notes.push_back("ssim is nan for images smaller than the ssim window");
    std::map<std::pair<std::string, double>, std::tuple<double, double, std::size_t, std::string>> acc;
    for (const auto& r : t.rows) {
        auto& [p, s, n, sum] = acc[{r.method, r.rate}];
        p += r.psnr;
        s += r.ssim;
        ++n;
        sum = r.stack_checksum;
    }
    for (const auto& [key, v] : acc) {
        const auto& [p, s, n, sum] = v;
        const double mp = p / static_cast<double>(n);
        t.rows.push_back({kAverageRow, key.first, key.second, mp, s / static_cast<double>(n), seed, sum});
        t.plot.push_back({key.second, mp, key.first});
    }
    std::stable_sort(t.rows.begin(), t.rows.end(), [](const MetricRow& a, const MetricRow& b) {
        return std::make_tuple(a.method, a.rate, a.image == kAverageRow, a.image) <
               std::make_tuple(b.method, b.rate, b.image == kAverageRow, b.image);
    });
}

struct LoadedMethod {
    MethodSpec spec;
    std::string label;
    std::optional<nn::Checkpoint> ckpt;
};

}  // namespace

MetricTable run_comparison(const ExperimentPlan& given) {
    const auto plan = prepared(given);
    require(!plan.methods.empty(), ErrorKind::PlanError, "plan has no methods");
    require(!plan.rates.empty(), ErrorKind::PlanError, "plan has no sampling rates");
    plan.primary.validate();
    check_images(plan);
    const auto names = names_for(plan);
    for (const auto& m : plan.methods)
        if (m.kind == MethodSpec::Kind::NnGaussian || m.kind == MethodSpec::Kind::NnSpeckle)
            if (!fs::is_regular_file(m.checkpoint))
                fail(ErrorKind::PlanError, "missing checkpoint " + m.checkpoint.string() + " for " + m.name());
    for (double r : plan.rates) stack_at_rate(plan.primary, r);

    MetricTable table;
    const auto primary_sum = plan.primary.checksum();
    std::vector<std::string> raw_labels;
    for (const auto& m : plan.methods) raw_labels.push_back(m.name());
    const auto labels = unique_labels(raw_labels);
    std::vector<LoadedMethod> methods;
    for (std::size_t i = 0; i < plan.methods.size(); ++i) {
        LoadedMethod lm{plan.methods[i], labels[i], std::nullopt};
        if (!lm.spec.checkpoint.empty()) {
            lm.ckpt = nn::load_checkpoint(lm.spec.checkpoint);
            const auto& meta = lm.ckpt->meta;
            if (lm.spec.kind == MethodSpec::Kind::NnSpeckle) {
                if (meta.stack_checksum != primary_sum)
                    table.notes.push_back(fmt::format("{}: checkpoint {} was trained on stack {}, plan stack is {}",
                                                      lm.label, lm.spec.checkpoint.string(), meta.stack_checksum,
                                                      primary_sum));
                if (meta.recon_mode != to_string(plan.recon_mode))
                    table.notes.push_back(fmt::format("{}: checkpoint expects {} correlation, plan uses {}", lm.label,
                                                      meta.recon_mode, to_string(plan.recon_mode)));
                for (double r : plan.rates)
                    if (std::abs(r - meta.sampling_rate) > 1e-12)
                        table.notes.push_back(fmt::format("{}: checkpoint trained at rate {} evaluated at rate {}",
                                                          lm.label, meta.sampling_rate, r));
            }
        }
        methods.push_back(std::move(lm));
    }

    for (double rate : plan.rates) {
        const auto stack = stack_at_rate(plan.primary, rate);
        for (std::size_t i = 0; i < plan.test_images.size(); ++i) {
            const auto& x = plan.test_images[i];
            const auto buckets = measure(stack, x);
            const auto y = normalize_for_display(bc_reconstruct(stack, buckets, plan.recon_mode));
            for (const auto& m : methods) {
                ImagePlane est;
                switch (m.spec.kind) {
                    case MethodSpec::Kind::Bc: est = y; break;
                    case MethodSpec::Kind::CsOmp:
                        est = normalize_for_display(omp_reconstruct(stack, buckets, plan.omp).reconstruction);
                        break;
                    case MethodSpec::Kind::NnGaussian:
                    case MethodSpec::Kind::NnSpeckle: est = nn::denoise(m.ckpt->params, y); break;
                }
                const auto rep = score(x, est);
                table.rows.push_back({names[i], m.label, rate, rep.psnr, rep.ssim, plan.seed, primary_sum});
            }
        }
    }
    finish(table, plan.seed);
    return table;
}

MismatchResult run_mismatch_experiment(const ExperimentPlan& given, const nn::NetworkParams& params, double rate) {
    const auto plan = prepared(given);
    require(plan.mismatched.has_value(), ErrorKind::PlanError, "mismatch experiment needs a second stack");
    const auto& a = plan.primary;
    const auto& b = *plan.mismatched;
    a.validate();
    b.validate();
    const auto sum_a = a.checksum();
    const auto sum_b = b.checksum();
    if (sum_a == sum_b) fail(ErrorKind::PlanError, "matched and mismatched stacks are identical (" + sum_a + ")");
    require(a.width == b.width && a.height == b.height, ErrorKind::PlanError, "stacks differ in size");
    check_images(plan);
    const auto names = names_for(plan);
    const auto sa = stack_at_rate(a, rate);
    const auto sb = stack_at_rate(b, rate);

    MismatchResult out;
    for (std::size_t i = 0; i < plan.test_images.size(); ++i) {
        const auto& x = plan.test_images[i];
        const auto ra = score(x, nn::denoise(params, speckle_observation(sa, x, plan.recon_mode)));
        const auto rb = score(x, nn::denoise(params, speckle_observation(sb, x, plan.recon_mode)));
        out.table.rows.push_back({names[i], "matched", rate, ra.psnr, ra.ssim, plan.seed, sum_a});
        out.table.rows.push_back({names[i], "mismatched", rate, rb.psnr, rb.ssim, plan.seed, sum_b});
    }
    out.mean_matched = out.table.mean_psnr("matched");
    out.mean_mismatched = out.table.mean_psnr("mismatched");
    out.table.notes.push_back(fmt::format("mean psnr gap (matched - mismatched) = {:.6f} dB", out.mean_gap()));
    finish(out.table, plan.seed);
    return out;
}

MismatchResult run_mismatch_experiment(const ExperimentPlan& plan) {
    std::vector<const MethodSpec*> nets;
    for (const auto& m : plan.methods)
        if (m.kind == MethodSpec::Kind::NnSpeckle) nets.push_back(&m);
    require(nets.size() == 1, ErrorKind::PlanError, "mismatch experiment needs exactly one nn-speckle checkpoint");
    require(plan.mismatched.has_value(), ErrorKind::PlanError, "mismatch experiment needs a second stack");
    if (plan.primary.checksum() == plan.mismatched->checksum())
        fail(ErrorKind::PlanError, "matched and mismatched stacks are identical");
    if (!fs::is_regular_file(nets[0]->checkpoint))
        fail(ErrorKind::PlanError, "missing checkpoint " + nets[0]->checkpoint.string());
    const auto ckpt = nn::load_checkpoint(nets[0]->checkpoint);
    require(ckpt.meta.sampling_rate > 0.0, ErrorKind::PlanError, "checkpoint does not record its sampling rate");
    auto out = run_mismatch_experiment(plan, ckpt.params, ckpt.meta.sampling_rate);
    if (ckpt.meta.stack_checksum != plan.primary.checksum())
        out.table.notes.push_back(fmt::format("checkpoint was trained on stack {}, primary stack is {}",
                                              ckpt.meta.stack_checksum, plan.primary.checksum()));
    return out;
}

AblationResult run_augmentation_ablation(const ExperimentPlan& given, const AblationSetup& setup) {
    const auto plan = prepared(given);
    require(!setup.training.empty(), ErrorKind::PlanError, "ablation needs a training set");
    require(!setup.settings.empty(), ErrorKind::PlanError, "ablation needs at least one setting");
    check_images(plan);
    const auto names = names_for(plan);
    const double rate = setup.training.front().sampling_rate;
    const auto stack = stack_at_rate(plan.primary, rate);
    const auto sum = plan.primary.checksum();
    std::vector<ImagePlane> inputs;
    for (const auto& x : plan.test_images) inputs.push_back(speckle_observation(stack, x, plan.recon_mode));

    auto mean_psnr = [&](const nn::NetworkParams& p) {
        double s = 0.0;
        for (std::size_t i = 0; i < inputs.size(); ++i) s += psnr(plan.test_images[i], nn::denoise(p, inputs[i]));
        return s / static_cast<double>(inputs.size());
    };

    std::vector<std::string> raw;
    for (auto s : setup.settings) raw.push_back("aug-" + to_string(s));
    const auto labels = unique_labels(raw);

    AblationResult out;
    std::vector<PlotPoint> curve;
    for (std::size_t k = 0; k < setup.settings.size(); ++k) {
        auto cfg = setup.config;
        cfg.augmentation = setup.settings[k];
        auto sink = [&](std::size_t epoch, const nn::NetworkParams& p, std::span<const double>) {
            curve.push_back({static_cast<double>(epoch), mean_psnr(p), labels[k]});
        };
        auto run = nn::train(setup.spec, setup.training, cfg, sink);
        for (std::size_t i = 0; i < plan.test_images.size(); ++i) {
            const auto rep = score(plan.test_images[i], nn::denoise(run.params, inputs[i]));
            out.table.rows.push_back({names[i], labels[k], rate, rep.psnr, rep.ssim, plan.seed, sum});
        }
        out.runs.push_back(std::move(run));
    }
    finish(out.table, plan.seed);
    // Curves over epochs replace the per-rate points when checkpoints were requested.
    if (!curve.empty()) out.table.plot = std::move(curve);
    return out;
}

std::string render_report(const MetricTable& table, ReportFormat format) {
    require(!table.rows.empty(), ErrorKind::InvalidArgument, "report table is empty");
    std::string s;
    if (format == ReportFormat::Csv) {
        s = "image,method,rate,psnr_db,ssim,seed,stack_checksum\n";
        for (const auto& r : table.rows)
            s += fmt::format("{},{},{},{:.6f},{:.6f},{},{}\n", r.image, r.method, r.rate, r.psnr, r.ssim, r.seed,
                             r.stack_checksum);
    } else {
        s = "x,y,series\n";
        for (const auto& p : table.plot) s += fmt::format("{},{:.6f},{}\n", p.x, p.y, p.series);
    }
    return s;
}

void emit_report(const MetricTable& table, ReportFormat format, const fs::path& path) {
    write_text_file(path, render_report(table, format));
}

MetricTable parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "image,method,rate,psnr_db,ssim,seed,stack_checksum")
        fail(ErrorKind::FormatError, "not a metric report (unexpected header)");
    MetricTable t;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (std::size_t comma; (comma = line.find(',', start)) != std::string::npos; start = comma + 1)
            f.push_back(line.substr(start, comma - start));
        f.push_back(line.substr(start));
        if (f.size() != 7) fail(ErrorKind::FormatError, "metric report row has " + std::to_string(f.size()) + " fields");
        try {
            t.rows.push_back({f[0], f[1], std::stod(f[2]), std::stod(f[3]), std::stod(f[4]), std::stoull(f[5]), f[6]});
        } catch (const std::logic_error&) {
            fail(ErrorKind::FormatError, "bad number in metric report row '" + line + "'");
        }
        if (f[0] == kAverageRow) t.plot.push_back({t.rows.back().rate, t.rows.back().psnr, f[1]});
    }
    return t;
}

}  // namespace gi
