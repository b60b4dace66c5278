#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gi/image.hpp"
#include "gi/nn/network.hpp"
#include "gi/nn/train.hpp"
#include "gi/pairs.hpp"
#include "gi/patterns.hpp"
#include "gi/recon.hpp"

namespace gi {

struct MethodSpec {
    enum class Kind { Bc, CsOmp, NnGaussian, NnSpeckle };
    Kind kind = Kind::Bc;
    std::filesystem::path checkpoint;  // nn methods only

    std::string name() const;
    /// "bc", "cs-omp", "nn-gaussian:<checkpoint>", "nn-speckle:<checkpoint>".
    static MethodSpec parse(const std::string& text);
};

struct ExperimentPlan {
    std::vector<ImagePlane> test_images;
    std::vector<std::string> image_names;  // defaults to image-0000, ...
    PatternStack primary;
    std::optional<PatternStack> mismatched;
    std::vector<MethodSpec> methods;
    std::vector<double> rates{0.5, 1.0};
    BcMode recon_mode = BcMode::Plain;
    OmpOptions omp;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
    /// Min-max stretch each test image to [0,1] so it is a fixed point of the
    /// display normalization applied to reconstructions.
    bool stretch_images = true;
};

struct MetricRow {
    std::string image;
    std::string method;
    double rate = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
    std::uint64_t seed = 0;
    std::string stack_checksum;
};

struct PlotPoint {
    double x = 0.0;
    double y = 0.0;
    std::string series;
};

struct MetricTable {
    std::vector<MetricRow> rows;
    std::vector<PlotPoint> plot;     // x = sampling rate or epoch, y = PSNR
    std::vector<std::string> notes;  // checksum mismatches and other caveats

    /// Mean PSNR of the non-average rows with this method (and rate, when given).
    double mean_psnr(const std::string& method, std::optional<double> rate = std::nullopt) const;
};

inline constexpr const char* kAverageRow = "average";

/// Stack with round(rate * N) patterns taken from the front of the primary stack.
PatternStack stack_at_rate(const PatternStack& stack, double rate);

/// Every image x method x rate, plus one average row per method and rate.
/// Missing checkpoints raise PlanError before anything is computed.
MetricTable run_comparison(const ExperimentPlan& plan);

struct MismatchResult {
    MetricTable table;  // methods "matched" and "mismatched"
    double mean_matched = 0.0;
    double mean_mismatched = 0.0;
    double mean_gap() const { return mean_matched - mean_mismatched; }
};

/// Evaluates the plan's single nn-speckle checkpoint on observations made with
/// the primary stack and with the mismatched one, at the checkpoint's rate.
MismatchResult run_mismatch_experiment(const ExperimentPlan& plan);
MismatchResult run_mismatch_experiment(const ExperimentPlan& plan, const nn::NetworkParams& params, double rate);

struct AblationSetup {
    nn::NetworkSpec spec = nn::NetworkSpec::desk();
    nn::TrainConfig config;  // augmentation is overridden per setting
    std::vector<TrainingPair> training;
    std::vector<Augmentation> settings{Augmentation::None, Augmentation::HFlip, Augmentation::Rotation,
                                       Augmentation::HFlipRotation};
};

struct AblationResult {
    MetricTable table;  // methods "aug-<setting>"
    std::vector<nn::TrainResult> runs;
};

/// Trains one network per setting with identical seeds and evaluates each on the
/// plan's test images at the training set's rate. Plot points track held-out PSNR
/// at every checkpoint epoch.
AblationResult run_augmentation_ablation(const ExperimentPlan& plan, const AblationSetup& setup);

enum class ReportFormat { Csv, PlotData };
std::string render_report(const MetricTable& table, ReportFormat format);
/// Writes the rendered table; an empty table is an InvalidArgument, an unwritable path an IoError.
void emit_report(const MetricTable& table, ReportFormat format, const std::filesystem::path& path);
/// Parses a CSV report back into rows; plot points are rebuilt from the average rows.
MetricTable parse_report_csv(const std::string& text);

}  // namespace gi
