#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gi/image.hpp"
#include "gi/nn/network.hpp"
#include "gi/pairs.hpp"

namespace gi::nn {

enum class Optimizer { Adam, SgdMomentum };
std::string to_string(Optimizer opt);
Optimizer optimizer_from_string(const std::string& name);

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    std::vector<std::size_t> lr_milestones;  // epochs (1-based) after which lr is multiplied by lr_decay
    double lr_decay = 0.1;
    Optimizer optimizer = Optimizer::Adam;
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    Augmentation augmentation = Augmentation::None;
    std::uint64_t init_seed = 0;
    std::uint64_t shuffle_seed = 0;
    std::uint64_t augment_seed = 0;
    std::optional<double> grad_clip;          // global L2 norm
    std::vector<std::size_t> checkpoint_epochs;

    /// lr = 0 is accepted and leaves the parameters untouched.
    void validate() const;
    double lr_at(std::size_t epoch) const;
};

/// The epoch grid {500, 1000, 1500, 2000} times scale, rounded, at least 1, without repeats.
std::vector<std::size_t> scaled_checkpoints(double scale);

struct TrainResult {
    NetworkParams params;
    std::vector<double> loss_curve;  // mean per-sample loss of each epoch
};

/// Called after every epoch listed in checkpoint_epochs.
using CheckpointSink = std::function<void(std::size_t epoch, const NetworkParams&, std::span<const double> curve)>;

/// Deterministic for fixed seeds. A non-finite loss aborts with NumericalFailure naming the epoch and step.
TrainResult train(const NetworkSpec& spec, std::span<const TrainingPair> data, const TrainConfig& config,
                  const CheckpointSink& sink = {});
TrainResult train(NetworkParams params, std::span<const TrainingPair> data, const TrainConfig& config,
                  const CheckpointSink& sink = {});

/// Pairs y = x + n with n ~ N(0, sigma^2) and one fixed noise draw per image.
std::vector<TrainingPair> gaussian_pairs(std::span<const ImagePlane> clean, double sigma, std::uint64_t seed);
TrainResult gaussian_denoiser_baseline(const NetworkSpec& spec, std::span<const ImagePlane> clean, double sigma,
                                       const TrainConfig& config, std::uint64_t noise_seed,
                                       const CheckpointSink& sink = {});

}  // namespace gi::nn
