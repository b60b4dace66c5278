#include "gi/nn/train.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "gi/error.hpp"
#include "gi/random.hpp"

namespace gi::nn {

std::string to_string(Optimizer opt) { return opt == Optimizer::Adam ? "adam" : "sgd-momentum"; }

Optimizer optimizer_from_string(const std::string& name) {
    if (name == "adam") return Optimizer::Adam;
    if (name == "sgd-momentum" || name == "sgd") return Optimizer::SgdMomentum;
    fail(ErrorKind::InvalidArgument, "unknown optimizer '" + name + "'");
}

void TrainConfig::validate() const {
    require(epochs >= 1, ErrorKind::InvalidArgument, "epochs must be at least 1");
    require(batch_size >= 1, ErrorKind::InvalidArgument, "batch size must be at least 1");
    require(learning_rate >= 0.0 && std::isfinite(learning_rate), ErrorKind::InvalidArgument,
            "learning rate must be finite and non-negative");
    require(lr_decay > 0.0 && momentum >= 0.0 && momentum < 1.0 && beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 &&
                beta2 < 1.0 && adam_epsilon > 0.0,
            ErrorKind::InvalidArgument, "optimizer hyper-parameters out of range");
    if (grad_clip) require(*grad_clip > 0.0, ErrorKind::InvalidArgument, "gradient clip must be positive");
}

double TrainConfig::lr_at(std::size_t epoch) const {
    double lr = learning_rate;
    for (auto m : lr_milestones)
        if (epoch > m) lr *= lr_decay;
    return lr;
}

std::vector<std::size_t> scaled_checkpoints(double scale) {
    require(scale > 0.0 && std::isfinite(scale), ErrorKind::InvalidArgument, "desk scale must be positive");
    std::set<std::size_t> marks;
    for (double e : {500.0, 1000.0, 1500.0, 2000.0})
        marks.insert(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(e * scale))));
    return {marks.begin(), marks.end()};
}

namespace {

class OptimizerState {
public:
    OptimizerState(const TrainConfig& config, std::vector<std::span<double>> params) : config_(config) {
        for (auto p : params) {
            first_.emplace_back(p.size(), 0.0);
            if (config.optimizer == Optimizer::Adam) second_.emplace_back(p.size(), 0.0);
        }
    }

    void step(std::vector<std::span<double>>& params, const std::vector<std::span<double>>& grads, double lr) {
        ++t_;
        if (config_.optimizer == Optimizer::SgdMomentum) {
            for (std::size_t i = 0; i < params.size(); ++i)
                for (std::size_t k = 0; k < params[i].size(); ++k) {
                    first_[i][k] = config_.momentum * first_[i][k] + grads[i][k];
                    params[i][k] -= lr * first_[i][k];
                }
            return;
        }
        const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.size(); ++i)
            for (std::size_t k = 0; k < params[i].size(); ++k) {
                const double g = grads[i][k];
                first_[i][k] = config_.beta1 * first_[i][k] + (1.0 - config_.beta1) * g;
                second_[i][k] = config_.beta2 * second_[i][k] + (1.0 - config_.beta2) * g * g;
                const double mhat = first_[i][k] / c1;
                const double vhat = second_[i][k] / c2;
                params[i][k] -= lr * mhat / (std::sqrt(vhat) + config_.adam_epsilon);
            }
    }

private:
    const TrainConfig& config_;
    std::vector<std::vector<double>> first_;
    std::vector<std::vector<double>> second_;
    std::uint64_t t_ = 0;
};

// Fisher-Yates with an explicit bounded draw so the order does not depend on the standard library.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    auto rng = derived_rng(seed, kStreamShuffle, epoch);
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
        std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    return order;
}

void clip(std::vector<std::span<double>>& grads, double threshold) {
    double sq = 0.0;
    for (auto g : grads)
        for (double v : g) sq += v * v;
    const double norm = std::sqrt(sq);
    if (norm <= threshold) return;
    const double s = threshold / norm;
    for (auto g : grads)
        for (double& v : g) v *= s;
}

}  // namespace

TrainResult train(const NetworkSpec& spec, std::span<const TrainingPair> data, const TrainConfig& config,
                  const CheckpointSink& sink) {
    return train(init_network(spec, config.init_seed), data, config, sink);
}

TrainResult train(NetworkParams params, std::span<const TrainingPair> data, const TrainConfig& config,
                  const CheckpointSink& sink) {
    config.validate();
    params.validate();
    require(!data.empty(), ErrorKind::InvalidArgument, "training set is empty");
    for (const auto& p : data) p.validate();

    TrainResult result;
    auto views = parameter_views(params);
    OptimizerState opt(config, views);
    const std::set<std::size_t> marks(config.checkpoint_epochs.begin(), config.checkpoint_epochs.end());
    const std::size_t n = data.size();
    std::size_t step = 0;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto order = epoch_order(n, config.shuffle_seed, epoch);
        const double lr = config.lr_at(epoch);
        double epoch_sum = 0.0;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            ++step;
            const std::size_t stop = std::min(n, start + config.batch_size);
            // Members are taken in dataset order so a batch's arithmetic depends only on its contents.
            std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(start),
                                             order.begin() + static_cast<std::ptrdiff_t>(stop));
            std::sort(members.begin(), members.end());
            std::vector<TrainingPair> batch;
            batch.reserve(members.size());
            for (const auto idx : members) {
                batch.push_back(
                    augment(data[idx], config.augmentation, config.augment_seed, (epoch - 1) * n + idx));
            }
            auto lr_result = loss_gi(params, batch);
            if (!std::isfinite(lr_result.loss))
                fail(ErrorKind::NumericalFailure,
                     fmt::format("training diverged: non-finite loss at epoch {} step {}", epoch, step));
            epoch_sum += lr_result.loss * static_cast<double>(batch.size());
            auto grads = gradient_views(lr_result.grads);
            if (config.grad_clip) clip(grads, *config.grad_clip);
            if (lr > 0.0) opt.step(views, grads, lr);
            for (std::size_t i = 0; i < params.layers.size(); ++i)
                if (params.layers[i].bn && lr_result.bn[i].count >= 2)
                    update_running_stats(*params.layers[i].bn, lr_result.bn[i]);
        }
        result.loss_curve.push_back(epoch_sum / static_cast<double>(n));
        if (sink && marks.contains(epoch)) sink(epoch, params, result.loss_curve);
    }
    result.params = std::move(params);
    return result;
}

std::vector<TrainingPair> gaussian_pairs(std::span<const ImagePlane> clean, double sigma, std::uint64_t seed) {
    require(sigma > 0.0 && std::isfinite(sigma), ErrorKind::InvalidArgument, "gaussian sigma must be positive");
    std::vector<TrainingPair> pairs;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const auto& x = clean[i];
        auto rng = derived_rng(seed, kStreamNoise, i);
        std::normal_distribution<double> normal(0.0, sigma);
        TrainingPair p{x.width(), x.height(), {}, {}, 0.0};
        for (double v : x.pixels()) {
            p.clean.push_back(static_cast<float>(v));
            p.noisy.push_back(static_cast<float>(v + normal(rng)));
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

TrainResult gaussian_denoiser_baseline(const NetworkSpec& spec, std::span<const ImagePlane> clean, double sigma,
                                       const TrainConfig& config, std::uint64_t noise_seed,
                                       const CheckpointSink& sink) {
    const auto pairs = gaussian_pairs(clean, sigma, noise_seed);
    return train(spec, pairs, config, sink);
}

}  // namespace gi::nn
