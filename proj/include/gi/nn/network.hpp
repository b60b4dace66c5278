#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gi/image.hpp"
#include "gi/nn/layers.hpp"
#include "gi/pairs.hpp"
#include "gi/recon.hpp"

namespace gi::nn {

/// conv+relu, then (conv+bn+relu) x (depth-2), then a final conv back to one channel.
struct NetworkSpec {
    std::size_t depth = 17;
    std::size_t channels = 64;
    std::size_t kernel = 3;
    std::size_t input_channels = 1;
    double bn_epsilon = 1e-5;

    static NetworkSpec full() { return {}; }
    static NetworkSpec desk() { return {7, 32, 3, 1, 1e-5}; }

    bool has_bn(std::size_t layer) const { return layer > 0 && layer + 1 < depth; }
    std::size_t in_channels(std::size_t layer) const { return layer == 0 ? input_channels : channels; }
    std::size_t out_channels(std::size_t layer) const { return layer + 1 == depth ? input_channels : channels; }
    void validate() const;
    bool operator==(const NetworkSpec&) const = default;
};

struct LayerParams {
    ConvParams conv;
    std::optional<BatchNormParams> bn;
};

struct NetworkParams {
    NetworkSpec spec;
    std::uint64_t init_seed = 0;
    std::vector<LayerParams> layers;

    void validate() const;
};

/// He-normal kernels (std sqrt(2 / fan_in)), zero biases, gamma 1, beta 0.
NetworkParams init_network(const NetworkSpec& spec, std::uint64_t seed);
/// Every weight, bias, gamma and beta zero; the residual is identically zero.
NetworkParams zero_network(const NetworkSpec& spec);

/// Per-layer activations kept for backpropagation.
struct ForwardCache {
    std::vector<Tensor> inputs;     // input of each conv
    std::vector<Tensor> pre_relu;   // conv (+bn) output of each hidden layer
    std::vector<BatchNormCache> bn;  // indexed by layer; unused entries are empty
};

Tensor forward_residual(const NetworkParams& params, const Tensor& input, Mode mode = Mode::Eval,
                        ForwardCache* cache = nullptr);
/// Single-image convenience: row-major field of width x height.
std::vector<double> forward_residual(const NetworkParams& params, std::size_t width, std::size_t height,
                                     std::span<const double> field);

struct NetworkGradients {
    std::vector<ConvGradients> conv;
    std::vector<BatchNormGradients> bn;

    explicit NetworkGradients(const NetworkParams& params);
};

/// Trainable tensors in a fixed order: per layer weight, bias, then gamma, beta.
std::vector<std::span<double>> parameter_views(NetworkParams& params);
std::vector<std::span<double>> gradient_views(NetworkGradients& grads);

struct LossResult {
    double loss = 0.0;
    NetworkGradients grads;
    std::vector<BatchNormCache> bn;  // batch statistics, for the running-stat update
};

/// l = sum_s ||R(y_s) - (y_s - x_s)||^2 / (2 B), with batch-norm in train mode.
LossResult loss_gi(const NetworkParams& params, std::span<const TrainingPair> batch);
Tensor stack_noisy(std::span<const TrainingPair> batch);

/// x = clamp(y - R(y), 0, 1) using running batch-norm statistics.
ImagePlane denoise(const NetworkParams& params, const Reconstruction& noisy);
ImagePlane denoise(const NetworkParams& params, const ImagePlane& noisy);

}  // namespace gi::nn
