#pragma once

#include <vector>

#include "gi/nn/tensor.hpp"

namespace gi::nn {

enum class Mode { Train, Eval };

/// Stride-1 cross-correlation with zero padding (k-1)/2, so H and W are preserved.
struct ConvParams {
    std::size_t out_channels = 0;
    std::size_t in_channels = 0;
    std::size_t kernel = 3;
    std::vector<double> weight;  // out x in x k x k
    std::vector<double> bias;    // out

    void validate() const;
};

struct ConvGradients {
    std::vector<double> weight;
    std::vector<double> bias;

    explicit ConvGradients(const ConvParams& p = {}) : weight(p.weight.size(), 0.0), bias(p.bias.size(), 0.0) {}
};

Tensor conv2d(const Tensor& input, const ConvParams& params);
/// Accumulates parameter gradients into grads and returns dL/dinput.
Tensor conv2d_backward(const Tensor& input, const ConvParams& params, const Tensor& grad_output, ConvGradients& grads);

Tensor relu(const Tensor& input);
/// Subgradient at 0 is 0.
Tensor relu_backward(const Tensor& input, const Tensor& grad_output);

struct BatchNormParams {
    std::vector<double> gamma;
    std::vector<double> beta;
    std::vector<double> running_mean;
    std::vector<double> running_var;
    double epsilon = 1e-5;
    double momentum = 0.9;  // weight kept by the running statistics

    static BatchNormParams identity(std::size_t channels, double epsilon);
};

/// Per-channel batch statistics kept for the backward pass and the running-stat update.
struct BatchNormCache {
    Mode mode = Mode::Train;
    std::vector<double> mean;
    std::vector<double> var;  // biased (divide by count)
    std::vector<double> inv_std;
    Tensor normalized;
    std::size_t count = 0;  // elements per channel
};

struct BatchNormGradients {
    std::vector<double> gamma;
    std::vector<double> beta;

    explicit BatchNormGradients(std::size_t channels = 0) : gamma(channels, 0.0), beta(channels, 0.0) {}
};

/// Train mode normalises with the batch mean and biased variance over (N, H, W);
/// eval mode uses the running statistics. Does not touch the running statistics.
Tensor batch_norm(const Tensor& input, const BatchNormParams& params, Mode mode, BatchNormCache* cache = nullptr);
Tensor batch_norm_backward(const Tensor& grad_output, const BatchNormParams& params, const BatchNormCache& cache,
                           BatchNormGradients& grads);
/// running = momentum * running + (1 - momentum) * batch, with the unbiased variance.
void update_running_stats(BatchNormParams& params, const BatchNormCache& cache);

}  // namespace gi::nn
