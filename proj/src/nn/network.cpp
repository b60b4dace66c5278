#include "gi/nn/network.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "gi/error.hpp"
#include "gi/random.hpp"

namespace gi::nn {

void NetworkSpec::validate() const {
    require(depth >= 3, ErrorKind::InvalidArgument, "network depth must be at least 3");
    require(channels >= 1 && input_channels >= 1, ErrorKind::InvalidArgument, "network needs at least one channel");
    require(kernel >= 1 && kernel % 2 == 1, ErrorKind::InvalidArgument, "kernel size must be odd");
    require(bn_epsilon > 0.0 && std::isfinite(bn_epsilon), ErrorKind::InvalidArgument,
            "batch-norm epsilon must be positive");
}

void NetworkParams::validate() const {
    spec.validate();
    require(layers.size() == spec.depth, ErrorKind::InvalidArgument, "layer count does not match the spec");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        require(l.conv.in_channels == spec.in_channels(i) && l.conv.out_channels == spec.out_channels(i) &&
                    l.conv.kernel == spec.kernel,
                ErrorKind::InvalidArgument, fmt::format("layer {} shape does not match the spec", i));
        l.conv.validate();
        require(l.bn.has_value() == spec.has_bn(i), ErrorKind::InvalidArgument,
                fmt::format("layer {} batch-norm presence does not match the spec", i));
        if (l.bn) {
            const auto c = l.conv.out_channels;
            require(l.bn->gamma.size() == c && l.bn->beta.size() == c && l.bn->running_mean.size() == c &&
                        l.bn->running_var.size() == c,
                    ErrorKind::InvalidArgument, fmt::format("layer {} batch-norm size mismatch", i));
            for (double v : l.bn->running_var)
                require(v >= 0.0, ErrorKind::InvalidArgument, "running variance must be non-negative");
        }
    }
}

namespace {

NetworkParams allocate(const NetworkSpec& spec) {
    spec.validate();
    NetworkParams p;
    p.spec = spec;
    for (std::size_t i = 0; i < spec.depth; ++i) {
        LayerParams l;
        l.conv.in_channels = spec.in_channels(i);
        l.conv.out_channels = spec.out_channels(i);
        l.conv.kernel = spec.kernel;
        l.conv.weight.assign(l.conv.out_channels * l.conv.in_channels * spec.kernel * spec.kernel, 0.0);
        l.conv.bias.assign(l.conv.out_channels, 0.0);
        if (spec.has_bn(i)) l.bn = BatchNormParams::identity(l.conv.out_channels, spec.bn_epsilon);
        p.layers.push_back(std::move(l));
    }
    return p;
}

}  // namespace

NetworkParams init_network(const NetworkSpec& spec, std::uint64_t seed) {
    NetworkParams p = allocate(spec);
    p.init_seed = seed;
    for (std::size_t i = 0; i < p.layers.size(); ++i) {
        auto& conv = p.layers[i].conv;
        const double fan_in = static_cast<double>(conv.in_channels * conv.kernel * conv.kernel);
        std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
        auto rng = derived_rng(seed, kStreamInit, i);
        for (double& w : conv.weight) w = normal(rng);
    }
    return p;
}

NetworkParams zero_network(const NetworkSpec& spec) {
    NetworkParams p = allocate(spec);
    for (auto& l : p.layers)
        if (l.bn) std::fill(l.bn->gamma.begin(), l.bn->gamma.end(), 0.0);
    return p;
}

Tensor forward_residual(const NetworkParams& params, const Tensor& input, Mode mode, ForwardCache* cache) {
    const auto& spec = params.spec;
    const auto& s = input.shape();
    require(s.c == spec.input_channels, ErrorKind::InvalidArgument, "input channel count does not match the network");
    require(s.n >= 1 && s.h >= spec.kernel && s.w >= spec.kernel, ErrorKind::InvalidArgument,
            fmt::format("input {}x{} is smaller than the {}x{} kernel", s.w, s.h, spec.kernel, spec.kernel));
    require(params.layers.size() == spec.depth, ErrorKind::InvalidArgument, "layer count does not match the spec");
    if (cache) {
        cache->inputs.assign(spec.depth, {});
        cache->pre_relu.assign(spec.depth, {});
        cache->bn.assign(spec.depth, {});
    }
    Tensor x = input;
    for (std::size_t i = 0; i < spec.depth; ++i) {
        const auto& layer = params.layers[i];
        Tensor z = conv2d(x, layer.conv);
        if (layer.bn) z = batch_norm(z, *layer.bn, mode, cache ? &cache->bn[i] : nullptr);
        if (cache) cache->inputs[i] = std::move(x);
        if (i + 1 == spec.depth) return z;
        x = relu(z);
        if (cache) cache->pre_relu[i] = std::move(z);
    }
    return x;
}

std::vector<double> forward_residual(const NetworkParams& params, std::size_t width, std::size_t height,
                                     std::span<const double> field) {
    require(field.size() == width * height, ErrorKind::InvalidArgument, "field size does not match its dimensions");
    Tensor in({1, 1, height, width}, std::vector<double>(field.begin(), field.end()));
    Tensor out = forward_residual(params, in, Mode::Eval);
    return {out.data().begin(), out.data().end()};
}

NetworkGradients::NetworkGradients(const NetworkParams& params) {
    for (const auto& l : params.layers) {
        conv.emplace_back(l.conv);
        bn.emplace_back(l.bn ? l.bn->gamma.size() : 0);
    }
}

std::vector<std::span<double>> parameter_views(NetworkParams& params) {
    std::vector<std::span<double>> v;
    for (auto& l : params.layers) {
        v.emplace_back(l.conv.weight);
        v.emplace_back(l.conv.bias);
        if (l.bn) {
            v.emplace_back(l.bn->gamma);
            v.emplace_back(l.bn->beta);
        }
    }
    return v;
}

std::vector<std::span<double>> gradient_views(NetworkGradients& grads) {
    std::vector<std::span<double>> v;
    for (std::size_t i = 0; i < grads.conv.size(); ++i) {
        v.emplace_back(grads.conv[i].weight);
        v.emplace_back(grads.conv[i].bias);
        if (!grads.bn[i].gamma.empty()) {
            v.emplace_back(grads.bn[i].gamma);
            v.emplace_back(grads.bn[i].beta);
        }
    }
    return v;
}

Tensor stack_noisy(std::span<const TrainingPair> batch) {
    require(!batch.empty(), ErrorKind::InvalidArgument, "batch is empty");
    const auto w = batch[0].width, h = batch[0].height;
    Tensor t({batch.size(), 1, h, w});
    for (std::size_t i = 0; i < batch.size(); ++i) {
        batch[i].validate();
        require(batch[i].width == w && batch[i].height == h, ErrorKind::InvalidArgument,
                "batch members must share dimensions");
        std::copy(batch[i].noisy.begin(), batch[i].noisy.end(), t.sample(i));
    }
    return t;
}

LossResult loss_gi(const NetworkParams& params, std::span<const TrainingPair> batch) {
    Tensor y = stack_noisy(batch);
    ForwardCache cache;
    Tensor r = forward_residual(params, y, Mode::Train, &cache);

    const double count = static_cast<double>(batch.size());
    Tensor grad(r.shape());
    double sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double* ri = r.sample(i);
        double* gi = grad.sample(i);
        const auto& p = batch[i];
        for (std::size_t k = 0; k < p.noisy.size(); ++k) {
            const double target = static_cast<double>(p.noisy[k]) - static_cast<double>(p.clean[k]);
            const double d = ri[k] - target;
            sum += d * d;
            gi[k] = d / count;
        }
    }

    LossResult out{sum / (2.0 * count), NetworkGradients(params), {}};
    const auto depth = params.spec.depth;
    for (std::size_t i = depth; i-- > 0;) {
        const auto& layer = params.layers[i];
        if (i + 1 < depth) grad = relu_backward(cache.pre_relu[i], grad);
        if (layer.bn) grad = batch_norm_backward(grad, *layer.bn, cache.bn[i], out.grads.bn[i]);
        grad = conv2d_backward(cache.inputs[i], layer.conv, grad, out.grads.conv[i]);
    }
    out.bn = std::move(cache.bn);
    return out;
}

ImagePlane denoise(const NetworkParams& params, const Reconstruction& noisy) {
    require(noisy.field.size() == noisy.width * noisy.height, ErrorKind::InvalidArgument,
            "reconstruction size does not match its dimensions");
    const auto r = forward_residual(params, noisy.width, noisy.height, noisy.field);
    std::vector<double> x(r.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double v = noisy.field[k] - r[k];
        require(std::isfinite(v), ErrorKind::NumericalFailure, "denoiser produced a non-finite value");
        x[k] = std::clamp(v, 0.0, 1.0);
    }
    return ImagePlane(noisy.width, noisy.height, std::move(x));
}

ImagePlane denoise(const NetworkParams& params, const ImagePlane& noisy) {
    Reconstruction r{noisy.width(), noisy.height(), {noisy.pixels().begin(), noisy.pixels().end()},
                     ReconMethod::NnDenoised};
    return denoise(params, r);
}

}  // namespace gi::nn
