#include "gi/nn/layers.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <cmath>

#include "gi/error.hpp"

namespace gi::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// cols is (C*k*k) x (H*W), row (c, ki, kj) holds the input shifted by (ki-pad, kj-pad).
void im2col(const double* in, std::size_t channels, std::size_t h, std::size_t w, std::size_t k, RowMat& cols) {
    const auto pad = static_cast<std::ptrdiff_t>((k - 1) / 2);
    const auto hi = static_cast<std::ptrdiff_t>(h);
    const auto wi = static_cast<std::ptrdiff_t>(w);
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < channels; ++c) {
        const double* plane = in + c * h * w;
        for (std::size_t ki = 0; ki < k; ++ki)
            for (std::size_t kj = 0; kj < k; ++kj, ++row) {
                double* dst = cols.row(row).data();
                const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(ki) - pad;
                const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(kj) - pad;
                for (std::ptrdiff_t y = 0; y < hi; ++y) {
                    const std::ptrdiff_t sy = y + oy;
                    double* d = dst + y * wi;
                    if (sy < 0 || sy >= hi) {
                        std::fill(d, d + wi, 0.0);
                        continue;
                    }
                    const double* s = plane + sy * wi;
                    for (std::ptrdiff_t x = 0; x < wi; ++x) {
                        const std::ptrdiff_t sx = x + ox;
                        d[x] = (sx >= 0 && sx < wi) ? s[sx] : 0.0;
                    }
                }
            }
    }
}

void col2im_add(const RowMat& cols, std::size_t channels, std::size_t h, std::size_t w, std::size_t k, double* out) {
    const auto pad = static_cast<std::ptrdiff_t>((k - 1) / 2);
    const auto hi = static_cast<std::ptrdiff_t>(h);
    const auto wi = static_cast<std::ptrdiff_t>(w);
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < channels; ++c) {
        double* plane = out + c * h * w;
        for (std::size_t ki = 0; ki < k; ++ki)
            for (std::size_t kj = 0; kj < k; ++kj, ++row) {
                const double* src = cols.row(row).data();
                const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(ki) - pad;
                const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(kj) - pad;
                for (std::ptrdiff_t y = 0; y < hi; ++y) {
                    const std::ptrdiff_t sy = y + oy;
                    if (sy < 0 || sy >= hi) continue;
                    double* d = plane + sy * wi;
                    const double* s = src + y * wi;
                    for (std::ptrdiff_t x = 0; x < wi; ++x) {
                        const std::ptrdiff_t sx = x + ox;
                        if (sx >= 0 && sx < wi) d[sx] += s[x];
                    }
                }
            }
    }
}

void check_input(const Tensor& input, const ConvParams& params) {
    params.validate();
    require(input.shape().c == params.in_channels, ErrorKind::InvalidArgument,
            fmt::format("conv expects {} input channels, got {}", params.in_channels, input.shape().c));
    require(input.shape().n >= 1 && input.shape().h >= 1 && input.shape().w >= 1, ErrorKind::InvalidArgument,
            "conv input must be non-empty");
}

}  // namespace

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
    require(data_.size() == shape_.size(), ErrorKind::InvalidArgument, "tensor data does not match its shape");
}

void ConvParams::validate() const {
    require(out_channels >= 1 && in_channels >= 1, ErrorKind::InvalidArgument, "conv needs at least one channel");
    require(kernel % 2 == 1, ErrorKind::InvalidArgument, "conv kernel size must be odd");
    require(weight.size() == out_channels * in_channels * kernel * kernel, ErrorKind::InvalidArgument,
            "conv weight has the wrong number of entries");
    require(bias.size() == out_channels, ErrorKind::InvalidArgument, "conv bias has the wrong number of entries");
}

// Products run on Eigen-owned (aligned) matrices only: on arbitrarily aligned
// buffers Eigen peels vector loops differently, which changes summation order.
static RowMat weight_matrix(const ConvParams& params) {
    const auto ckk = static_cast<Eigen::Index>(params.in_channels * params.kernel * params.kernel);
    return Eigen::Map<const RowMat>(params.weight.data(), static_cast<Eigen::Index>(params.out_channels), ckk);
}

Tensor conv2d(const Tensor& input, const ConvParams& params) {
    check_input(input, params);
    const auto& s = input.shape();
    const auto ckk = static_cast<Eigen::Index>(params.in_channels * params.kernel * params.kernel);
    const auto hw = static_cast<Eigen::Index>(s.plane());
    const auto out_c = static_cast<Eigen::Index>(params.out_channels);
    Tensor out({s.n, params.out_channels, s.h, s.w});
    const RowMat weight = weight_matrix(params);
    RowMat cols(ckk, hw);
    RowMat prod(out_c, hw);
    for (std::size_t i = 0; i < s.n; ++i) {
        im2col(input.sample(i), s.c, s.h, s.w, params.kernel, cols);
        prod.noalias() = weight * cols;
        double* o = out.sample(i);
        for (Eigen::Index r = 0; r < out_c; ++r) {
            const double* src = prod.row(r).data();
            const double b = params.bias[static_cast<std::size_t>(r)];
            for (Eigen::Index k = 0; k < hw; ++k) o[r * hw + k] = src[k] + b;
        }
    }
    return out;
}

Tensor conv2d_backward(const Tensor& input, const ConvParams& params, const Tensor& grad_output,
                       ConvGradients& grads) {
    check_input(input, params);
    const auto& s = input.shape();
    require(grad_output.shape() == Shape{s.n, params.out_channels, s.h, s.w}, ErrorKind::InvalidArgument,
            "conv output gradient has the wrong shape");
    require(grads.weight.size() == params.weight.size() && grads.bias.size() == params.bias.size(),
            ErrorKind::InvalidArgument, "conv gradient buffers have the wrong size");
    const auto ckk = static_cast<Eigen::Index>(params.in_channels * params.kernel * params.kernel);
    const auto hw = static_cast<Eigen::Index>(s.plane());
    const auto out_c = static_cast<Eigen::Index>(params.out_channels);
    const RowMat weight_t = weight_matrix(params).transpose();
    RowMat gw = RowMat::Zero(out_c, ckk);

    Tensor grad_input(s);
    RowMat cols(ckk, hw);
    RowMat dcols(ckk, hw);
    RowMat g(out_c, hw);
    for (std::size_t i = 0; i < s.n; ++i) {
        const double* go = grad_output.sample(i);
        std::copy(go, go + out_c * hw, g.data());
        for (Eigen::Index r = 0; r < out_c; ++r) {
            double sum = 0.0;
            for (Eigen::Index k = 0; k < hw; ++k) sum += go[r * hw + k];
            grads.bias[static_cast<std::size_t>(r)] += sum;
        }
        im2col(input.sample(i), s.c, s.h, s.w, params.kernel, cols);
        gw.noalias() += g * cols.transpose();
        dcols.noalias() = weight_t * g;
        col2im_add(dcols, s.c, s.h, s.w, params.kernel, grad_input.sample(i));
    }
    for (std::size_t k = 0; k < grads.weight.size(); ++k) grads.weight[k] += gw.data()[k];
    return grad_input;
}

Tensor relu(const Tensor& input) {
    Tensor out(input.shape());
    auto o = out.data();
    const auto x = input.data();
    for (std::size_t i = 0; i < x.size(); ++i) o[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_output) {
    require(input.shape() == grad_output.shape(), ErrorKind::InvalidArgument, "relu gradient has the wrong shape");
    Tensor out(input.shape());
    auto o = out.data();
    const auto x = input.data();
    const auto g = grad_output.data();
    for (std::size_t i = 0; i < x.size(); ++i) o[i] = x[i] > 0.0 ? g[i] : 0.0;
    return out;
}

BatchNormParams BatchNormParams::identity(std::size_t channels, double epsilon) {
    BatchNormParams p;
    p.gamma.assign(channels, 1.0);
    p.beta.assign(channels, 0.0);
    p.running_mean.assign(channels, 0.0);
    p.running_var.assign(channels, 1.0);
    p.epsilon = epsilon;
    return p;
}

Tensor batch_norm(const Tensor& input, const BatchNormParams& params, Mode mode, BatchNormCache* cache) {
    const auto& s = input.shape();
    const std::size_t channels = s.c;
    require(params.gamma.size() == channels && params.beta.size() == channels &&
                params.running_mean.size() == channels && params.running_var.size() == channels,
            ErrorKind::InvalidArgument, "batch-norm parameters do not match the channel count");
    const std::size_t count = s.n * s.plane();
    if (mode == Mode::Train)
        require(count >= 2, ErrorKind::InvalidArgument,
                "batch-norm training needs at least 2 elements per channel");

    std::vector<double> mean(channels), var(channels), inv_std(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        if (mode == Mode::Eval) {
            mean[c] = params.running_mean[c];
            var[c] = params.running_var[c];
        } else {
            double sum = 0.0;
            for (std::size_t n = 0; n < s.n; ++n) {
                const double* p = input.sample(n) + c * s.plane();
                for (std::size_t i = 0; i < s.plane(); ++i) sum += p[i];
            }
            const double mu = sum / static_cast<double>(count);
            double sq = 0.0;
            for (std::size_t n = 0; n < s.n; ++n) {
                const double* p = input.sample(n) + c * s.plane();
                for (std::size_t i = 0; i < s.plane(); ++i) sq += (p[i] - mu) * (p[i] - mu);
            }
            mean[c] = mu;
            var[c] = sq / static_cast<double>(count);
        }
        inv_std[c] = 1.0 / std::sqrt(var[c] + params.epsilon);
    }

    Tensor normalized(s);
    Tensor out(s);
    for (std::size_t n = 0; n < s.n; ++n)
        for (std::size_t c = 0; c < channels; ++c) {
            const double* p = input.sample(n) + c * s.plane();
            double* xh = normalized.sample(n) + c * s.plane();
            double* o = out.sample(n) + c * s.plane();
            for (std::size_t i = 0; i < s.plane(); ++i) {
                xh[i] = (p[i] - mean[c]) * inv_std[c];
                o[i] = params.gamma[c] * xh[i] + params.beta[c];
            }
        }
    if (cache) {
        cache->mode = mode;
        cache->mean = std::move(mean);
        cache->var = std::move(var);
        cache->inv_std = std::move(inv_std);
        cache->normalized = std::move(normalized);
        cache->count = count;
    }
    return out;
}

Tensor batch_norm_backward(const Tensor& grad_output, const BatchNormParams& params, const BatchNormCache& cache,
                           BatchNormGradients& grads) {
    const auto& s = grad_output.shape();
    require(cache.normalized.shape() == s, ErrorKind::InvalidArgument, "batch-norm gradient has the wrong shape");
    require(grads.gamma.size() == s.c && grads.beta.size() == s.c, ErrorKind::InvalidArgument,
            "batch-norm gradient buffers have the wrong size");
    Tensor grad_input(s);
    const double m = static_cast<double>(cache.count);
    for (std::size_t c = 0; c < s.c; ++c) {
        double sum_g = 0.0;
        double sum_gx = 0.0;
        for (std::size_t n = 0; n < s.n; ++n) {
            const double* g = grad_output.sample(n) + c * s.plane();
            const double* xh = cache.normalized.sample(n) + c * s.plane();
            for (std::size_t i = 0; i < s.plane(); ++i) {
                sum_g += g[i];
                sum_gx += g[i] * xh[i];
            }
        }
        grads.gamma[c] += sum_gx;
        grads.beta[c] += sum_g;
        const double scale = params.gamma[c] * cache.inv_std[c];
        for (std::size_t n = 0; n < s.n; ++n) {
            const double* g = grad_output.sample(n) + c * s.plane();
            const double* xh = cache.normalized.sample(n) + c * s.plane();
            double* d = grad_input.sample(n) + c * s.plane();
            if (cache.mode == Mode::Eval) {
                for (std::size_t i = 0; i < s.plane(); ++i) d[i] = scale * g[i];
            } else {
                for (std::size_t i = 0; i < s.plane(); ++i)
                    d[i] = scale * (g[i] - sum_g / m - xh[i] * sum_gx / m);
            }
        }
    }
    return grad_input;
}

void update_running_stats(BatchNormParams& params, const BatchNormCache& cache) {
    require(cache.mode == Mode::Train && cache.count >= 2, ErrorKind::InvalidArgument,
            "running statistics need a train-mode batch");
    const double unbias = static_cast<double>(cache.count) / static_cast<double>(cache.count - 1);
    for (std::size_t c = 0; c < params.gamma.size(); ++c) {
        params.running_mean[c] = params.momentum * params.running_mean[c] + (1.0 - params.momentum) * cache.mean[c];
        params.running_var[c] =
            params.momentum * params.running_var[c] + (1.0 - params.momentum) * cache.var[c] * unbias;
    }
}

}  // namespace gi::nn
