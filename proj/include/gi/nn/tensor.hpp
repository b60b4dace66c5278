#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gi::nn {

struct Shape {
    std::size_t n = 0, c = 0, h = 0, w = 0;

    std::size_t size() const { return n * c * h * w; }
    std::size_t plane() const { return h * w; }
    bool operator==(const Shape&) const = default;
};

/// Dense NCHW tensor of doubles.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0) : shape_(shape), data_(shape.size(), fill) {}
    Tensor(Shape shape, std::vector<double> data);

    const Shape& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    double* sample(std::size_t i) { return data_.data() + i * shape_.c * shape_.plane(); }
    const double* sample(std::size_t i) const { return data_.data() + i * shape_.c * shape_.plane(); }

    double& operator()(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
        return data_[((n * shape_.c + c) * shape_.h + y) * shape_.w + x];
    }
    double operator()(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
        return data_[((n * shape_.c + c) * shape_.h + y) * shape_.w + x];
    }

private:
    Shape shape_;
    std::vector<double> data_;
};

}  // namespace gi::nn
