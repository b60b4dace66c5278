#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gi {

/// Grayscale object or recovered image: row-major, every value finite and in [0, 1].
class ImagePlane {
public:
    ImagePlane() = default;
    ImagePlane(std::size_t width, std::size_t height, std::vector<double> pixels);

    static ImagePlane filled(std::size_t width, std::size_t height, double value);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    std::size_t size() const { return pixels_.size(); }
    std::span<const double> pixels() const { return pixels_; }
    double at(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }

    bool operator==(const ImagePlane&) const = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::vector<double> pixels_;
};

}  // namespace gi
