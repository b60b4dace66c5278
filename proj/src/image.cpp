#include "gi/image.hpp"

#include <cmath>
#include <string>

#include "gi/error.hpp"

namespace gi {

ImagePlane::ImagePlane(std::size_t width, std::size_t height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    require(width > 0 && height > 0, ErrorKind::InvalidArgument, "image dimensions must be positive");
    require(pixels_.size() == width * height, ErrorKind::InvalidArgument,
            "pixel count " + std::to_string(pixels_.size()) + " does not match " +
                std::to_string(width) + "x" + std::to_string(height));
    for (double v : pixels_)
        require(std::isfinite(v) && v >= 0.0 && v <= 1.0, ErrorKind::InvalidArgument,
                "image values must be finite and in [0,1]");
}

ImagePlane ImagePlane::filled(std::size_t width, std::size_t height, double value) {
    return ImagePlane(width, height, std::vector<double>(width * height, value));
}

}  // namespace gi
