#pragma once

#include "gi/image.hpp"

namespace gi {

struct MetricReport {
    double psnr = 0.0;  // dB, +inf for identical images
    double ssim = 0.0;
};

/// 10 log10(peak^2 / MSE); returns +inf when MSE == 0.
double psnr(const ImagePlane& reference, const ImagePlane& test, double peak = 1.0);

struct SsimOptions {
    std::size_t window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double peak = 1.0;
};

/// Mean local SSIM over every window position that lies fully inside the image.
double ssim(const ImagePlane& reference, const ImagePlane& test, const SsimOptions& options = {});

MetricReport evaluate(const ImagePlane& reference, const ImagePlane& test);

}  // namespace gi
