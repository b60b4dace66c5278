#include "gi/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "gi/error.hpp"

namespace gi {

namespace {

void check_same_shape(const ImagePlane& a, const ImagePlane& b) {
    require(a.width() == b.width() && a.height() == b.height(), ErrorKind::InvalidArgument,
            "metric inputs must have identical dimensions");
}

std::vector<double> gaussian_window(std::size_t size, double sigma) {
    std::vector<double> w(size * size);
    const double c = (static_cast<double>(size) - 1.0) / 2.0;
    double sum = 0.0;
    for (std::size_t y = 0; y < size; ++y)
        for (std::size_t x = 0; x < size; ++x) {
            const double dx = static_cast<double>(x) - c;
            const double dy = static_cast<double>(y) - c;
            sum += w[y * size + x] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        }
    for (auto& v : w) v /= sum;
    return w;
}

}  // namespace

double psnr(const ImagePlane& reference, const ImagePlane& test, double peak) {
    check_same_shape(reference, test);
    require(peak > 0.0, ErrorKind::InvalidArgument, "psnr peak must be positive");
    const auto a = reference.pixels();
    const auto b = test.pixels();
    double sse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sse += d * d;
    }
    const double mse = sse / static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const ImagePlane& reference, const ImagePlane& test, const SsimOptions& options) {
    check_same_shape(reference, test);
    const std::size_t win = options.window;
    require(win >= 1 && options.sigma > 0.0, ErrorKind::InvalidArgument, "invalid SSIM window");
    require(reference.width() >= win && reference.height() >= win, ErrorKind::InvalidArgument,
            "image is smaller than the SSIM window");
    const auto weights = gaussian_window(win, options.sigma);
    const double c1 = (options.k1 * options.peak) * (options.k1 * options.peak);
    const double c2 = (options.k2 * options.peak) * (options.k2 * options.peak);
    const std::size_t w = reference.width();
    const auto x = reference.pixels();
    const auto y = test.pixels();

    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t top = 0; top + win <= reference.height(); ++top)
        for (std::size_t left = 0; left + win <= w; ++left) {
            double mx = 0, my = 0, exx = 0, eyy = 0, exy = 0;
            for (std::size_t dy = 0; dy < win; ++dy)
                for (std::size_t dx = 0; dx < win; ++dx) {
                    const double wt = weights[dy * win + dx];
                    const std::size_t i = (top + dy) * w + left + dx;
                    mx += wt * x[i];
                    my += wt * y[i];
                    exx += wt * (x[i] * x[i]);
                    eyy += wt * (y[i] * y[i]);
                    exy += wt * (x[i] * y[i]);
                }
            const double vx = exx - mx * mx;
            const double vy = eyy - my * my;
            const double cov = exy - mx * my;
            const double num = (2.0 * (mx * my) + c1) * (2.0 * cov + c2);
            const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
            total += num / den;
            ++count;
        }
    return total / static_cast<double>(count);
}

MetricReport evaluate(const ImagePlane& reference, const ImagePlane& test) {
    return {psnr(reference, test), ssim(reference, test)};
}

}  // namespace gi
