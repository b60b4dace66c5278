#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gi/metrics.hpp"
#include "test_util.hpp"

using namespace gi;
using gi_test::kind_of;
using gi_test::random_image;

namespace {

ImagePlane shifted(const ImagePlane& img, double delta) {
    std::vector<double> px(img.pixels().begin(), img.pixels().end());
    for (auto& v : px) v += delta;
    return ImagePlane(img.width(), img.height(), px);
}

}  // namespace

TEST_CASE("psnr reference values") {
    const auto a = ImagePlane::filled(8, 8, 0.25);
    CHECK(std::isinf(psnr(a, a)));
    CHECK(psnr(a, a) > 0);
    CHECK(std::abs(psnr(a, shifted(a, 0.1)) - 20.0) <= 1e-12);

    // One grey level of error on an 8-bit scale.
    const auto x = ImagePlane::filled(4, 4, 100.0 / 255.0), y = ImagePlane::filled(4, 4, 101.0 / 255.0);
    CHECK(std::abs(psnr(x, y) - 20.0 * std::log10(255.0)) <= 1e-3);
    CHECK(std::abs(20.0 * std::log10(255.0) - 48.1308) <= 1e-3);

    CHECK(kind_of([&] { psnr(a, ImagePlane::filled(8, 7, 0.25)); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("psnr with peak 255") {
    // Any image pair with MSE = 1 in the units of the peak.
    const auto x = ImagePlane::filled(3, 3, 0.0), y = ImagePlane::filled(3, 3, 1.0);
    CHECK(psnr(x, y, 255.0) == doctest::Approx(48.1308).epsilon(1e-3 / 48.1308));
    CHECK(std::abs(psnr(x, y, 255.0) - 48.1308) <= 1e-3);
}

TEST_CASE("psnr decreases as noise grows") {
    const auto ref = ImagePlane::filled(16, 16, 0.5);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> noise(256);
    for (auto& v : noise) v = g(rng);
    double last = INFINITY;
    for (double amp : {0.001, 0.01, 0.05, 0.1, 0.15}) {
        std::vector<double> px(256);
        for (std::size_t i = 0; i < 256; ++i) px[i] = std::clamp(0.5 + amp * noise[i], 0.0, 1.0);
        const double p = psnr(ref, ImagePlane(16, 16, px));
        CHECK(p < last);
        last = p;
    }
}

TEST_CASE("psnr is invariant to a shared pixel permutation") {
    const auto a = random_image(8, 8, 1), b = random_image(8, 8, 2);
    std::vector<double> pa(a.pixels().rbegin(), a.pixels().rend()), pb(b.pixels().rbegin(), b.pixels().rend());
    CHECK(psnr(a, b) == doctest::Approx(psnr(ImagePlane(8, 8, pa), ImagePlane(8, 8, pb))).epsilon(1e-14));
}

TEST_CASE("ssim identities") {
    const auto a = random_image(24, 20, 5), b = random_image(24, 20, 6);
    CHECK(ssim(a, a) == 1.0);
    CHECK(std::abs(ssim(a, b) - ssim(b, a)) <= 1e-12);
    CHECK(ssim(a, b) < 0.2);
    CHECK(kind_of([&] { ssim(ImagePlane::filled(10, 12, 0.0), ImagePlane::filled(10, 12, 0.0)); }) ==
          ErrorKind::InvalidArgument);

    // Inverted contrast anticorrelates every window.
    std::vector<double> inv(a.pixels().begin(), a.pixels().end());
    for (auto& v : inv) v = 1.0 - v;
    CHECK(ssim(a, ImagePlane(24, 20, inv)) < 0.0);

    const auto r = evaluate(a, b);
    CHECK(r.psnr == psnr(a, b));
    CHECK(r.ssim == ssim(a, b));
}

TEST_CASE("ssim of constant images reduces to the luminance term") {
    for (auto [u, v] : {std::pair{0.2, 0.7}, std::pair{0.5, 0.5}, std::pair{0.0, 1.0}, std::pair{0.9, 0.85}}) {
        const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
        const double expect = (2 * u * v + c1) * c2 / ((u * u + v * v + c1) * c2);
        const double got = ssim(ImagePlane::filled(16, 13, u), ImagePlane::filled(16, 13, v));
        CHECK(got == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("ssim matches a direct window evaluation") {
    const auto a = random_image(13, 12, 7), b = random_image(13, 12, 8);
    // Separable gaussian weights, normalised to sum one.
    double wts[11], sum = 0.0;
    for (int i = 0; i < 11; ++i) sum += wts[i] = std::exp(-(i - 5) * (i - 5) / (2 * 1.5 * 1.5));
    double total = 0.0;
    int count = 0;
    for (std::size_t r0 = 0; r0 + 11 <= 12; ++r0)
        for (std::size_t c0 = 0; c0 + 11 <= 13; ++c0) {
            double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
            for (int i = 0; i < 11; ++i)
                for (int j = 0; j < 11; ++j) {
                    const double w = wts[i] * wts[j] / (sum * sum);
                    const double x = a.at(r0 + i, c0 + j), y = b.at(r0 + i, c0 + j);
                    mx += w * x;
                    my += w * y;
                    xx += w * x * x;
                    yy += w * y * y;
                    xy += w * x * y;
                }
            const double sx = xx - mx * mx, sy = yy - my * my, sxy = xy - mx * my;
            const double c1 = 1e-4, c2 = 9e-4;
            total += (2 * mx * my + c1) * (2 * sxy + c2) / ((mx * mx + my * my + c1) * (sx + sy + c2));
            ++count;
        }
    CHECK(ssim(a, b) == doctest::Approx(total / count).epsilon(1e-10));
}
