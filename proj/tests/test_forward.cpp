#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "gi/forward.hpp"
#include "gi/patterns.hpp"
#include "test_util.hpp"

using namespace gi;
using gi_test::kind_of;
using gi_test::random_image;

namespace {

PatternStack stack_from_rows(std::size_t w, std::size_t h, std::vector<std::vector<float>> rows) {
    PatternStack s;
    s.width = w;
    s.height = h;
    s.m_patterns = rows.size();
    for (const auto& r : rows) s.data.insert(s.data.end(), r.begin(), r.end());
    return s;
}

}  // namespace

TEST_CASE("hand-computed buckets") {
    const ImagePlane o(2, 2, {1.0, 0.5, 0.25, 0.25});
    CHECK(measure(stack_from_rows(2, 2, {{1, 1, 1, 1}}), o).values == std::vector<double>{2.0});
    CHECK(measure(stack_from_rows(2, 2, {{1, 0, 1, 0}}), o).values == std::vector<double>{1.25});

    const auto s = gen_random_patterns(3, 10, 4, 4, RandomDistribution::Uniform);
    const auto zero = measure(s, ImagePlane::filled(4, 4, 0.0));
    CHECK(zero.size() == 10);
    for (double v : zero.values) CHECK(v == 0.0);
    for (double v : measure(s, random_image(4, 4, 1)).values) CHECK(v >= 0.0);

    CHECK(kind_of([&] { measure(s, ImagePlane::filled(4, 3, 0.0)); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("measure matches a brute-force loop bit for bit") {
    for (std::size_t n : {1u, 3u, 8u, 16u}) {
        const auto s = gen_random_patterns(n, 2 * n * n, n, n, RandomDistribution::Uniform);
        const auto o = random_image(n, n, 100 + n);
        const auto b = measure(s, o);
        REQUIRE(b.size() == s.m_patterns);
        for (std::size_t j = 0; j < s.m_patterns; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t c = 0; c < n; ++c)
                    acc += static_cast<double>(s.data[j * n * n + r * n + c]) * o.at(r, c);
            CHECK(b.values[j] == acc);
        }
    }
}

TEST_CASE("linearity and permutation equivariance") {
    const auto s = gen_random_patterns(5, 64, 8, 8, RandomDistribution::Uniform);
    const auto o1 = random_image(8, 8, 1), o2 = random_image(8, 8, 2);
    const double alpha = 0.3, beta = 0.6;
    std::vector<double> mix(64);
    for (std::size_t i = 0; i < 64; ++i) mix[i] = alpha * o1.pixels()[i] + beta * o2.pixels()[i];
    const auto b = measure(s, ImagePlane(8, 8, mix));
    const auto b1 = measure(s, o1), b2 = measure(s, o2);
    for (std::size_t j = 0; j < 64; ++j) {
        const double expect = alpha * b1.values[j] + beta * b2.values[j];
        CHECK(std::abs(b.values[j] - expect) <= 1e-12 * std::abs(expect));
    }

    auto perm = s;
    const std::vector<std::size_t> order{5, 0, 63, 7, 2};
    perm.m_patterns = order.size();
    perm.data.clear();
    for (auto j : order) perm.data.insert(perm.data.end(), s.pattern(j).begin(), s.pattern(j).end());
    const auto bp = measure(perm, o1);
    for (std::size_t i = 0; i < order.size(); ++i) CHECK(bp.values[i] == b1.values[order[i]]);
}

TEST_CASE("noisy measurement") {
    const auto s = gen_random_patterns(5, 16, 4, 4, RandomDistribution::Uniform);
    const auto o = random_image(4, 4, 9);
    const auto clean = measure(s, o);
    CHECK(measure_noisy(s, o, DetectorNoise::none(), 1) == clean);
    CHECK(measure_noisy(s, o, DetectorNoise::gaussian(0.0), 1) == clean);
    CHECK(measure_noisy(s, o, DetectorNoise::gaussian(0.5), 4) == measure_noisy(s, o, DetectorNoise::gaussian(0.5), 4));
    CHECK(measure_noisy(s, o, DetectorNoise::gaussian(0.5), 4) != measure_noisy(s, o, DetectorNoise::gaussian(0.5), 5));
    CHECK(kind_of([&] { measure_noisy(s, o, DetectorNoise::gaussian(-1.0), 1); }) == ErrorKind::InvalidArgument);
    CHECK(kind_of([&] { measure_noisy(s, o, DetectorNoise::poisson(0.0), 1); }) == ErrorKind::InvalidArgument);

    const auto one = gen_random_patterns(5, 1, 4, 4, RandomDistribution::Uniform);
    const double b0 = measure(one, o).values[0];
    constexpr int kDraws = 10000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < kDraws; ++i) {
        const double d = measure_noisy(one, o, DetectorNoise::gaussian(1.0), static_cast<std::uint64_t>(i)).values[0] - b0;
        sum += d;
        sq += d * d;
    }
    const double mean = sum / kDraws;
    const double sd = std::sqrt((sq - kDraws * mean * mean) / (kDraws - 1));
    CHECK(std::abs(sd - 1.0) < 0.05);

    // Poisson counts divided by the scale: mean b, variance b / scale.
    const double scale = 50.0;
    sum = sq = 0.0;
    for (int i = 0; i < kDraws; ++i) {
        const double v = measure_noisy(one, o, DetectorNoise::poisson(scale), static_cast<std::uint64_t>(i)).values[0];
        sum += v;
        sq += v * v;
    }
    const double pm = sum / kDraws;
    const double pvar = (sq - kDraws * pm * pm) / (kDraws - 1);
    CHECK(std::abs(pm - b0) < 0.05 * b0);
    CHECK(std::abs(pvar - b0 / scale) < 0.1 * b0 / scale);
}

TEST_CASE("bucket file and csv") {
    const auto b = measure(gen_random_patterns(2, 7, 3, 3, RandomDistribution::Uniform), random_image(3, 3, 3));
    const auto bytes = serialize_buckets(b);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "GIBK");
    CHECK(bytes.size() == 4 + 4 + 4 + 7 * 8);
    CHECK(deserialize_buckets(bytes) == b);
    const auto path = std::filesystem::temp_directory_path() / "gi_test_buckets.gibk";
    save_buckets(path, b);
    CHECK(load_buckets(path) == b);
    std::filesystem::remove(path);

    auto cut = bytes;
    cut.pop_back();
    CHECK(kind_of([&] { deserialize_buckets(cut); }) == ErrorKind::CorruptionError);

    std::istringstream csv(buckets_to_csv(b));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "index,value");
    for (std::size_t j = 0; j < b.size(); ++j) {
        REQUIRE(std::getline(csv, line));
        const auto comma = line.find(',');
        CHECK(std::stoul(line.substr(0, comma)) == j);
        CHECK(std::stod(line.substr(comma + 1)) == b.values[j]);
    }
}
