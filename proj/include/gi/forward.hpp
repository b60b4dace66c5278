#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gi/image.hpp"
#include "gi/patterns.hpp"

namespace gi {

/// One bucket-detector reading per illumination pattern.
struct BucketSeries {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool operator==(const BucketSeries&) const = default;
};

struct DetectorNoise {
    enum class Type { None, Gaussian, Poisson };
    Type type = Type::None;
    double sigma = 0.0;  // gaussian: additive std
    double scale = 1.0;  // poisson: photons per unit bucket value

    static DetectorNoise none() { return {}; }
    static DetectorNoise gaussian(double sigma) { return {Type::Gaussian, sigma, 1.0}; }
    static DetectorNoise poisson(double scale) { return {Type::Poisson, 0.0, scale}; }
};

/// values[j] = sum_r P_j(r) O(r), accumulated left to right in double.
BucketSeries measure(const PatternStack& stack, const ImagePlane& object);

BucketSeries measure_noisy(const PatternStack& stack, const ImagePlane& object, const DetectorNoise& noise,
                           std::uint64_t seed);

std::vector<std::uint8_t> serialize_buckets(const BucketSeries& buckets);
BucketSeries deserialize_buckets(std::span<const std::uint8_t> bytes);
void save_buckets(const std::filesystem::path& path, const BucketSeries& buckets);
BucketSeries load_buckets(const std::filesystem::path& path);
/// "index,value" rows with round-trippable decimal values.
std::string buckets_to_csv(const BucketSeries& buckets);

}  // namespace gi
