#include "gi/forward.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>

#include "gi/binary_io.hpp"
#include "gi/error.hpp"
#include "gi/random.hpp"

namespace gi {

namespace {
constexpr std::uint32_t kBucketFormatVersion = 1;
}

BucketSeries measure(const PatternStack& stack, const ImagePlane& object) {
    require(stack.width == object.width() && stack.height == object.height(), ErrorKind::InvalidArgument,
            fmt::format("pattern size {}x{} does not match object size {}x{}", stack.width, stack.height,
                        object.width(), object.height()));
    const std::size_t n = stack.pixels();
    const auto o = object.pixels();
    BucketSeries out;
    out.values.resize(stack.m_patterns);
    for (std::size_t j = 0; j < stack.m_patterns; ++j) {
        const float* p = stack.data.data() + j * n;
        double acc = 0.0;
        for (std::size_t r = 0; r < n; ++r) acc += static_cast<double>(p[r]) * o[r];
        out.values[j] = acc;
    }
    return out;
}

BucketSeries measure_noisy(const PatternStack& stack, const ImagePlane& object, const DetectorNoise& noise,
                           std::uint64_t seed) {
    switch (noise.type) {
        case DetectorNoise::Type::None: break;
        case DetectorNoise::Type::Gaussian:
            require(std::isfinite(noise.sigma) && noise.sigma >= 0.0, ErrorKind::InvalidArgument,
                    "gaussian detector noise needs sigma >= 0");
            break;
        case DetectorNoise::Type::Poisson:
            require(std::isfinite(noise.scale) && noise.scale > 0.0, ErrorKind::InvalidArgument,
                    "poisson detector noise needs scale > 0");
            break;
    }
    BucketSeries out = measure(stack, object);
    if (noise.type == DetectorNoise::Type::None) return out;
    if (noise.type == DetectorNoise::Type::Gaussian && noise.sigma == 0.0) return out;

    auto rng = derived_rng(seed, kStreamNoise);
    if (noise.type == DetectorNoise::Type::Gaussian) {
        std::normal_distribution<double> gauss(0.0, noise.sigma);
        for (auto& v : out.values) v += gauss(rng);
    } else {
        for (auto& v : out.values) {
            require(v >= 0.0, ErrorKind::InvalidArgument, "poisson noise needs non-negative bucket values");
            std::poisson_distribution<long long> counts(v * noise.scale);
            v = v > 0.0 ? static_cast<double>(counts(rng)) / noise.scale : 0.0;
        }
    }
    return out;
}

std::vector<std::uint8_t> serialize_buckets(const BucketSeries& buckets) {
    ByteWriter w;
    w.magic("GIBK");
    w.u32(kBucketFormatVersion);
    w.u32(static_cast<std::uint32_t>(buckets.values.size()));
    w.f64s(buckets.values);
    return w.take();
}

BucketSeries deserialize_buckets(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_magic("GIBK");
    const auto version = r.u32();
    require(version == kBucketFormatVersion, ErrorKind::FormatError,
            fmt::format("unsupported bucket format version {}", version));
    const auto m = r.u32();
    require(r.remaining() == std::size_t{m} * sizeof(double), ErrorKind::CorruptionError,
            "bucket payload size does not match its header");
    BucketSeries out;
    out.values.resize(m);
    r.f64s(out.values);
    return out;
}

void save_buckets(const std::filesystem::path& path, const BucketSeries& buckets) {
    write_file(path, serialize_buckets(buckets));
}

BucketSeries load_buckets(const std::filesystem::path& path) { return deserialize_buckets(read_file(path)); }

std::string buckets_to_csv(const BucketSeries& buckets) {
    std::string out = "index,value\n";
    for (std::size_t j = 0; j < buckets.values.size(); ++j) out += fmt::format("{},{}\n", j, buckets.values[j]);
    return out;
}

}  // namespace gi
