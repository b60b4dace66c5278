#include "gi/patterns.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

#include "gi/binary_io.hpp"
#include "gi/error.hpp"
#include "gi/random.hpp"

namespace gi {

namespace {

constexpr std::uint32_t kPatternFormatVersion = 1;

bool is_power_of_four(std::size_t n) {
    return n != 0 && std::has_single_bit(n) && (std::countr_zero(n) % 2 == 0);
}

void check_dims(std::size_t m, std::size_t width, std::size_t height) {
    require(m >= 1, ErrorKind::InvalidArgument, "m_patterns must be >= 1");
    require(width >= 1 && height >= 1, ErrorKind::InvalidArgument, "pattern width and height must be >= 1");
}

double sinc(double u) { return u == 0.0 ? 1.0 : std::sin(u) / u; }

}  // namespace

std::string to_string(PatternKind kind) {
    switch (kind) {
        case PatternKind::RandomBinary: return "random-binary";
        case PatternKind::RandomUniform: return "random-uniform";
        case PatternKind::Hadamard: return "hadamard";
        case PatternKind::Interference: return "interference";
        case PatternKind::External: return "external";
    }
    return "unknown";
}

PatternKind pattern_kind_from_string(const std::string& name) {
    for (auto k : {PatternKind::RandomBinary, PatternKind::RandomUniform, PatternKind::Hadamard,
                   PatternKind::Interference, PatternKind::External})
        if (to_string(k) == name) return k;
    fail(ErrorKind::InvalidArgument, "unknown pattern kind '" + name + "'");
}

bool PatternStack::is_signed() const {
    return kind == PatternKind::Hadamard && params.find("form=signed") != std::string::npos;
}

PatternStack PatternStack::prefix(std::size_t m) const {
    require(m >= 1 && m <= m_patterns, ErrorKind::InvalidArgument,
            fmt::format("prefix of {} patterns requested from a stack of {}", m, m_patterns));
    PatternStack out = *this;
    out.m_patterns = m;
    out.data.resize(m * pixels());
    return out;
}

void PatternStack::validate() const {
    check_dims(m_patterns, width, height);
    require(data.size() == m_patterns * pixels(), ErrorKind::InvalidArgument,
            "pattern data size does not match M x width x height");
    const bool signed_form = is_signed();
    for (float v : data) {
        require(std::isfinite(v), ErrorKind::InvalidArgument, "pattern values must be finite");
        if (!signed_form)
            require(v >= 0.0f && v <= 1.0f, ErrorKind::InvalidArgument, "pattern intensities must lie in [0,1]");
    }
}

std::string PatternStack::checksum() const { return short_checksum(serialize_patterns(*this)); }

// ---------------------------------------------------------------------------
// Random and Hadamard stacks

PatternStack gen_random_patterns(std::uint64_t seed, std::size_t m_patterns, std::size_t width,
                                 std::size_t height, RandomDistribution distribution) {
    check_dims(m_patterns, width, height);
    PatternStack stack;
    stack.kind = distribution == RandomDistribution::Binary ? PatternKind::RandomBinary
                                                            : PatternKind::RandomUniform;
    stack.seed = seed;
    stack.params = distribution == RandomDistribution::Binary ? "p=0.5" : "range=[0,1)";
    stack.m_patterns = m_patterns;
    stack.width = width;
    stack.height = height;
    const std::size_t n = width * height;
    stack.data.resize(m_patterns * n);
    for (std::size_t j = 0; j < m_patterns; ++j) {
        auto rng = derived_rng(seed, kStreamPattern, j);
        float* row = stack.data.data() + j * n;
        if (distribution == RandomDistribution::Binary) {
            for (std::size_t r = 0; r < n; ++r) row[r] = static_cast<float>(rng() >> 63);
        } else {
            // float rounding of values just below 1 may give exactly 1.0f, still in range
            for (std::size_t r = 0; r < n; ++r) row[r] = static_cast<float>(uniform01(rng));
        }
    }
    return stack;
}

namespace {

PatternStack sylvester(std::size_t width, std::size_t height, bool remap, float scale) {
    require(width >= 1 && height >= 1, ErrorKind::InvalidArgument, "pattern width and height must be >= 1");
    const std::size_t n = width * height;
    if (!is_power_of_four(n))
        fail(ErrorKind::UnsupportedSize,
             fmt::format("Hadamard patterns need a power-of-4 pixel count, got {}x{}={}", width, height, n));
    PatternStack stack;
    stack.kind = PatternKind::Hadamard;
    stack.m_patterns = n;
    stack.width = width;
    stack.height = height;
    stack.params = remap ? fmt::format("order={};form=binary;remap=(h+1)/2", n)
                         : fmt::format("order={};form=signed;scale={}", n, scale);
    stack.data.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const int h = (std::popcount(i & j) % 2 == 0) ? 1 : -1;
            stack.data[i * n + j] = remap ? static_cast<float>((h + 1) / 2) : static_cast<float>(h) * scale;
        }
    return stack;
}

}  // namespace

PatternStack gen_hadamard_patterns(std::size_t width, std::size_t height) {
    return sylvester(width, height, true, 1.0f);
}

PatternStack hadamard_signed(std::size_t width, std::size_t height, bool orthonormal) {
    // sqrt(N) is a power of two for N = 4^k, so the scaled entries are exact.
    const double n = static_cast<double>(width) * static_cast<double>(height);
    const float scale = orthonormal ? static_cast<float>(1.0 / std::sqrt(n)) : 1.0f;
    return sylvester(width, height, false, scale);
}

// ---------------------------------------------------------------------------
// Interference source

double EmitterLayout::pitch_mm() const {
    if (detector_pitch_mm) return *detector_pitch_mm;
    const double fringe_m = wavelength_nm * 1e-9 * propagation_distance_m / (disk_diameter_mm * 1e-3);
    return fringe_m / 4.0 * 1e3;
}

void EmitterLayout::validate() const {
    require(emitter_count >= 2, ErrorKind::InvalidArgument, "interference needs at least 2 emitters");
    require(disk_diameter_mm > 0 && pinhole_diameter_mm > 0 && wavelength_nm > 0 && propagation_distance_m > 0,
            ErrorKind::InvalidArgument, "emitter layout quantities must be strictly positive");
    require(!detector_pitch_mm || *detector_pitch_mm > 0, ErrorKind::InvalidArgument,
            "detector pitch must be strictly positive");
    require(pinhole_diameter_mm < disk_diameter_mm, ErrorKind::InvalidArgument,
            "pinholes must be smaller than the disk");
}

InterferenceSource::InterferenceSource(const EmitterLayout& layout, std::vector<std::array<double, 2>> positions_m)
    : layout_(layout), positions_(std::move(positions_m)) {
    require(positions_.size() >= 2, ErrorKind::InvalidArgument, "interference needs at least 2 emitters");
}

InterferenceSource InterferenceSource::place(const EmitterLayout& layout, std::uint64_t seed) {
    layout.validate();
    const double pinhole = layout.pinhole_diameter_mm * 1e-3;
    const double max_radius = layout.disk_diameter_mm * 1e-3 / 2.0 - pinhole / 2.0;
    auto rng = derived_rng(seed, kStreamEmitter);
    std::vector<std::array<double, 2>> pos;
    const std::size_t max_attempts = 100000 * layout.emitter_count;
    for (std::size_t attempt = 0; pos.size() < layout.emitter_count; ++attempt) {
        if (attempt >= max_attempts)
            fail(ErrorKind::InvalidArgument,
                 fmt::format("could not place {} non-overlapping pinholes in the disk", layout.emitter_count));
        const double x = (2.0 * uniform01(rng) - 1.0) * max_radius;
        const double y = (2.0 * uniform01(rng) - 1.0) * max_radius;
        if (x * x + y * y >= max_radius * max_radius) continue;
        const bool clear = std::all_of(pos.begin(), pos.end(), [&](const auto& p) {
            return std::hypot(p[0] - x, p[1] - y) >= pinhole;
        });
        if (clear) pos.push_back({x, y});
    }
    return InterferenceSource(layout, std::move(pos));
}

double InterferenceSource::intensity(std::span<const double> phases, double x_m, double y_m) const {
    require(phases.size() == positions_.size(), ErrorKind::InvalidArgument, "one phase per emitter required");
    const double lambda_z = layout_.wavelength_nm * 1e-9 * layout_.propagation_distance_m;
    const double k0 = 2.0 * std::numbers::pi / lambda_z;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t k = 0; k < positions_.size(); ++k) {
        const double arg = phases[k] + k0 * (positions_[k][0] * x_m + positions_[k][1] * y_m);
        re += std::cos(arg);
        im += std::sin(arg);
    }
    double value = re * re + im * im;
    if (layout_.pinhole_envelope) {
        const double a = layout_.pinhole_diameter_mm * 1e-3;
        const double ex = sinc(std::numbers::pi * a * x_m / lambda_z);
        const double ey = sinc(std::numbers::pi * a * y_m / lambda_z);
        value *= ex * ex * ey * ey;
    }
    return value;
}

std::vector<double> InterferenceSource::render(std::span<const double> phases, std::size_t width,
                                               std::size_t height) const {
    const double pitch = layout_.pitch_mm() * 1e-3;
    const double cx = (static_cast<double>(width) - 1.0) / 2.0;
    const double cy = (static_cast<double>(height) - 1.0) / 2.0;
    std::vector<double> out(width * height);
    for (std::size_t row = 0; row < height; ++row)
        for (std::size_t col = 0; col < width; ++col)
            out[row * width + col] = intensity(phases, (static_cast<double>(col) - cx) * pitch,
                                               (static_cast<double>(row) - cy) * pitch);
    return out;
}

PatternStack gen_interference_patterns(const EmitterLayout& layout, std::uint64_t seed, std::size_t m_patterns,
                                       std::size_t width, std::size_t height) {
    layout.validate();
    check_dims(m_patterns, width, height);
    const auto source = InterferenceSource::place(layout, seed);
    const std::size_t k = layout.emitter_count;
    // All phasors aligned is the brightest any pixel can get, so K^2 maps every
    // pattern into [0,1] independently of M.
    const double norm = static_cast<double>(k * k);

    PatternStack stack;
    stack.kind = PatternKind::Interference;
    stack.seed = seed;
    stack.m_patterns = m_patterns;
    stack.width = width;
    stack.height = height;
    stack.params = fmt::format(
        "emitters={};disk_mm={};pinhole_mm={};wavelength_nm={};distance_m={};pitch_mm={};envelope={};norm={}",
        k, layout.disk_diameter_mm, layout.pinhole_diameter_mm, layout.wavelength_nm,
        layout.propagation_distance_m, layout.pitch_mm(), layout.pinhole_envelope ? 1 : 0, norm);
    const std::size_t n = width * height;
    stack.data.resize(m_patterns * n);
    std::vector<double> phases(k);
    for (std::size_t j = 0; j < m_patterns; ++j) {
        auto rng = derived_rng(seed, kStreamPattern, j);
        for (auto& phi : phases) phi = 2.0 * std::numbers::pi * uniform01(rng);
        const auto field = source.render(phases, width, height);
        for (std::size_t r = 0; r < n; ++r)
            stack.data[j * n + r] = static_cast<float>(std::clamp(field[r] / norm, 0.0, 1.0));
    }
    return stack;
}

// ---------------------------------------------------------------------------
// Gram diagnostics

GramDiagnostics gram_diagnostics(const PatternStack& stack, const GramOptions& options) {
    require(stack.m_patterns >= 1, ErrorKind::InvalidArgument, "gram diagnostics need at least one pattern");
    const std::size_t n = stack.pixels();
    if (n > options.pixel_cap)
        fail(ErrorKind::ResourceLimit,
             fmt::format("dense Gram of {} pixels exceeds the configured cap of {}", n, options.pixel_cap));
    const auto m = static_cast<Eigen::Index>(stack.m_patterns);
    const auto ni = static_cast<Eigen::Index>(n);

    const Eigen::MatrixXd p =
        Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(stack.data.data(), m, ni)
            .cast<double>();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(ni, ni);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(p.transpose());
    gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

    GramDiagnostics out;
    const double trace = gram.trace();
    const double fro2 = gram.squaredNorm();
    const double nd = static_cast<double>(n);
    // min over s of ||G/s - I||_F^2 = N - tr(G)^2 / ||G||_F^2
    out.frobenius_deviation = fro2 > 0.0 ? std::sqrt(std::max(0.0, nd - trace * trace / fro2)) : std::sqrt(nd);

    double coherence = 0.0;
    for (Eigen::Index j = 0; j < ni; ++j) {
        const double gjj = gram(j, j);
        if (gjj <= 0.0) continue;
        for (Eigen::Index i = j + 1; i < ni; ++i) {
            const double gii = gram(i, i);
            if (gii <= 0.0) continue;
            coherence = std::max(coherence, std::abs(gram(i, j)) / std::sqrt(gii * gjj));
        }
    }
    out.max_off_diagonal_coherence = std::min(coherence, 1.0);

    constexpr double inf = std::numeric_limits<double>::infinity();
    if (stack.m_patterns == 1) {
        out.condition_number = 1.0;  // a single singular value
    } else if (stack.m_patterns < n) {
        out.condition_number = inf;
    } else if (options.compute_condition_number) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(p);
        const auto& sv = svd.singularValues();
        const double smax = sv(0);
        const double smin = sv(sv.size() - 1);
        const double floor = smax * nd * std::numeric_limits<double>::epsilon();
        out.condition_number = (smax == 0.0 || smin <= floor) ? inf : smax / smin;
    } else {
        out.condition_number = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

// ---------------------------------------------------------------------------
// GIPS file format

std::vector<std::uint8_t> serialize_patterns(const PatternStack& stack) {
    stack.validate();
    ByteWriter w;
    w.magic("GIPS");
    w.u32(kPatternFormatVersion);
    w.u8(static_cast<std::uint8_t>(stack.kind));
    w.u64(stack.seed);
    w.u32(static_cast<std::uint32_t>(stack.m_patterns));
    w.u32(static_cast<std::uint32_t>(stack.width));
    w.u32(static_cast<std::uint32_t>(stack.height));
    w.text(stack.params);
    w.f32s(stack.data);
    return w.take();
}

PatternStack deserialize_patterns(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_magic("GIPS");
    const auto version = r.u32();
    require(version == kPatternFormatVersion, ErrorKind::FormatError,
            fmt::format("unsupported pattern format version {}", version));
    PatternStack stack;
    const auto kind = r.u8();
    require(kind <= static_cast<std::uint8_t>(PatternKind::External), ErrorKind::FormatError, "unknown pattern kind");
    stack.kind = static_cast<PatternKind>(kind);
    stack.seed = r.u64();
    stack.m_patterns = r.u32();
    stack.width = r.u32();
    stack.height = r.u32();
    stack.params = r.text();
    const std::size_t count = stack.m_patterns * stack.pixels();
    require(r.remaining() == count * sizeof(float), ErrorKind::CorruptionError,
            "pattern payload size does not match its header");
    stack.data.resize(count);
    r.f32s(stack.data);
    stack.validate();
    return stack;
}

void save_patterns(const std::filesystem::path& path, const PatternStack& stack) {
    write_file(path, serialize_patterns(stack));
}

PatternStack load_patterns(const std::filesystem::path& path) { return deserialize_patterns(read_file(path)); }

}  // namespace gi
