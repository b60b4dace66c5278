#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gi {

enum class PatternKind : std::uint8_t {
    RandomBinary = 0,
    RandomUniform = 1,
    Hadamard = 2,
    Interference = 3,
    External = 4,  // recorded by a camera or produced outside this library
};

std::string to_string(PatternKind kind);
PatternKind pattern_kind_from_string(const std::string& name);

enum class RandomDistribution { Binary, Uniform };

/// The M x N illumination matrix, one row-major pattern per row, with the
/// provenance needed to regenerate it bit-for-bit.
///
/// Entries are intensities in [0,1]. The one exception is the signed Hadamard
/// oracle form (params contain "form=signed"), which holds +-scale values.
struct PatternStack {
    PatternKind kind = PatternKind::External;
    std::uint64_t seed = 0;
    std::string params;
    std::size_t m_patterns = 0;
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<float> data;

    std::size_t pixels() const { return width * height; }
    std::span<const float> pattern(std::size_t j) const {
        return std::span<const float>(data).subspan(j * pixels(), pixels());
    }
    double sampling_rate() const {
        return static_cast<double>(m_patterns) / static_cast<double>(pixels());
    }
    bool is_signed() const;

    /// First m patterns. For the random kinds this equals generating m directly.
    PatternStack prefix(std::size_t m) const;

    /// Throws InvalidArgument if shape or value-range invariants are broken.
    void validate() const;

    /// Identity tag over the serialized file bytes.
    std::string checksum() const;

    bool operator==(const PatternStack&) const = default;
};

struct EmitterLayout {
    std::size_t emitter_count = 24;
    double disk_diameter_mm = 5.0;
    double pinhole_diameter_mm = 0.2;
    double wavelength_nm = 632.8;
    double propagation_distance_m = 1.0;
    /// Unset: chosen so one fringe of the widest possible pair spans 4 pixels.
    std::optional<double> detector_pitch_mm;
    /// Multiply the far field by the single-pinhole sinc envelope.
    bool pinhole_envelope = false;

    double pitch_mm() const;
    void validate() const;
};

/// Point emitters behind a pinhole mask, observed in the Fraunhofer far field.
class InterferenceSource {
public:
    /// Rejection-samples emitter centres uniformly in the disk, keeping every
    /// pinhole inside it and pairwise separations >= one pinhole diameter.
    static InterferenceSource place(const EmitterLayout& layout, std::uint64_t seed);
    /// Explicit positions in metres, relative to the disk centre.
    InterferenceSource(const EmitterLayout& layout, std::vector<std::array<double, 2>> positions_m);

    const std::vector<std::array<double, 2>>& positions() const { return positions_; }
    const EmitterLayout& layout() const { return layout_; }

    /// |sum_k exp(i(phi_k + 2pi/(lambda z) rho_k . x))|^2 at detector point x (metres).
    double intensity(std::span<const double> phases, double x_m, double y_m) const;
    /// Raw (unnormalised) intensity over a width x height detector grid centred on the axis.
    std::vector<double> render(std::span<const double> phases, std::size_t width, std::size_t height) const;

private:
    EmitterLayout layout_;
    std::vector<std::array<double, 2>> positions_;
};

struct GramDiagnostics {
    double frobenius_deviation = 0.0;
    double max_off_diagonal_coherence = 0.0;
    double condition_number = 1.0;  // +inf when rank-deficient
};

struct GramOptions {
    std::size_t pixel_cap = 4096;
    bool compute_condition_number = true;
};

PatternStack gen_random_patterns(std::uint64_t seed, std::size_t m_patterns, std::size_t width,
                                 std::size_t height, RandomDistribution distribution);

/// Sylvester Hadamard rows reshaped to width x height, remapped from {-1,+1} to {0,1}.
PatternStack gen_hadamard_patterns(std::size_t width, std::size_t height);
/// The signed {-1,+1} Sylvester form; orthonormal scales rows by 1/sqrt(N) so P^T P = I.
PatternStack hadamard_signed(std::size_t width, std::size_t height, bool orthonormal = false);

PatternStack gen_interference_patterns(const EmitterLayout& layout, std::uint64_t seed,
                                       std::size_t m_patterns, std::size_t width, std::size_t height);

GramDiagnostics gram_diagnostics(const PatternStack& stack, const GramOptions& options = {});

std::vector<std::uint8_t> serialize_patterns(const PatternStack& stack);
PatternStack deserialize_patterns(std::span<const std::uint8_t> bytes);
void save_patterns(const std::filesystem::path& path, const PatternStack& stack);
PatternStack load_patterns(const std::filesystem::path& path);

}  // namespace gi
