#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gi/image.hpp"
#include "gi/pairs.hpp"
#include "gi/patterns.hpp"
#include "gi/recon.hpp"

namespace gi {

/// Reads an 8- or 16-bit single-channel PGM (P2/P5) or PNG, scaled to [0,1].
/// Anything unreadable, including a missing file or colour data, raises FormatError.
ImagePlane load_gray_image(const std::filesystem::path& path);
/// Writes P5 PGM (bits 8 or 16) or 8-bit grayscale PNG, chosen by extension.
void save_gray_image(const std::filesystem::path& path, const ImagePlane& image, int bits = 8);

/// Every size x size window at multiples of stride; partial border windows are dropped.
std::vector<ImagePlane> extract_patches(const ImagePlane& image, std::size_t size, std::size_t stride);

struct ManifestEntry {
    std::string path;  // relative to the manifest source
    std::size_t width = 0;
    std::size_t height = 0;
    std::string checksum;
    std::size_t patches = 0;  // 0 when the image is smaller than a patch

    bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
    std::string source;
    std::string split = "train";
    std::size_t patch_size = 64;
    std::size_t stride = 64;
    std::vector<ManifestEntry> entries;
    // Filled in once pairs are built against a stack.
    std::string stack_kind;
    std::uint64_t stack_seed = 0;
    std::string stack_checksum;
    std::string recon_mode;
    double sampling_rate = 0.0;
    std::string normalization = "per-image-minmax";

    std::string to_text() const;
    static DatasetManifest from_text(const std::string& text);
    bool operator==(const DatasetManifest&) const = default;
};

/// Lists *.pgm and *.png files in dir in name order.
DatasetManifest scan_directory(const std::filesystem::path& dir, std::size_t patch_size, std::size_t stride,
                               const std::string& split);
/// Entries for images that never touched the filesystem; checksums cover the pixel values.
DatasetManifest manifest_from_images(const std::string& source, std::span<const ImagePlane> images,
                                     std::size_t patch_size, std::size_t stride, const std::string& split);
std::vector<ImagePlane> load_manifest_images(const DatasetManifest& manifest);
std::vector<ImagePlane> manifest_patches(const DatasetManifest& manifest);

bool manifests_disjoint(const DatasetManifest& train, const DatasetManifest& test);
/// Throws PlanError naming the first image shared by both splits.
void require_disjoint(const DatasetManifest& train, const DatasetManifest& test);

/// y = normalize_for_display(bc_reconstruct(stack, measure(stack, x), mode)).
ImagePlane speckle_observation(const PatternStack& stack, const ImagePlane& clean, BcMode mode);

struct DatasetArchive {
    DatasetManifest manifest;
    std::vector<TrainingPair> pairs;
};

std::vector<TrainingPair> build_training_set(std::span<const ImagePlane> patches, const PatternStack& stack,
                                             BcMode mode);
/// Loads and patches every manifest image, then pairs each patch with its speckle observation.
DatasetArchive build_training_set(const DatasetManifest& manifest, const PatternStack& stack, BcMode mode);

/// "GIDS" archive; a SHA-256 trailer guards the whole payload.
std::vector<std::uint8_t> serialize_archive(const DatasetArchive& archive);
DatasetArchive deserialize_archive(std::span<const std::uint8_t> bytes);
void save_archive(const std::filesystem::path& path, const DatasetArchive& archive);
DatasetArchive load_archive(const std::filesystem::path& path);

/// A warning when the archive was built with a different stack, otherwise nothing.
std::optional<std::string> stack_mismatch_warning(const DatasetManifest& manifest, const PatternStack& stack);

/// Affine map of the pixel range onto [0,1]; a constant image becomes 0.5.
ImagePlane stretch_to_unit_range(const ImagePlane& image);

/// Piecewise-flat test scene: a shaded background with a few random discs and
/// boxes, stretched to span [0,1].
ImagePlane synthetic_scene(std::size_t width, std::size_t height, std::uint64_t seed, std::uint64_t index);
std::vector<ImagePlane> synthetic_scenes(std::size_t width, std::size_t height, std::uint64_t seed,
                                         std::size_t count, std::uint64_t first_index = 0);

}  // namespace gi
