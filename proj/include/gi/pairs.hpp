#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gi/image.hpp"

namespace gi {

/// A (noisy, clean) training example; the residual target is noisy - clean.
/// Stored in float32 so archives reproduce pairs exactly.
struct TrainingPair {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<float> noisy;
    std::vector<float> clean;
    double sampling_rate = 0.0;

    void validate() const;
    bool operator==(const TrainingPair&) const = default;
};

TrainingPair make_pair(const ImagePlane& noisy, const ImagePlane& clean, double sampling_rate);

enum class Augmentation { None, HFlip, Rotation, HFlipRotation };
std::string to_string(Augmentation aug);
Augmentation augmentation_from_string(const std::string& name);

/// Horizontal flip (optional) followed by quarter_turns counter-clockwise 90 degree turns.
struct SpatialOp {
    bool hflip = false;
    int quarter_turns = 0;
};

/// Applies the same transform to both images of the pair.
TrainingPair transform(const TrainingPair& pair, SpatialOp op);

/// Draws a transform allowed by the policy from (seed, index) and applies it.
SpatialOp draw_op(Augmentation policy, std::uint64_t seed, std::uint64_t index);
TrainingPair augment(const TrainingPair& pair, Augmentation policy, std::uint64_t seed, std::uint64_t index);

}  // namespace gi
