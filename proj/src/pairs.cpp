#include "gi/pairs.hpp"

#include <cmath>

#include "gi/error.hpp"
#include "gi/random.hpp"

namespace gi {

void TrainingPair::validate() const {
    require(width > 0 && height > 0, ErrorKind::InvalidArgument, "training pair has empty dimensions");
    require(noisy.size() == width * height && clean.size() == width * height, ErrorKind::InvalidArgument,
            "noisy and clean images must share dimensions");
}

TrainingPair make_pair(const ImagePlane& noisy, const ImagePlane& clean, double sampling_rate) {
    require(noisy.width() == clean.width() && noisy.height() == clean.height(), ErrorKind::InvalidArgument,
            "noisy and clean images must share dimensions");
    TrainingPair p{noisy.width(), noisy.height(), {}, {}, sampling_rate};
    p.noisy.assign(noisy.pixels().begin(), noisy.pixels().end());
    p.clean.assign(clean.pixels().begin(), clean.pixels().end());
    return p;
}

std::string to_string(Augmentation aug) {
    switch (aug) {
        case Augmentation::None: return "none";
        case Augmentation::HFlip: return "hflip";
        case Augmentation::Rotation: return "rotation";
        case Augmentation::HFlipRotation: return "hflip+rotation";
    }
    return "?";
}

Augmentation augmentation_from_string(const std::string& name) {
    if (name == "none") return Augmentation::None;
    if (name == "hflip" || name == "H") return Augmentation::HFlip;
    if (name == "rotation" || name == "R") return Augmentation::Rotation;
    if (name == "hflip+rotation" || name == "H+R") return Augmentation::HFlipRotation;
    fail(ErrorKind::InvalidArgument, "unknown augmentation '" + name + "'");
}

namespace {

std::vector<float> apply(const std::vector<float>& src, std::size_t w, std::size_t h, SpatialOp op) {
    std::vector<float> cur = src;
    if (op.hflip)
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) cur[r * w + c] = src[r * w + (w - 1 - c)];
    const int turns = ((op.quarter_turns % 4) + 4) % 4;
    for (int t = 0; t < turns; ++t) {
        // Square only; out(r, c) = in(c, n-1-r) turns the image counter-clockwise.
        std::vector<float> next(cur.size());
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t c = 0; c < w; ++c) next[r * w + c] = cur[c * w + (w - 1 - r)];
        cur = std::move(next);
    }
    return cur;
}

}  // namespace

TrainingPair transform(const TrainingPair& pair, SpatialOp op) {
    pair.validate();
    if (op.quarter_turns % 4 != 0)
        require(pair.width == pair.height, ErrorKind::InvalidArgument, "rotation needs a square patch");
    TrainingPair out = pair;
    out.noisy = apply(pair.noisy, pair.width, pair.height, op);
    out.clean = apply(pair.clean, pair.width, pair.height, op);
    return out;
}

SpatialOp draw_op(Augmentation policy, std::uint64_t seed, std::uint64_t index) {
    SpatialOp op;
    if (policy == Augmentation::None) return op;
    auto rng = derived_rng(seed, kStreamAugment, index);
    if (policy == Augmentation::HFlip || policy == Augmentation::HFlipRotation) op.hflip = (rng() >> 63) != 0;
    if (policy == Augmentation::Rotation || policy == Augmentation::HFlipRotation)
        op.quarter_turns = static_cast<int>(rng() >> 62);
    return op;
}

TrainingPair augment(const TrainingPair& pair, Augmentation policy, std::uint64_t seed, std::uint64_t index) {
    if (policy == Augmentation::None) {
        pair.validate();
        return pair;
    }
    return transform(pair, draw_op(policy, seed, index));
}

}  // namespace gi
