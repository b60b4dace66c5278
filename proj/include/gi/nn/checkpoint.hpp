#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gi/nn/network.hpp"

namespace gi::nn {

/// What a network was trained for; written as key=value lines inside the checkpoint.
struct CheckpointMeta {
    std::string task = "speckle";  // speckle | gaussian
    std::string stack_checksum;    // empty for the gaussian task
    std::string recon_mode = "plain";
    double sigma = 0.0;
    double sampling_rate = 0.0;
    std::size_t epoch = 0;

    std::string to_text() const;
    static CheckpointMeta from_text(const std::string& text);
    bool operator==(const CheckpointMeta&) const = default;
};

struct Checkpoint {
    CheckpointMeta meta;
    NetworkParams params;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// "epoch,mean_loss" with one row per epoch, starting at 1.
std::string loss_curve_csv(std::span<const double> curve);

}  // namespace gi::nn
