#include "gi/nn/checkpoint.hpp"

#include <fmt/format.h>

#include <sstream>

#include "gi/binary_io.hpp"
#include "gi/error.hpp"

namespace gi::nn {

namespace {

constexpr std::uint32_t kVersion = 1;

void put_tensor(ByteWriter& w, std::span<const double> v) {
    w.u64(v.size());
    w.f64s(v);
}

std::vector<double> get_tensor(ByteReader& r, std::size_t expected) {
    const auto n = r.u64();
    if (n != expected) fail(ErrorKind::CorruptionError, "checkpoint tensor shape does not match its header");
    std::vector<double> v(n);
    r.f64s(v);
    return v;
}

}  // namespace

std::string CheckpointMeta::to_text() const {
    return fmt::format("task={}\nstack_checksum={}\nrecon_mode={}\nsigma={}\nsampling_rate={}\nepoch={}\n", task,
                       stack_checksum, recon_mode, sigma, sampling_rate, epoch);
}

CheckpointMeta CheckpointMeta::from_text(const std::string& text) {
    CheckpointMeta m;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const auto key = line.substr(0, eq);
        const auto value = line.substr(eq + 1);
        try {
            if (key == "task") m.task = value;
            else if (key == "stack_checksum") m.stack_checksum = value;
            else if (key == "recon_mode") m.recon_mode = value;
            else if (key == "sigma") m.sigma = std::stod(value);
            else if (key == "sampling_rate") m.sampling_rate = std::stod(value);
            else if (key == "epoch") m.epoch = std::stoull(value);
        } catch (const std::exception&) {
            fail(ErrorKind::FormatError, "bad checkpoint metadata line '" + line + "'");
        }
    }
    return m;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
    ckpt.params.validate();
    const auto& spec = ckpt.params.spec;
    ByteWriter w;
    w.magic("GINN");
    w.u32(kVersion);
    w.text(ckpt.meta.to_text());
    w.u32(static_cast<std::uint32_t>(spec.depth));
    w.u32(static_cast<std::uint32_t>(spec.channels));
    w.u32(static_cast<std::uint32_t>(spec.kernel));
    w.u32(static_cast<std::uint32_t>(spec.input_channels));
    w.f64(spec.bn_epsilon);
    w.u64(ckpt.params.init_seed);
    for (const auto& l : ckpt.params.layers) {
        w.u32(static_cast<std::uint32_t>(l.conv.out_channels));
        w.u32(static_cast<std::uint32_t>(l.conv.in_channels));
        w.u32(static_cast<std::uint32_t>(l.conv.kernel));
        put_tensor(w, l.conv.weight);
        put_tensor(w, l.conv.bias);
        w.u8(l.bn ? 1 : 0);
        if (l.bn) {
            w.f64(l.bn->epsilon);
            w.f64(l.bn->momentum);
            put_tensor(w, l.bn->gamma);
            put_tensor(w, l.bn->beta);
            put_tensor(w, l.bn->running_mean);
            put_tensor(w, l.bn->running_var);
        }
    }
    return w.take();
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    r.expect_magic("GINN");
    const auto version = r.u32();
    require(version == kVersion, ErrorKind::FormatError, fmt::format("unsupported checkpoint version {}", version));
    Checkpoint c;
    c.meta = CheckpointMeta::from_text(r.text());
    auto& spec = c.params.spec;
    spec.depth = r.u32();
    spec.channels = r.u32();
    spec.kernel = r.u32();
    spec.input_channels = r.u32();
    spec.bn_epsilon = r.f64();
    c.params.init_seed = r.u64();
    try {
        spec.validate();
    } catch (const Error& e) {
        fail(ErrorKind::CorruptionError, std::string("checkpoint spec is invalid: ") + e.what());
    }
    for (std::size_t i = 0; i < spec.depth; ++i) {
        LayerParams l;
        l.conv.out_channels = r.u32();
        l.conv.in_channels = r.u32();
        l.conv.kernel = r.u32();
        if (l.conv.out_channels != spec.out_channels(i) || l.conv.in_channels != spec.in_channels(i) ||
            l.conv.kernel != spec.kernel)
            fail(ErrorKind::CorruptionError, fmt::format("checkpoint layer {} shape does not match the spec", i));
        l.conv.weight = get_tensor(r, l.conv.out_channels * l.conv.in_channels * l.conv.kernel * l.conv.kernel);
        l.conv.bias = get_tensor(r, l.conv.out_channels);
        if (r.u8() != 0) {
            BatchNormParams bn;
            bn.epsilon = r.f64();
            bn.momentum = r.f64();
            bn.gamma = get_tensor(r, l.conv.out_channels);
            bn.beta = get_tensor(r, l.conv.out_channels);
            bn.running_mean = get_tensor(r, l.conv.out_channels);
            bn.running_var = get_tensor(r, l.conv.out_channels);
            l.bn = std::move(bn);
        }
        c.params.layers.push_back(std::move(l));
    }
    if (r.remaining() != 0) fail(ErrorKind::CorruptionError, "trailing bytes after checkpoint");
    try {
        c.params.validate();
    } catch (const Error& e) {
        fail(ErrorKind::CorruptionError, std::string("checkpoint is inconsistent: ") + e.what());
    }
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return deserialize_checkpoint(read_file(path)); }

std::string loss_curve_csv(std::span<const double> curve) {
    std::string out = "epoch,mean_loss\n";
    for (std::size_t i = 0; i < curve.size(); ++i) out += fmt::format("{},{}\n", i + 1, curve[i]);
    return out;
}

}  // namespace gi::nn
