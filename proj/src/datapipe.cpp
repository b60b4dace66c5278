#include "gi/datapipe.hpp"

#include <fmt/format.h>
#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <sstream>

#include "gi/binary_io.hpp"
#include "gi/error.hpp"
#include "gi/forward.hpp"
#include "gi/random.hpp"

namespace gi {

namespace fs = std::filesystem;

namespace {

// ---- PGM ----

class PgmHeader {
public:
    explicit PgmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t number() {
        skip_space();
        std::size_t v = 0;
        bool any = false;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_++] - '0');
            any = true;
            if (v > 1u << 30) fail(ErrorKind::FormatError, "graymap header value too large");
        }
        if (!any) fail(ErrorKind::FormatError, "malformed graymap header");
        return v;
    }
    std::size_t pos() const { return pos_; }
    void advance(std::size_t n) { pos_ += n; }

private:
    void skip_space() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

ImagePlane decode_pgm(std::span<const std::uint8_t> bytes) {
    const bool ascii = bytes[1] == '2';
    PgmHeader h(bytes);
    h.advance(2);
    const auto w = h.number();
    const auto ht = h.number();
    const auto maxval = h.number();
    if (w == 0 || ht == 0) fail(ErrorKind::FormatError, "graymap has zero size");
    if (maxval == 0 || maxval > 65535) fail(ErrorKind::FormatError, "graymap maxval must be in 1..65535");
    const double scale = static_cast<double>(maxval);
    std::vector<double> px(w * ht);
    if (ascii) {
        for (auto& v : px) {
            const auto raw = h.number();
            if (raw > maxval) fail(ErrorKind::FormatError, "graymap sample exceeds maxval");
            v = static_cast<double>(raw) / scale;
        }
    } else {
        h.advance(1);  // single whitespace after maxval
        const std::size_t bps = maxval < 256 ? 1 : 2;
        if (bytes.size() < h.pos() + px.size() * bps) fail(ErrorKind::FormatError, "graymap data is truncated");
        const auto* d = bytes.data() + h.pos();
        for (std::size_t i = 0; i < px.size(); ++i) {
            const std::size_t raw = bps == 1 ? d[i] : (std::size_t{d[2 * i]} << 8) | d[2 * i + 1];
            if (raw > maxval) fail(ErrorKind::FormatError, "graymap sample exceeds maxval");
            px[i] = static_cast<double>(raw) / scale;
        }
    }
    return ImagePlane(w, ht, std::move(px));
}

void write_pgm(const fs::path& path, const ImagePlane& img, int bits) {
    const unsigned maxval = bits == 16 ? 65535u : 255u;
    std::vector<std::uint8_t> out;
    const auto header = fmt::format("P5\n{} {}\n{}\n", img.width(), img.height(), maxval);
    out.insert(out.end(), header.begin(), header.end());
    for (double v : img.pixels()) {
        const auto q = static_cast<unsigned>(std::lround(v * maxval));
        if (bits == 16) out.push_back(static_cast<std::uint8_t>(q >> 8));
        out.push_back(static_cast<std::uint8_t>(q & 0xff));
    }
    write_file(path, out);
}

// ---- PNG ----

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};

[[noreturn]] void png_error_fn(png_structp png, png_const_charp) { std::longjmp(png_jmpbuf(png), 1); }
void png_warning_fn(png_structp, png_const_charp) {}

ImagePlane decode_png(const fs::path& path) {
    std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
    if (!file) fail(ErrorKind::FormatError, "cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(ErrorKind::ResourceLimit, "cannot allocate PNG decoder");
    }
    // Everything libpng may longjmp over is plain data.
    png_uint_32 w = 0, h = 0;
    int depth = 0, color = 0;
    volatile bool ok = false;
    std::vector<std::uint8_t> buffer;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png)) == 0) {
        png_init_io(png, file.get());
        png_read_info(png, info);
        png_get_IHDR(png, info, &w, &h, &depth, &color, nullptr, nullptr, nullptr);
        if (color == PNG_COLOR_TYPE_GRAY && (depth == 8 || depth == 16)) {
            const std::size_t row = png_get_rowbytes(png, info);
            buffer.resize(row * h);
            rows.resize(h);
            for (png_uint_32 r = 0; r < h; ++r) rows[r] = buffer.data() + r * row;
            png_read_image(png, rows.data());
            ok = true;
        }
    }
    png_destroy_read_struct(&png, &info, nullptr);
    if (!ok) {
        if (w > 0 && color != PNG_COLOR_TYPE_GRAY)
            fail(ErrorKind::FormatError, path.string() + ": only single-channel grayscale PNG is supported");
        if (w > 0 && depth != 8 && depth != 16)
            fail(ErrorKind::FormatError, path.string() + ": only 8- or 16-bit PNG is supported");
        fail(ErrorKind::FormatError, path.string() + ": unreadable PNG");
    }
    std::vector<double> px(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < px.size(); ++i)
        px[i] = depth == 8 ? buffer[i] / 255.0 : ((buffer[2 * i] << 8) | buffer[2 * i + 1]) / 65535.0;
    return ImagePlane(w, h, std::move(px));
}

void write_png(const fs::path& path, const ImagePlane& img) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> px;
    for (double v : img.pixels()) px.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
    png_alloc_size_t size = 0;
    if (!png_image_write_get_memory_size(image, size, 0, px.data(), 0, nullptr))
        fail(ErrorKind::IoError, "PNG encoding failed");
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, px.data(), 0, nullptr))
        fail(ErrorKind::IoError, "PNG encoding failed");
    out.resize(size);
    write_file(path, out);
}

std::string lower_ext(const fs::path& p) {
    auto e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    return e;
}

std::string pixel_checksum(const ImagePlane& img) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(img.width()));
    w.u32(static_cast<std::uint32_t>(img.height()));
    w.f64s(img.pixels());
    return short_checksum(w.bytes());
}

std::size_t patch_count(std::size_t w, std::size_t h, std::size_t size, std::size_t stride) {
    if (w < size || h < size) return 0;
    return ((w - size) / stride + 1) * ((h - size) / stride + 1);
}

}  // namespace

ImagePlane load_gray_image(const fs::path& path) {
    std::vector<std::uint8_t> bytes;
    try {
        bytes = read_file(path);
    } catch (const Error& e) {
        fail(ErrorKind::FormatError, e.what());
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) return decode_pgm(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '3' || bytes[1] == '6'))
        fail(ErrorKind::FormatError, path.string() + ": colour pixmaps are not supported");
    static constexpr std::uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) return decode_png(path);
    fail(ErrorKind::FormatError, path.string() + ": not a PGM or PNG image");
}

void save_gray_image(const fs::path& path, const ImagePlane& image, int bits) {
    require(bits == 8 || bits == 16, ErrorKind::InvalidArgument, "bit depth must be 8 or 16");
    require(image.size() > 0, ErrorKind::InvalidArgument, "cannot save an empty image");
    const auto ext = lower_ext(path);
    if (ext == ".png") {
        require(bits == 8, ErrorKind::InvalidArgument, "PNG output is 8-bit");
        write_png(path, image);
    } else if (ext == ".pgm") {
        write_pgm(path, image, bits);
    } else {
        fail(ErrorKind::InvalidArgument, "unknown image extension '" + ext + "'");
    }
}

std::vector<ImagePlane> extract_patches(const ImagePlane& image, std::size_t size, std::size_t stride) {
    require(size >= 1 && stride >= 1, ErrorKind::InvalidArgument, "patch size and stride must be positive");
    std::vector<ImagePlane> out;
    if (image.width() < size || image.height() < size) return out;
    for (std::size_t r = 0; r + size <= image.height(); r += stride)
        for (std::size_t c = 0; c + size <= image.width(); c += stride) {
            std::vector<double> px;
            px.reserve(size * size);
            for (std::size_t y = 0; y < size; ++y)
                for (std::size_t x = 0; x < size; ++x) px.push_back(image.at(r + y, c + x));
            out.emplace_back(size, size, std::move(px));
        }
    return out;
}

std::string DatasetManifest::to_text() const {
    std::string s;
    s += fmt::format("source={}\nsplit={}\npatch_size={}\nstride={}\nnormalization={}\n", source, split, patch_size,
                     stride, normalization);
    s += fmt::format("stack_kind={}\nstack_seed={}\nstack_checksum={}\nrecon_mode={}\nsampling_rate={}\n", stack_kind,
                     stack_seed, stack_checksum, recon_mode, sampling_rate);
    for (const auto& e : entries)
        s += fmt::format("entry={},{},{},{},{}\n", e.checksum, e.width, e.height, e.patches, e.path);
    return s;
}

DatasetManifest DatasetManifest::from_text(const std::string& text) {
    DatasetManifest m;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(ErrorKind::FormatError, "bad manifest line '" + line + "'");
        const auto key = line.substr(0, eq);
        const auto value = line.substr(eq + 1);
        try {
            if (key == "source") m.source = value;
            else if (key == "split") m.split = value;
            else if (key == "patch_size") m.patch_size = std::stoull(value);
            else if (key == "stride") m.stride = std::stoull(value);
            else if (key == "normalization") m.normalization = value;
            else if (key == "stack_kind") m.stack_kind = value;
            else if (key == "stack_seed") m.stack_seed = std::stoull(value);
            else if (key == "stack_checksum") m.stack_checksum = value;
            else if (key == "recon_mode") m.recon_mode = value;
            else if (key == "sampling_rate") m.sampling_rate = std::stod(value);
            else if (key == "entry") {
                ManifestEntry e;
                std::array<std::string, 4> f;
                std::size_t start = 0;
                for (auto& field : f) {
                    const auto comma = value.find(',', start);
                    if (comma == std::string::npos) fail(ErrorKind::FormatError, "bad manifest entry");
                    field = value.substr(start, comma - start);
                    start = comma + 1;
                }
                e.checksum = f[0];
                e.width = std::stoull(f[1]);
                e.height = std::stoull(f[2]);
                e.patches = std::stoull(f[3]);
                e.path = value.substr(start);
                m.entries.push_back(std::move(e));
            }
        } catch (const std::logic_error&) {
            fail(ErrorKind::FormatError, "bad manifest value in '" + line + "'");
        }
    }
    return m;
}

DatasetManifest scan_directory(const fs::path& dir, std::size_t patch_size, std::size_t stride,
                               const std::string& split) {
    require(patch_size >= 1 && stride >= 1, ErrorKind::InvalidArgument, "patch size and stride must be positive");
    if (!fs::is_directory(dir)) fail(ErrorKind::IoError, "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto ext = lower_ext(e.path());
        if (e.is_regular_file() && (ext == ".pgm" || ext == ".png")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    DatasetManifest m;
    m.source = dir.string();
    m.split = split;
    m.patch_size = patch_size;
    m.stride = stride;
    for (const auto& f : files) {
        const auto img = load_gray_image(f);
        m.entries.push_back({f.filename().string(), img.width(), img.height(), short_checksum(read_file(f)),
                             patch_count(img.width(), img.height(), patch_size, stride)});
    }
    return m;
}

DatasetManifest manifest_from_images(const std::string& source, std::span<const ImagePlane> images,
                                     std::size_t patch_size, std::size_t stride, const std::string& split) {
    require(patch_size >= 1 && stride >= 1, ErrorKind::InvalidArgument, "patch size and stride must be positive");
    DatasetManifest m;
    m.source = source;
    m.split = split;
    m.patch_size = patch_size;
    m.stride = stride;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto& img = images[i];
        m.entries.push_back({fmt::format("image-{:04}", i), img.width(), img.height(), pixel_checksum(img),
                             patch_count(img.width(), img.height(), patch_size, stride)});
    }
    return m;
}

std::vector<ImagePlane> load_manifest_images(const DatasetManifest& manifest) {
    std::vector<ImagePlane> out;
    for (const auto& e : manifest.entries) {
        const auto path = fs::path(manifest.source) / e.path;
        if (short_checksum(read_file(path)) != e.checksum)
            fail(ErrorKind::CorruptionError, path.string() + " changed since the manifest was written");
        out.push_back(load_gray_image(path));
    }
    return out;
}

std::vector<ImagePlane> manifest_patches(const DatasetManifest& manifest) {
    std::vector<ImagePlane> out;
    for (const auto& img : load_manifest_images(manifest)) {
        auto p = extract_patches(img, manifest.patch_size, manifest.stride);
        out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    }
    return out;
}

bool manifests_disjoint(const DatasetManifest& train, const DatasetManifest& test) {
    for (const auto& a : train.entries)
        for (const auto& b : test.entries)
            if (a.checksum == b.checksum) return false;
    return true;
}

void require_disjoint(const DatasetManifest& train, const DatasetManifest& test) {
    for (const auto& a : train.entries)
        for (const auto& b : test.entries)
            if (a.checksum == b.checksum)
                fail(ErrorKind::PlanError,
                     fmt::format("image {} appears in both splits (as {} and {})", a.checksum, a.path, b.path));
}

ImagePlane speckle_observation(const PatternStack& stack, const ImagePlane& clean, BcMode mode) {
    return normalize_for_display(bc_reconstruct(stack, measure(stack, clean), mode));
}

std::vector<TrainingPair> build_training_set(std::span<const ImagePlane> patches, const PatternStack& stack,
                                             BcMode mode) {
    stack.validate();
    std::vector<TrainingPair> out;
    out.reserve(patches.size());
    for (const auto& x : patches) {
        require(x.width() == stack.width && x.height() == stack.height, ErrorKind::InvalidArgument,
                fmt::format("patch {}x{} does not match the {}x{} stack", x.width(), x.height(), stack.width,
                            stack.height));
        out.push_back(make_pair(speckle_observation(stack, x, mode), x, stack.sampling_rate()));
    }
    return out;
}

DatasetArchive build_training_set(const DatasetManifest& manifest, const PatternStack& stack, BcMode mode) {
    require(manifest.patch_size == stack.width && manifest.patch_size == stack.height, ErrorKind::InvalidArgument,
            fmt::format("patch size {} does not match the {}x{} stack", manifest.patch_size, stack.width,
                        stack.height));
    DatasetArchive a;
    a.manifest = manifest;
    a.manifest.stack_kind = to_string(stack.kind);
    a.manifest.stack_seed = stack.seed;
    a.manifest.stack_checksum = stack.checksum();
    a.manifest.recon_mode = to_string(mode);
    a.manifest.sampling_rate = stack.sampling_rate();
    const auto patches = manifest_patches(manifest);
    a.pairs = build_training_set(patches, stack, mode);
    return a;
}

namespace {
constexpr std::uint32_t kArchiveVersion = 1;
constexpr std::size_t kDigestBytes = 32;
}  // namespace

std::vector<std::uint8_t> serialize_archive(const DatasetArchive& archive) {
    ByteWriter w;
    w.magic("GIDS");
    w.u32(kArchiveVersion);
    w.text(archive.manifest.to_text());
    w.u64(archive.pairs.size());
    for (const auto& p : archive.pairs) {
        p.validate();
        w.u32(static_cast<std::uint32_t>(p.width));
        w.u32(static_cast<std::uint32_t>(p.height));
        w.f64(p.sampling_rate);
        w.f32s(p.noisy);
        w.f32s(p.clean);
    }
    const auto hex = sha256_hex(w.bytes());
    for (std::size_t i = 0; i < kDigestBytes; ++i) w.u8(static_cast<std::uint8_t>(std::stoi(hex.substr(2 * i, 2), nullptr, 16)));
    return w.take();
}

DatasetArchive deserialize_archive(std::span<const std::uint8_t> bytes) {
    {
        ByteReader head(bytes);
        head.expect_magic("GIDS");
    }
    if (bytes.size() < 8 + kDigestBytes) fail(ErrorKind::CorruptionError, "dataset archive is truncated");
    const auto body = bytes.first(bytes.size() - kDigestBytes);
    const auto hex = sha256_hex(body);
    for (std::size_t i = 0; i < kDigestBytes; ++i)
        if (bytes[body.size() + i] != static_cast<std::uint8_t>(std::stoi(hex.substr(2 * i, 2), nullptr, 16)))
            fail(ErrorKind::CorruptionError, "dataset archive checksum mismatch");

    ByteReader r(body);
    r.expect_magic("GIDS");
    const auto version = r.u32();
    require(version == kArchiveVersion, ErrorKind::FormatError, fmt::format("unsupported archive version {}", version));
    DatasetArchive a;
    a.manifest = DatasetManifest::from_text(r.text());
    const auto count = r.u64();
    for (std::uint64_t i = 0; i < count; ++i) {
        TrainingPair p;
        p.width = r.u32();
        p.height = r.u32();
        p.sampling_rate = r.f64();
        const std::size_t n = p.width * p.height;
        if (n * 2 * sizeof(float) > r.remaining()) fail(ErrorKind::CorruptionError, "dataset archive is truncated");
        p.noisy.resize(n);
        p.clean.resize(n);
        r.f32s(p.noisy);
        r.f32s(p.clean);
        a.pairs.push_back(std::move(p));
    }
    if (r.remaining() != 0) fail(ErrorKind::CorruptionError, "trailing bytes in dataset archive");
    return a;
}

void save_archive(const fs::path& path, const DatasetArchive& archive) { write_file(path, serialize_archive(archive)); }

DatasetArchive load_archive(const fs::path& path) { return deserialize_archive(read_file(path)); }

std::optional<std::string> stack_mismatch_warning(const DatasetManifest& manifest, const PatternStack& stack) {
    const auto sum = stack.checksum();
    if (manifest.stack_checksum == sum) return std::nullopt;
    return fmt::format("dataset was built with stack {} but training uses stack {}", manifest.stack_checksum, sum);
}

ImagePlane stretch_to_unit_range(const ImagePlane& image) {
    return normalize_for_display(Reconstruction{image.width(), image.height(), {image.pixels().begin(), image.pixels().end()}});
}

ImagePlane synthetic_scene(std::size_t width, std::size_t height, std::uint64_t seed, std::uint64_t index) {
    require(width >= 1 && height >= 1, ErrorKind::InvalidArgument, "scene must be non-empty");
    auto rng = derived_rng(seed, kStreamScene, index);
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
    const double base = uni(0.1, 0.5), gx = uni(-0.2, 0.2), gy = uni(-0.2, 0.2);
    std::vector<double> px(width * height);
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c)
            px[r * width + c] = base + gx * static_cast<double>(c) / width + gy * static_cast<double>(r) / height;
    const int shapes = 2 + static_cast<int>(uniform01(rng) * 4.0);
    for (int s = 0; s < shapes; ++s) {
        const bool disc = uniform01(rng) < 0.5;
        const double value = uni(0.0, 1.0);
        const double cx = uni(0.0, 1.0), cy = uni(0.0, 1.0);
        const double rx = uni(0.08, 0.3), ry = disc ? rx : uni(0.08, 0.3);
        for (std::size_t r = 0; r < height; ++r)
            for (std::size_t c = 0; c < width; ++c) {
                const double x = static_cast<double>(c) / width - cx;
                const double y = static_cast<double>(r) / height - cy;
                const bool inside = disc ? x * x + y * y < rx * rx : std::abs(x) < rx && std::abs(y) < ry;
                if (inside) px[r * width + c] = value;
            }
    }
    return normalize_for_display(Reconstruction{width, height, std::move(px)});
}

std::vector<ImagePlane> synthetic_scenes(std::size_t width, std::size_t height, std::uint64_t seed,
                                         std::size_t count, std::uint64_t first_index) {
    std::vector<ImagePlane> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(synthetic_scene(width, height, seed, first_index + i));
    return out;
}

}  // namespace gi
