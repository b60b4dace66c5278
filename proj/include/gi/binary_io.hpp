#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gi/error.hpp"

namespace gi {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

/// Append-only little-endian encoder used by every on-disk format.
class ByteWriter {
public:
    void magic(std::string_view tag) { raw(tag.data(), tag.size()); }
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void f32(float v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void text(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    void f32s(std::span<const float> v) { raw(v.data(), v.size_bytes()); }
    void f64s(std::span<const double> v) { raw(v.data(), v.size_bytes()); }
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        bytes_.insert(bytes_.end(), b, b + n);
    }

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

/// Bounds-checked decoder; running past the end raises CorruptionError.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    void expect_magic(std::string_view tag, ErrorKind kind = ErrorKind::FormatError) {
        need(tag.size());
        if (std::memcmp(bytes_.data() + pos_, tag.data(), tag.size()) != 0)
            fail(kind, "bad magic, expected '" + std::string(tag) + "'");
        pos_ += tag.size();
    }
    std::uint8_t u8() { need(1); return bytes_[pos_++]; }
    std::uint32_t u32() { return pod<std::uint32_t>(); }
    std::uint64_t u64() { return pod<std::uint64_t>(); }
    float f32() { return pod<float>(); }
    double f64() { return pod<double>(); }
    std::string text() {
        const auto n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void f32s(std::span<float> out) { copy(out.data(), out.size_bytes()); }
    void f64s(std::span<double> out) { copy(out.data(), out.size_bytes()); }

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    template <class T>
    T pod() {
        T v;
        copy(&v, sizeof v);
        return v;
    }
    void copy(void* dst, std::size_t n) {
        need(n);
        std::memcpy(dst, bytes_.data() + pos_, n);
        pos_ += n;
    }
    void need(std::size_t n) const {
        if (n > bytes_.size() - pos_) fail(ErrorKind::CorruptionError, "truncated input");
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Hex SHA-256 of a byte buffer.
std::string sha256_hex(std::span<const std::uint8_t> bytes);
/// 16-hex-digit identity tag (leading 64 bits of the SHA-256).
std::string short_checksum(std::span<const std::uint8_t> bytes);

}  // namespace gi
