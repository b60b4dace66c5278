#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gi {

enum class ErrorKind {
    InvalidArgument,
    UnsupportedSize,
    ResourceLimit,
    FormatError,
    CorruptionError,
    PlanError,
    IoError,
    NumericalFailure,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Library-wide exception. Every failure raised by gi carries one of the
/// ErrorKind categories so the CLI can map it to an exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) fail(kind, message);
}

}  // namespace gi
