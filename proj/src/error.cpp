#include "gi/error.hpp"

namespace gi {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::UnsupportedSize: return "unsupported-size";
        case ErrorKind::ResourceLimit: return "resource-limit";
        case ErrorKind::FormatError: return "format-error";
        case ErrorKind::CorruptionError: return "corruption-error";
        case ErrorKind::PlanError: return "plan-error";
        case ErrorKind::IoError: return "io-error";
        case ErrorKind::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, std::string(to_string(kind)) + ": " + message);
}

}  // namespace gi
