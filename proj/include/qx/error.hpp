#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qx {

enum class ErrorCode {
    invalid_argument,
    not_found,
    unknown_pipeline,
    duplicate,
    parse_error,
    io_error,
    generator_error,
};

inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "invalid_argument";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::unknown_pipeline: return "unknown_pipeline";
        case ErrorCode::duplicate: return "duplicate";
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::io_error: return "io_error";
        case ErrorCode::generator_error: return "generator_error";
    }
    return "unknown";
}

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace qx
