#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace penaflow {

enum class ErrorCode {
    invalid_argument,
    negative_density,
    shape_outside_box,
    cfl_violation,
    degenerate_gradient,
    outside_band,
    nan_detected,
    empty_state,
    test_not_compactly_supported,
    inadmissible_test,
    unresolved_band,
    io_error,
    schema_violation,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable error code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::negative_density: return "negative_density";
    case ErrorCode::shape_outside_box: return "shape_outside_box";
    case ErrorCode::cfl_violation: return "cfl_violation";
    case ErrorCode::degenerate_gradient: return "degenerate_gradient";
    case ErrorCode::outside_band: return "outside_band";
    case ErrorCode::nan_detected: return "nan_detected";
    case ErrorCode::empty_state: return "empty_state";
    case ErrorCode::test_not_compactly_supported: return "test_not_compactly_supported";
    case ErrorCode::inadmissible_test: return "inadmissible_test";
    case ErrorCode::unresolved_band: return "unresolved_band";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::schema_violation: return "schema_violation";
    }
    return "unknown";
}

} // namespace penaflow
