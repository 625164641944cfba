#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace holosim {

enum class ErrorCode {
    InvalidArgument,
    GridMismatch,
    PlaneMismatch,
    ZeroDistance,
    AtFocus,
    VirtualImage,
    DepthTooClose,
    ExtentTooLarge,
    TiltAliased,
    ClampedRegime,
    NonUniformReference,
    WindowOutsideGrid,
    ZeroVariance,
    CarrierAliased,
    EmptyRoi,
    ParseError,
    ValidationError,
    UnsupportedFormat,
    CorruptHeader,
    HeaderMismatch,
    TruncatedPayload,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error{std::string{to_string(code)} + ": " + what}, code_{code}, detail_{what} {}

    ErrorCode code() const noexcept { return code_; }
    /// Message without the code prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

} // namespace holosim
