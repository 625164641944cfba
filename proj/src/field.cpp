#include "holosim/field.hpp"

#include <cmath>
#include <string>

namespace holosim {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::PlaneMismatch: return "PlaneMismatch";
    case ErrorCode::ZeroDistance: return "ZeroDistance";
    case ErrorCode::AtFocus: return "AtFocus";
    case ErrorCode::VirtualImage: return "VirtualImage";
    case ErrorCode::DepthTooClose: return "DepthTooClose";
    case ErrorCode::ExtentTooLarge: return "ExtentTooLarge";
    case ErrorCode::TiltAliased: return "TiltAliased";
    case ErrorCode::ClampedRegime: return "ClampedRegime";
    case ErrorCode::NonUniformReference: return "NonUniformReference";
    case ErrorCode::WindowOutsideGrid: return "WindowOutsideGrid";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::CarrierAliased: return "CarrierAliased";
    case ErrorCode::EmptyRoi: return "EmptyRoi";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptHeader: return "CorruptHeader";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

void PlaneGeometry::validate() const {
    if (nx < 2 || ny < 2)
        throw Error{ErrorCode::InvalidArgument, "grid needs nx >= 2 and ny >= 2"};
    if (!(pitch > 0.0) || !std::isfinite(pitch))
        throw Error{ErrorCode::InvalidArgument, "pitch must be positive"};
    if (!(wavelength > 0.0) || !std::isfinite(wavelength))
        throw Error{ErrorCode::InvalidArgument, "wavelength must be positive"};
    if (!std::isfinite(plane_z))
        throw Error{ErrorCode::InvalidArgument, "plane_z must be finite"};
}

bool PlaneGeometry::same_grid(const PlaneGeometry& other) const noexcept {
    return nx == other.nx && ny == other.ny && pitch == other.pitch && wavelength == other.wavelength;
}

void require_same_grid(const PlaneGeometry& a, const PlaneGeometry& b) {
    if (!a.same_grid(b))
        throw Error{ErrorCode::GridMismatch, "operands differ in shape, pitch or wavelength"};
}

void require_same_plane(const PlaneGeometry& a, const PlaneGeometry& b) {
    require_same_grid(a, b);
    if (a.plane_z != b.plane_z)
        throw Error{ErrorCode::PlaneMismatch,
                    "operands lie on different planes (" + std::to_string(a.plane_z) + " vs " +
                        std::to_string(b.plane_z) + ")"};
}

double power(const ComplexField& field) {
    double sum = 0.0;
    for (const auto& u : field.samples())
        sum += std::norm(u);
    return sum * field.pitch() * field.pitch();
}

ComplexField conjugate(const ComplexField& field) {
    ComplexField out{field.geometry()};
    auto src = field.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = std::conj(src[i]);
    return out;
}

ComplexField combine(const ComplexField& a, const ComplexField& b, CombineOp op) {
    require_same_plane(a.geometry(), b.geometry());
    ComplexField out{a.geometry()};
    auto lhs = a.samples();
    auto rhs = b.samples();
    auto dst = out.samples();
    if (op == CombineOp::Add) {
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] = lhs[i] + rhs[i];
    } else {
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] = lhs[i] * rhs[i];
    }
    return out;
}

ComplexField scale(const ComplexField& field, complex factor) {
    ComplexField out{field.geometry()};
    auto src = field.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = src[i] * factor;
    return out;
}

IntensityMap intensity(const ComplexField& field) {
    IntensityMap out{field.geometry()};
    auto src = field.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = std::norm(src[i]);
    return out;
}

ComplexField to_complex(const RealField& map) {
    ComplexField out{map.geometry()};
    auto src = map.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = complex{src[i], 0.0};
    return out;
}

double relative_l2(std::span<const complex> a, std::span<const complex> b) {
    if (a.size() != b.size())
        throw Error{ErrorCode::GridMismatch, "relative_l2 operands differ in length"};
    double diff = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += std::norm(a[i] - b[i]);
        ref += std::norm(b[i]);
    }
    return ref > 0.0 ? std::sqrt(diff / ref) : std::sqrt(diff);
}

} // namespace holosim
