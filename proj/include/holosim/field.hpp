#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "holosim/error.hpp"

namespace holosim {

using complex = std::complex<double>;

/// Sampling geometry shared by every plane in the pipeline.
///
/// Square pixels of side `pitch`. Pixel index n/2 (integer division) lies on
/// the optical axis, so x(ix) = (ix - nx/2) * pitch. Axial convention: the
/// screen is z = 0, the viewer side is z > 0 and the projector side z < 0.
struct PlaneGeometry {
    std::size_t nx = 0;
    std::size_t ny = 0;
    double pitch = 0.0;      // m
    double wavelength = 0.0; // m
    double plane_z = 0.0;    // m

    void validate() const;

    std::size_t size() const noexcept { return nx * ny; }
    double x(std::size_t ix) const noexcept {
        return (static_cast<double>(ix) - static_cast<double>(nx / 2)) * pitch;
    }
    double y(std::size_t iy) const noexcept {
        return (static_cast<double>(iy) - static_cast<double>(ny / 2)) * pitch;
    }
    double width() const noexcept { return static_cast<double>(nx) * pitch; }
    double height() const noexcept { return static_cast<double>(ny) * pitch; }

    /// Same sample counts, pitch and wavelength (plane_z not compared).
    bool same_grid(const PlaneGeometry& other) const noexcept;

    friend bool operator==(const PlaneGeometry&, const PlaneGeometry&) = default;
};

/// Row-major 2D sample array carrying its physical geometry.
template <class T>
class Plane {
public:
    using value_type = T;

    Plane() = default;
    explicit Plane(const PlaneGeometry& geometry) : geometry_{geometry} {
        geometry_.validate();
        samples_.assign(geometry_.size(), T{});
    }
    Plane(const PlaneGeometry& geometry, std::vector<T> samples)
        : geometry_{geometry}, samples_{std::move(samples)} {
        geometry_.validate();
        if (samples_.size() != geometry_.size())
            throw Error{ErrorCode::GridMismatch, "sample count does not match nx*ny"};
    }

    const PlaneGeometry& geometry() const noexcept { return geometry_; }
    std::size_t nx() const noexcept { return geometry_.nx; }
    std::size_t ny() const noexcept { return geometry_.ny; }
    std::size_t size() const noexcept { return samples_.size(); }
    double pitch() const noexcept { return geometry_.pitch; }
    double wavelength() const noexcept { return geometry_.wavelength; }
    double plane_z() const noexcept { return geometry_.plane_z; }

    T& operator()(std::size_t ix, std::size_t iy) noexcept { return samples_[iy * geometry_.nx + ix]; }
    const T& operator()(std::size_t ix, std::size_t iy) const noexcept {
        return samples_[iy * geometry_.nx + ix];
    }

    std::span<T> samples() noexcept { return samples_; }
    std::span<const T> samples() const noexcept { return samples_; }

    void set_plane_z(double z) noexcept { geometry_.plane_z = z; }

    friend bool operator==(const Plane&, const Plane&) = default;

private:
    PlaneGeometry geometry_{};
    std::vector<T> samples_;
};

/// Complex scalar amplitude on a plane.
using ComplexField = Plane<complex>;
/// Real-valued map on a plane. Used for intensities (all samples >= 0) and
/// for signed quantities such as interference cross terms.
using RealField = Plane<double>;
using IntensityMap = RealField;

enum class CombineOp { Add, Multiply };

/// Sum of |u|^2 * pitch^2.
double power(const ComplexField& field);
ComplexField conjugate(const ComplexField& field);
/// Elementwise add/multiply. Throws GridMismatch / PlaneMismatch.
ComplexField combine(const ComplexField& a, const ComplexField& b, CombineOp op);
ComplexField scale(const ComplexField& field, complex factor);
IntensityMap intensity(const ComplexField& field);
/// Real map promoted to a complex field with zero phase.
ComplexField to_complex(const RealField& map);

void require_same_grid(const PlaneGeometry& a, const PlaneGeometry& b);
void require_same_plane(const PlaneGeometry& a, const PlaneGeometry& b);

/// Relative L2 distance ||a - b|| / ||b|| (absolute when b is zero).
double relative_l2(std::span<const complex> a, std::span<const complex> b);

} // namespace holosim
