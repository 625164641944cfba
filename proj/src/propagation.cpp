#include "holosim/propagation.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "fft.hpp"

namespace holosim {

using detail::FftBuffer;
using detail::signed_bin;

void PropagationSpec::validate() const {
    if (pad_factor != 1 && pad_factor != 2 && pad_factor != 4)
        throw Error{ErrorCode::InvalidArgument, "pad_factor must be 1, 2 or 4"};
    if (!std::isfinite(distance))
        throw Error{ErrorCode::InvalidArgument, "propagation distance must be finite"};
}

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Per-axis absolute frequencies (carrier included) and band-limit pass flags.
struct AxisFrequencies {
    std::vector<double> f;
    std::vector<char> pass;
};

AxisFrequencies axis_frequencies(std::size_t n, double pitch, double carrier, double distance,
                                 double wavelength, bool band_limit) {
    AxisFrequencies axis;
    axis.f.resize(n);
    axis.pass.resize(n);
    const double df = 1.0 / (static_cast<double>(n) * pitch);
    double limit = std::numeric_limits<double>::infinity();
    if (band_limit) {
        const double s = 2.0 * std::abs(distance) * df;
        limit = 1.0 / (wavelength * std::sqrt(s * s + 1.0));
    }
    for (std::size_t m = 0; m < n; ++m) {
        axis.f[m] = static_cast<double>(signed_bin(m, n)) * df + carrier;
        axis.pass[m] = std::abs(axis.f[m]) <= limit ? 1 : 0;
    }
    return axis;
}

void apply_transfer_function(FftBuffer& spectrum, double pitch, double wavelength, double distance,
                             bool band_limit, Carrier carrier) {
    const auto fx = axis_frequencies(spectrum.cols(), pitch, carrier.fx, distance, wavelength, band_limit);
    const auto fy = axis_frequencies(spectrum.rows(), pitch, carrier.fy, distance, wavelength, band_limit);
    const double inv_l2 = 1.0 / (wavelength * wavelength);
    const double scale = 1.0 / static_cast<double>(spectrum.size());
    for (std::size_t r = 0; r < spectrum.rows(); ++r) {
        const double fy2 = fy.f[r] * fy.f[r];
        for (std::size_t c = 0; c < spectrum.cols(); ++c) {
            auto& s = spectrum(c, r);
            const double arg = inv_l2 - fx.f[c] * fx.f[c] - fy2;
            if (arg <= 0.0 || !fx.pass[c] || !fy.pass[r]) {
                s = complex{};
                continue;
            }
            const double phase = two_pi * distance * std::sqrt(arg);
            s *= complex{std::cos(phase) * scale, std::sin(phase) * scale};
        }
    }
}

} // namespace

struct SpectralPropagator::Impl {
    PlaneGeometry geometry;
    PropagationSpec spec;
    Carrier carrier;
    std::size_t offset_x = 0;
    std::size_t offset_y = 0;
    ComplexField envelope; // kept for the exact distance-0 identity
    FftBuffer spectrum;

    Impl(const ComplexField& field, const PropagationSpec& s, Carrier c)
        : geometry{field.geometry()}, spec{s}, carrier{c}, envelope{field},
          spectrum{field.ny() * static_cast<std::size_t>(s.pad_factor),
                   field.nx() * static_cast<std::size_t>(s.pad_factor)} {
        offset_x = (spectrum.cols() - geometry.nx) / 2;
        offset_y = (spectrum.rows() - geometry.ny) / 2;
        for (std::size_t iy = 0; iy < geometry.ny; ++iy)
            for (std::size_t ix = 0; ix < geometry.nx; ++ix)
                spectrum(ix + offset_x, iy + offset_y) = field(ix, iy);
        spectrum.forward();
    }
};

SpectralPropagator::SpectralPropagator(const ComplexField& envelope, const PropagationSpec& spec,
                                       Carrier carrier) {
    spec.validate();
    envelope.geometry().validate();
    impl_ = std::make_unique<Impl>(envelope, spec, carrier);
}

SpectralPropagator::~SpectralPropagator() = default;
SpectralPropagator::SpectralPropagator(SpectralPropagator&&) noexcept = default;
SpectralPropagator& SpectralPropagator::operator=(SpectralPropagator&&) noexcept = default;

const PlaneGeometry& SpectralPropagator::geometry() const noexcept { return impl_->geometry; }

ComplexField SpectralPropagator::at(double distance) const {
    if (!std::isfinite(distance))
        throw Error{ErrorCode::InvalidArgument, "propagation distance must be finite"};
    if (distance == 0.0)
        return impl_->envelope;

    const auto& g = impl_->geometry;
    FftBuffer work{impl_->spectrum.rows(), impl_->spectrum.cols()};
    std::copy(impl_->spectrum.data().begin(), impl_->spectrum.data().end(), work.data().begin());
    apply_transfer_function(work, g.pitch, g.wavelength, distance, impl_->spec.band_limit, impl_->carrier);
    work.inverse();

    PlaneGeometry out_geometry = g;
    out_geometry.plane_z = g.plane_z + distance;
    ComplexField out{out_geometry};
    for (std::size_t iy = 0; iy < g.ny; ++iy)
        for (std::size_t ix = 0; ix < g.nx; ++ix)
            out(ix, iy) = work(ix + impl_->offset_x, iy + impl_->offset_y);
    return out;
}

ComplexField angular_spectrum_propagate(const ComplexField& field, double distance, const PropagationSpec& spec) {
    spec.validate();
    if (distance == 0.0)
        return field;
    return SpectralPropagator{field, spec}.at(distance);
}

ComplexField back_propagate(const ComplexField& field, double distance, const PropagationSpec& spec) {
    return angular_spectrum_propagate(field, -distance, spec);
}

ComplexField fresnel_propagate(const ComplexField& field, double distance) {
    if (distance == 0.0)
        throw Error{ErrorCode::ZeroDistance, "single-transform Fresnel needs a non-zero distance"};
    if (!std::isfinite(distance))
        throw Error{ErrorCode::InvalidArgument, "propagation distance must be finite"};
    const auto& g = field.geometry();
    if (g.nx != g.ny)
        throw Error{ErrorCode::InvalidArgument, "single-transform Fresnel needs a square grid"};

    const std::size_t n = g.nx;
    const std::size_t c = n / 2;
    const double lz = g.wavelength * distance;
    const double out_pitch = g.wavelength * std::abs(distance) / (static_cast<double>(n) * g.pitch);

    // Input chirp, then a centred DFT: the origin pixel c is rolled to index 0.
    FftBuffer work{n, n};
    for (std::size_t iy = 0; iy < n; ++iy) {
        const double y = g.y(iy);
        for (std::size_t ix = 0; ix < n; ++ix) {
            const double x = g.x(ix);
            const double phase = std::numbers::pi * (x * x + y * y) / lz;
            work((ix + n - c) % n, (iy + n - c) % n) = field(ix, iy) * std::polar(1.0, phase);
        }
    }
    if (distance > 0.0)
        work.forward();
    else
        work.inverse();

    PlaneGeometry out_geometry = g;
    out_geometry.pitch = out_pitch;
    out_geometry.plane_z = g.plane_z + distance;
    ComplexField out{out_geometry};

    const double k = two_pi / g.wavelength;
    const complex prefactor =
        std::polar(1.0, k * distance) / complex{0.0, lz} * (g.pitch * g.pitch);
    for (std::size_t iy = 0; iy < n; ++iy) {
        const double y = out_geometry.y(iy);
        for (std::size_t ix = 0; ix < n; ++ix) {
            const double x = out_geometry.x(ix);
            const double phase = std::numbers::pi * (x * x + y * y) / lz;
            out(ix, iy) = prefactor * std::polar(1.0, phase) * work((ix + n - c) % n, (iy + n - c) % n);
        }
    }
    return out;
}

ComplexField propagate(const ComplexField& field, const PropagationSpec& spec) {
    spec.validate();
    if (spec.method == PropagationMethod::FresnelSingleTransform)
        return fresnel_propagate(field, spec.distance);
    return angular_spectrum_propagate(field, spec.distance, spec);
}

} // namespace holosim
