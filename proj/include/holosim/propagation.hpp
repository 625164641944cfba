#pragma once

#include <memory>

#include "holosim/field.hpp"

namespace holosim {

enum class PropagationMethod { AngularSpectrum, FresnelSingleTransform };

struct PropagationSpec {
    PropagationMethod method = PropagationMethod::AngularSpectrum;
    double distance = 0.0; // m, signed; negative travels toward the projector side
    bool band_limit = true;
    int pad_factor = 2; // 1, 2 or 4

    void validate() const;
};

/// Linear phase ramp exp(i 2 pi (fx x + fy y)) riding on a field. Propagating
/// an envelope in the carrier frame lets tilted illumination be handled
/// without sampling the carrier itself.
struct Carrier {
    double fx = 0.0; // cycles/m
    double fy = 0.0;

    bool is_zero() const noexcept { return fx == 0.0 && fy == 0.0; }
};

/// Angular-spectrum transport between parallel planes.
///
/// The field is zero-padded to pad_factor times its size, multiplied in the
/// frequency domain by exp(i 2 pi d sqrt(1/lambda^2 - fx^2 - fy^2)) and
/// cropped back. Evanescent frequencies are always zeroed; with band_limit
/// the per-axis limit 1 / (lambda sqrt((2 d df)^2 + 1)) also applies. The
/// output has the input grid and plane_z + distance.
ComplexField angular_spectrum_propagate(const ComplexField& field, double distance,
                                        const PropagationSpec& spec = {});

/// Same as angular_spectrum_propagate(field, -distance, spec).
ComplexField back_propagate(const ComplexField& field, double distance, const PropagationSpec& spec = {});

/// Single-transform Fresnel propagation. The output pitch is
/// lambda |distance| / (nx pitch) and is recorded on the result; requires a
/// square grid. Throws ZeroDistance.
ComplexField fresnel_propagate(const ComplexField& field, double distance);

/// Dispatch on spec.method using spec.distance.
ComplexField propagate(const ComplexField& field, const PropagationSpec& spec);

/// Holds the padded spectrum of an envelope so the same source can be
/// evaluated at many distances (one inverse transform per plane).
///
/// With a non-zero carrier the envelope e represents the physical field
/// e * exp(i 2 pi (fx x + fy y)); `at()` returns the propagated envelope in
/// the same frame, i.e. the physical result divided by the carrier ramp.
/// `at()` is const and safe to call concurrently.
class SpectralPropagator {
public:
    SpectralPropagator(const ComplexField& envelope, const PropagationSpec& spec, Carrier carrier = {});
    ~SpectralPropagator();
    SpectralPropagator(SpectralPropagator&&) noexcept;
    SpectralPropagator& operator=(SpectralPropagator&&) noexcept;

    ComplexField at(double distance) const;

    const PlaneGeometry& geometry() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace holosim
