#pragma once

// Hologram stage: reference wave, interferogram, transmission mask and
// reconstruction of the conjugate real image.

#include <optional>

#include "holosim/field.hpp"
#include "holosim/propagation.hpp"
#include "holosim/setup.hpp"

namespace holosim {

/// Uniform plane reference wave
/// R(x, y) = A_r exp(i (2 pi / lambda)(x sin tilt_x + y sin tilt_y) + i phase_offset).
struct ReferenceSpec {
    double amplitude = 1.0;
    double tilt_x = 0.0;       // rad
    double tilt_y = 0.0;       // rad
    double phase_offset = 0.0; // rad

    void validate() const;
    /// Spatial frequency of the tilt at `wavelength`.
    Carrier carrier(double wavelength) const noexcept;
};

enum class MaskMode { Linear, Binary };

/// Screen transmittance model t = T + beta I. An empty gain means
/// auto-normalization, beta = 1 / max(I).
struct MaskSpec {
    double bias = 0.0;
    std::optional<double> gain;
    MaskMode mode = MaskMode::Linear;
    double binary_threshold = 0.5;

    void validate() const;
    double resolved_gain(const IntensityMap& interferogram) const;
};

struct TransmissionMask {
    RealField transmittance; // every sample in [0, 1], plane_z = 0
    double bias = 0.0;
    double gain = 0.0;
    double max_unclamped = 0.0; // largest T + beta I before clamping
    std::size_t clamped_samples = 0;
};

/// Reference wave sampled on the screen. Throws TiltAliased when the tilt
/// frequency exceeds the grid Nyquist limit 1 / (2 pitch).
ComplexField reference_wave(const ReferenceSpec& ref, const OpticalSetup& setup);

/// I = |O + R|^2. Throws GridMismatch / PlaneMismatch.
IntensityMap interferogram(const ComplexField& object, const ComplexField& reference);

/// Pointwise split of the interferogram:
/// |O|^2 + |R|^2 + 2 A_r A_o cos(phi_r - phi_o) + residual = I.
/// The residual carries the rounding left over so the four maps sum to I.
struct ExpansionTerms {
    RealField object_intensity;
    RealField reference_intensity;
    RealField cross_term;
    RealField residual;
};
ExpansionTerms expansion_terms(const ComplexField& object, const ComplexField& reference);

/// Linear: t = clamp(T + beta I, 0, 1). Binary: t = 1 where
/// I >= threshold * max(I), clamp(T) elsewhere.
TransmissionMask transmission_mask(const IntensityMap& intensity, const MaskSpec& spec);

/// Field at z_out > 0 behind the screen when the mask is lit by the
/// reference: angular-spectrum transport of t(x, y) R(x, y). The tilt is
/// carried analytically so the doubled carrier of the conjugate term is never
/// sampled on the grid.
ComplexField reconstruct(const TransmissionMask& mask, const ReferenceSpec& ref, const OpticalSetup& setup,
                         double z_out);

/// Mask lit by the reference, ready to be evaluated at many viewer-side
/// depths (one inverse transform per plane). `field` and `intensity` are
/// const and safe to call concurrently.
class Reconstruction {
public:
    Reconstruction(const TransmissionMask& mask, const ReferenceSpec& ref, const OpticalSetup& setup);

    ComplexField field(double z_out) const;
    IntensityMap intensity(double z_out) const;

private:
    ReferenceSpec ref_;
    SpectralPropagator propagator_;
};

/// The three terms of (T + beta I) R for the linear, unclamped mask:
///   attenuated_reference = (T + beta (|O|^2 + |R|^2)) R
///   real_image           = beta R^2 O*     (beta A_r^2 O* for phi_r = 0)
///   virtual_image        = beta |R|^2 O    (beta A_r^2 O)
struct TermFields {
    ComplexField attenuated_reference;
    ComplexField real_image;
    ComplexField virtual_image;
};

/// Throws ClampedRegime if T + beta I exceeds 1 anywhere, NonUniformReference
/// if |R| varies over the grid, InvalidArgument for binary masks.
TermFields term_fields(const ComplexField& object, const ComplexField& reference, const MaskSpec& spec);

/// Each term of `term_fields` propagated to z_out > 0. Uses the same carrier
/// frame as `reconstruct`, so the three outputs sum to reconstruct(...) of the
/// linear mask.
TermFields propagate_terms(const ComplexField& object, const ReferenceSpec& ref, const OpticalSetup& setup,
                           const MaskSpec& spec, double z_out);

/// Axis-aligned rectangle on a plane. Pixels with |x - cx| < w/2 (half-open,
/// [cx - w/2, cx + w/2)) and likewise in y are inside.
struct Window {
    double center_x = 0.0; // m
    double center_y = 0.0;
    double width = 0.0;
    double height = 0.0;

    bool contains(double x, double y) const noexcept;
};

/// Reconstruction at z_window zeroed outside the window. Throws
/// WindowOutsideGrid if the window reaches past the grid.
ComplexField viewing_window_field(const TransmissionMask& mask, const ReferenceSpec& ref,
                                  const OpticalSetup& setup, const Window& window, double z_window);

/// Zero every sample outside the window. Throws WindowOutsideGrid.
ComplexField restrict_to_window(const ComplexField& field, const Window& window);

} // namespace holosim
