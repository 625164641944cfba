#include "holosim/rtrh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace holosim {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

void require_viewer_side(double z_out) {
    if (!(z_out > 0.0) || !std::isfinite(z_out))
        throw Error{ErrorCode::InvalidArgument, "reconstruction plane must lie on the viewer side (z > 0)"};
}

// Multiply an envelope by the reference ramp sampled on its own plane.
ComplexField apply_reference(ComplexField envelope, const ReferenceSpec& ref) {
    const auto c = ref.carrier(envelope.wavelength());
    const auto& g = envelope.geometry();
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
        const double y = g.y(iy);
        for (std::size_t ix = 0; ix < g.nx; ++ix) {
            const double phase = two_pi * (c.fx * g.x(ix) + c.fy * y) + ref.phase_offset;
            envelope(ix, iy) *= std::polar(ref.amplitude, phase);
        }
    }
    return envelope;
}

void require_mask_on_screen(const TransmissionMask& mask, const OpticalSetup& setup) {
    require_same_grid(mask.transmittance.geometry(), setup.screen());
    if (mask.transmittance.plane_z() != 0.0)
        throw Error{ErrorCode::PlaneMismatch, "transmission mask must lie on the screen plane"};
}

double max_sample(std::span<const double> values) {
    double m = 0.0;
    for (double v : values)
        m = std::max(m, v);
    return m;
}

} // namespace

void ReferenceSpec::validate() const {
    if (!(amplitude > 0.0) || !std::isfinite(amplitude))
        throw Error{ErrorCode::InvalidArgument, "reference amplitude must be positive"};
    const double half_pi = std::numbers::pi / 2.0;
    if (!(std::abs(tilt_x) < half_pi) || !(std::abs(tilt_y) < half_pi))
        throw Error{ErrorCode::InvalidArgument, "reference tilt must be below pi/2 per axis"};
    if (!std::isfinite(phase_offset))
        throw Error{ErrorCode::InvalidArgument, "reference phase offset must be finite"};
}

Carrier ReferenceSpec::carrier(double wavelength) const noexcept {
    return Carrier{std::sin(tilt_x) / wavelength, std::sin(tilt_y) / wavelength};
}

void MaskSpec::validate() const {
    if (!(bias >= 0.0) || !std::isfinite(bias))
        throw Error{ErrorCode::InvalidArgument, "mask bias must be non-negative"};
    if (gain && (!(*gain >= 0.0) || !std::isfinite(*gain)))
        throw Error{ErrorCode::InvalidArgument, "mask gain must be non-negative"};
    if (!(binary_threshold > 0.0 && binary_threshold < 1.0))
        throw Error{ErrorCode::InvalidArgument, "binary threshold must lie in (0, 1)"};
}

double MaskSpec::resolved_gain(const IntensityMap& interferogram) const {
    if (gain)
        return *gain;
    const double peak = max_sample(interferogram.samples());
    return peak > 0.0 ? 1.0 / peak : 1.0;
}

ComplexField reference_wave(const ReferenceSpec& ref, const OpticalSetup& setup) {
    ref.validate();
    const auto geometry = setup.screen();
    geometry.validate();
    const auto c = ref.carrier(geometry.wavelength);
    const double nyquist = 1.0 / (2.0 * geometry.pitch);
    if (std::abs(c.fx) > nyquist || std::abs(c.fy) > nyquist)
        throw Error{ErrorCode::TiltAliased, "reference tilt frequency exceeds the grid Nyquist limit " +
                                                std::to_string(nyquist) + " cycles/m"};
    ComplexField ones{geometry};
    for (auto& u : ones.samples())
        u = complex{1.0, 0.0};
    return apply_reference(std::move(ones), ref);
}

IntensityMap interferogram(const ComplexField& object, const ComplexField& reference) {
    require_same_plane(object.geometry(), reference.geometry());
    IntensityMap out{object.geometry()};
    auto o = object.samples();
    auto r = reference.samples();
    auto dst = out.samples();
    for (std::size_t i = 0; i < dst.size(); ++i)
        dst[i] = std::norm(o[i] + r[i]);
    return out;
}

ExpansionTerms expansion_terms(const ComplexField& object, const ComplexField& reference) {
    const auto total = interferogram(object, reference);
    const auto& g = object.geometry();
    ExpansionTerms terms{RealField{g}, RealField{g}, RealField{g}, RealField{g}};
    auto o = object.samples();
    auto r = reference.samples();
    auto it = total.samples();
    for (std::size_t i = 0; i < it.size(); ++i) {
        const double oi = std::norm(o[i]);
        const double ri = std::norm(r[i]);
        const double cross = 2.0 * std::abs(r[i]) * std::abs(o[i]) * std::cos(std::arg(r[i]) - std::arg(o[i]));
        terms.object_intensity.samples()[i] = oi;
        terms.reference_intensity.samples()[i] = ri;
        terms.cross_term.samples()[i] = cross;
        terms.residual.samples()[i] = it[i] - oi - ri - cross;
    }
    return terms;
}

TransmissionMask transmission_mask(const IntensityMap& intensity, const MaskSpec& spec) {
    spec.validate();
    for (double v : intensity.samples())
        if (!(v >= 0.0))
            throw Error{ErrorCode::InvalidArgument, "interferogram samples must be non-negative"};

    TransmissionMask mask{RealField{intensity.geometry()}, spec.bias, spec.resolved_gain(intensity), 0.0, 0};
    auto src = intensity.samples();
    auto dst = mask.transmittance.samples();
    double max_raw = -1.0;

    if (spec.mode == MaskMode::Linear) {
        for (std::size_t i = 0; i < src.size(); ++i) {
            const double raw = mask.bias + mask.gain * src[i];
            max_raw = std::max(max_raw, raw);
            const double t = std::clamp(raw, 0.0, 1.0);
            if (t != raw)
                ++mask.clamped_samples;
            dst[i] = t;
        }
    } else {
        const double threshold = spec.binary_threshold * max_sample(src);
        const double floor_value = std::clamp(mask.bias, 0.0, 1.0);
        for (std::size_t i = 0; i < src.size(); ++i) {
            const double raw = src[i] >= threshold ? 1.0 : mask.bias;
            max_raw = std::max(max_raw, raw);
            if (raw > 1.0)
                ++mask.clamped_samples;
            dst[i] = src[i] >= threshold ? 1.0 : floor_value;
        }
    }
    mask.max_unclamped = max_raw;
    return mask;
}

namespace {

ComplexField checked_envelope(const TransmissionMask& mask, const ReferenceSpec& ref, const OpticalSetup& setup) {
    ref.validate();
    setup.validate();
    require_mask_on_screen(mask, setup);
    return to_complex(mask.transmittance);
}

} // namespace

Reconstruction::Reconstruction(const TransmissionMask& mask, const ReferenceSpec& ref, const OpticalSetup& setup)
    : ref_{ref}, propagator_{checked_envelope(mask, ref, setup), setup.propagation, ref.carrier(setup.wavelength)} {}

ComplexField Reconstruction::field(double z_out) const {
    require_viewer_side(z_out);
    return apply_reference(propagator_.at(z_out), ref_);
}

IntensityMap Reconstruction::intensity(double z_out) const {
    require_viewer_side(z_out);
    auto out = holosim::intensity(propagator_.at(z_out));
    const double a2 = ref_.amplitude * ref_.amplitude;
    for (auto& v : out.samples())
        v *= a2;
    return out;
}

ComplexField reconstruct(const TransmissionMask& mask, const ReferenceSpec& ref, const OpticalSetup& setup,
                         double z_out) {
    require_viewer_side(z_out);
    return Reconstruction{mask, ref, setup}.field(z_out);
}

namespace {

struct TermEnvelopes {
    ComplexField attenuated_reference; // T + beta (|O|^2 + |R|^2)
    ComplexField real_image;           // beta R O*
    ComplexField virtual_image;        // beta R* O
};

TermEnvelopes term_envelopes(const ComplexField& object, const ComplexField& reference, const MaskSpec& spec) {
    spec.validate();
    require_same_plane(object.geometry(), reference.geometry());
    if (spec.mode != MaskMode::Linear)
        throw Error{ErrorCode::InvalidArgument, "term decomposition needs a linear mask"};

    auto r = reference.samples();
    double r_min = std::abs(r[0]);
    double r_max = r_min;
    for (const auto& v : r) {
        r_min = std::min(r_min, std::abs(v));
        r_max = std::max(r_max, std::abs(v));
    }
    if (r_max - r_min > 1e-9 * r_max)
        throw Error{ErrorCode::NonUniformReference, "term decomposition needs a uniform-amplitude reference"};

    const auto total = interferogram(object, reference);
    const double beta = spec.resolved_gain(total);
    const double raw_max = spec.bias + beta * max_sample(total.samples());
    if (raw_max > 1.0 + 1e-12)
        throw Error{ErrorCode::ClampedRegime,
                    "T + beta I reaches " + std::to_string(raw_max) + " > 1; the mask is clamped"};

    const auto& g = object.geometry();
    TermEnvelopes env{ComplexField{g}, ComplexField{g}, ComplexField{g}};
    auto o = object.samples();
    for (std::size_t i = 0; i < o.size(); ++i) {
        env.attenuated_reference.samples()[i] = complex{spec.bias + beta * (std::norm(o[i]) + std::norm(r[i])), 0.0};
        env.real_image.samples()[i] = beta * r[i] * std::conj(o[i]);
        env.virtual_image.samples()[i] = beta * std::conj(r[i]) * o[i];
    }
    return env;
}

} // namespace

TermFields term_fields(const ComplexField& object, const ComplexField& reference, const MaskSpec& spec) {
    auto env = term_envelopes(object, reference, spec);
    return TermFields{combine(env.attenuated_reference, reference, CombineOp::Multiply),
                      combine(env.real_image, reference, CombineOp::Multiply),
                      combine(env.virtual_image, reference, CombineOp::Multiply)};
}

TermFields propagate_terms(const ComplexField& object, const ReferenceSpec& ref, const OpticalSetup& setup,
                           const MaskSpec& spec, double z_out) {
    require_viewer_side(z_out);
    const auto reference = reference_wave(ref, setup);
    auto env = term_envelopes(object, reference, spec);
    const auto carrier = ref.carrier(setup.wavelength);
    auto carry = [&](const ComplexField& e) {
        return apply_reference(SpectralPropagator{e, setup.propagation, carrier}.at(z_out), ref);
    };
    return TermFields{carry(env.attenuated_reference), carry(env.real_image), carry(env.virtual_image)};
}

bool Window::contains(double x, double y) const noexcept {
    return x >= center_x - width / 2.0 && x < center_x + width / 2.0 && y >= center_y - height / 2.0 &&
           y < center_y + height / 2.0;
}

ComplexField restrict_to_window(const ComplexField& field, const Window& window) {
    if (!(window.width >= 0.0) || !(window.height >= 0.0))
        throw Error{ErrorCode::InvalidArgument, "window size must be non-negative"};
    const auto& g = field.geometry();
    const double half_pixel = g.pitch / 2.0;
    const double tol = 1e-9 * g.pitch;
    const double x_lo = g.x(0) - half_pixel - tol;
    const double x_hi = g.x(g.nx - 1) + half_pixel + tol;
    const double y_lo = g.y(0) - half_pixel - tol;
    const double y_hi = g.y(g.ny - 1) + half_pixel + tol;
    if (window.center_x - window.width / 2.0 < x_lo || window.center_x + window.width / 2.0 > x_hi ||
        window.center_y - window.height / 2.0 < y_lo || window.center_y + window.height / 2.0 > y_hi)
        throw Error{ErrorCode::WindowOutsideGrid, "viewing window reaches past the simulation grid"};

    ComplexField out{g};
    for (std::size_t iy = 0; iy < g.ny; ++iy)
        for (std::size_t ix = 0; ix < g.nx; ++ix)
            if (window.contains(g.x(ix), g.y(iy)))
                out(ix, iy) = field(ix, iy);
    return out;
}

ComplexField viewing_window_field(const TransmissionMask& mask, const ReferenceSpec& ref,
                                  const OpticalSetup& setup, const Window& window, double z_window) {
    return restrict_to_window(reconstruct(mask, ref, setup, z_window), window);
}

} // namespace holosim
