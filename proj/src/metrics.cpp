#include "holosim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fft.hpp"
#include "holosim/parallel.hpp"

namespace holosim {

void ReconstructionReport::validate() const {
    for (const auto& [name, value] : power_fractions)
        if (!(value >= 0.0 && value <= 1.0 + 1e-9))
            throw Error{ErrorCode::ValidationError, "power fraction " + name + " outside [0, 1]"};
    if (!std::isnan(ncc) && !(ncc >= -1.0 && ncc <= 1.0))
        throw Error{ErrorCode::ValidationError, "ncc outside [-1, 1]"};
    if (!std::isnan(speckle_contrast) && !(speckle_contrast >= 0.0))
        throw Error{ErrorCode::ValidationError, "speckle contrast must be non-negative"};
}

PeakLocation find_peak(const RealField& map) {
    PeakLocation peak;
    peak.value = -1.0;
    double sum = 0.0;
    for (std::size_t iy = 0; iy < map.ny(); ++iy)
        for (std::size_t ix = 0; ix < map.nx(); ++ix) {
            const double v = map(ix, iy);
            sum += v;
            if (v > peak.value) {
                peak.value = v;
                peak.ix = ix;
                peak.iy = iy;
            }
        }
    peak.mean = sum / static_cast<double>(map.size());
    return peak;
}

FocusResult focus_search(const TransmissionMask& mask, const ReferenceSpec& ref, const OpticalSetup& setup,
                         double z_min, double z_max, std::size_t steps) {
    if (steps < 2)
        throw Error{ErrorCode::InvalidArgument, "focus search needs at least 2 steps"};
    if (!(z_min > 0.0) || !(z_max > z_min) || !std::isfinite(z_max))
        throw Error{ErrorCode::InvalidArgument, "focus search range must satisfy 0 < z_min < z_max"};

    const Reconstruction reconstruction{mask, ref, setup};
    FocusResult result;
    result.curve.resize(steps);
    const double step = (z_max - z_min) / static_cast<double>(steps - 1);
    parallel_for(steps, setup.threads, [&](std::size_t k) {
        const double z = k + 1 == steps ? z_max : z_min + static_cast<double>(k) * step;
        const auto peak = find_peak(reconstruction.intensity(z));
        result.curve[k] = DepthSample{z, peak.value, peak.mean, peak.ix, peak.iy};
    });

    std::size_t best = 0;
    for (std::size_t k = 1; k < steps; ++k)
        if (result.curve[k].peak > result.curve[best].peak)
            best = k;
    const auto& s = result.curve[best];
    const auto g = setup.screen();
    result.z = s.z;
    result.ix = s.ix;
    result.iy = s.iy;
    result.x = g.x(s.ix);
    result.y = g.y(s.iy);
    result.peak = s.peak;
    result.peak_to_mean = s.mean > 0.0 ? s.peak / s.mean : 0.0;
    return result;
}

std::vector<std::size_t> local_maxima(const std::vector<DepthSample>& curve) {
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k + 1 < curve.size(); ++k)
        if (curve[k].peak > curve[k - 1].peak && curve[k].peak > curve[k + 1].peak)
            out.push_back(k);
    return out;
}

double ncc(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty())
        throw Error{ErrorCode::GridMismatch, "ncc inputs differ in size"};
    const double n = static_cast<double>(a.size());
    double mean_a = 0.0;
    double mean_b = 0.0;
    double scale_a = 0.0;
    double scale_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        mean_a += a[i];
        mean_b += b[i];
        scale_a = std::max(scale_a, std::abs(a[i]));
        scale_b = std::max(scale_b, std::abs(b[i]));
    }
    mean_a /= n;
    mean_b /= n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    // Constant inputs leave only rounding noise in the variance.
    const double floor_a = n * (1e-14 * scale_a) * (1e-14 * scale_a);
    const double floor_b = n * (1e-14 * scale_b) * (1e-14 * scale_b);
    if (saa <= floor_a || sbb <= floor_b)
        throw Error{ErrorCode::ZeroVariance, "ncc input is constant"};
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double ncc(const IntensityMap& reconstructed, std::span<const double> ground_truth) {
    return ncc(reconstructed.samples(), ground_truth);
}

OrderSpectra order_spectra(const ComplexField& plane_field, Carrier carrier) {
    const auto& g = plane_field.geometry();
    const double nyquist = 1.0 / (2.0 * g.pitch);
    if (carrier.is_zero())
        throw Error{ErrorCode::InvalidArgument, "order separation needs a non-zero carrier"};
    if (std::abs(carrier.fx) >= nyquist || std::abs(carrier.fy) >= nyquist)
        throw Error{ErrorCode::CarrierAliased, "carrier at or above the grid Nyquist limit"};

    detail::FftBuffer spectrum{g.ny, g.nx};
    for (std::size_t iy = 0; iy < g.ny; ++iy)
        for (std::size_t ix = 0; ix < g.nx; ++ix)
            spectrum(ix, iy) = plane_field(ix, iy);
    spectrum.forward();

    const double c = std::hypot(carrier.fx, carrier.fy);
    const double ux = carrier.fx / c;
    const double uy = carrier.fy / c;
    const double dfx = 1.0 / (static_cast<double>(g.nx) * g.pitch);
    const double dfy = 1.0 / (static_cast<double>(g.ny) * g.pitch);

    double band_power[3] = {0.0, 0.0, 0.0};
    double band_moment[3] = {0.0, 0.0, 0.0};
    double total = 0.0;
    for (std::size_t r = 0; r < g.ny; ++r) {
        const double fy = static_cast<double>(detail::signed_bin(r, g.ny)) * dfy;
        for (std::size_t col = 0; col < g.nx; ++col) {
            const double fx = static_cast<double>(detail::signed_bin(col, g.nx)) * dfx;
            const double p = std::norm(spectrum(col, r));
            total += p;
            const double u = fx * ux + fy * uy;
            const double band = std::floor(u / c + 0.5); // -1, 0, +1 inside
            if (band < -1.0 || band > 1.0)
                continue;
            const auto b = static_cast<std::size_t>(band + 1.0);
            band_power[b] += p;
            band_moment[b] += p * u;
        }
    }

    OrderSpectra out;
    out.bin = std::abs(ux) >= std::abs(uy) ? dfx : dfy;
    if (total <= 0.0)
        return out;
    out.minus1 = band_power[0] / total;
    out.zero = band_power[1] / total;
    out.plus1 = band_power[2] / total;
    out.out_of_band = std::max(0.0, 1.0 - out.minus1 - out.zero - out.plus1);
    auto centroid = [&](std::size_t b) { return band_power[b] > 0.0 ? band_moment[b] / band_power[b] : 0.0; };
    out.centroid_minus1 = centroid(0);
    out.centroid_zero = centroid(1);
    out.centroid_plus1 = centroid(2);
    return out;
}

double speckle_contrast(const IntensityMap& intensity, const Roi& roi) {
    if (roi.width == 0 || roi.height == 0)
        throw Error{ErrorCode::EmptyRoi, "speckle ROI is empty"};
    if (roi.x0 + roi.width > intensity.nx() || roi.y0 + roi.height > intensity.ny())
        throw Error{ErrorCode::InvalidArgument, "speckle ROI reaches past the grid"};
    const double n = static_cast<double>(roi.width * roi.height);
    double mean = 0.0;
    for (std::size_t iy = roi.y0; iy < roi.y0 + roi.height; ++iy)
        for (std::size_t ix = roi.x0; ix < roi.x0 + roi.width; ++ix)
            mean += intensity(ix, iy);
    mean /= n;
    if (!(mean > 0.0))
        throw Error{ErrorCode::ZeroVariance, "speckle ROI has zero mean intensity"};
    double var = 0.0;
    for (std::size_t iy = roi.y0; iy < roi.y0 + roi.height; ++iy)
        for (std::size_t ix = roi.x0; ix < roi.x0 + roi.width; ++ix) {
            const double d = intensity(ix, iy) - mean;
            var += d * d;
        }
    return std::sqrt(var / n) / mean;
}

double solid_angle(double screen_width, double screen_height, double distance) {
    if (!(screen_width >= 0.0) || !(screen_height >= 0.0) || !(distance > 0.0))
        throw Error{ErrorCode::InvalidArgument, "solid angle needs non-negative sizes and a positive distance"};
    const double sa = std::sin(std::atan(screen_width / (2.0 * distance)));
    const double sb = std::sin(std::atan(screen_height / (2.0 * distance)));
    return 4.0 * std::asin(sa * sb);
}

double solid_angle_small(double screen_width, double screen_height, double distance) {
    if (!(distance > 0.0))
        throw Error{ErrorCode::InvalidArgument, "solid angle needs a positive distance"};
    return screen_width * screen_height / (distance * distance);
}

PowerBudget power_budget(const TermFields& terms) {
    const double p0 = power(terms.attenuated_reference);
    const double p1 = power(terms.real_image);
    const double p2 = power(terms.virtual_image);
    const double total = p0 + p1 + p2;
    if (!(total > 0.0))
        return {};
    return PowerBudget{p0 / total, p1 / total, p2 / total};
}

double window_capture(const ComplexField& field, const Window& window) {
    const double total = power(field);
    if (!(total > 0.0))
        return 0.0;
    return power(restrict_to_window(field, window)) / total;
}

} // namespace holosim
