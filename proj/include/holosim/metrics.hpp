#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "holosim/field.hpp"
#include "holosim/rtrh.hpp"

namespace holosim {

struct ReconstructionReport {
    double focus_depth = 0.0; // m
    double focus_x = 0.0;     // m
    double focus_y = 0.0;     // m
    double peak_intensity = 0.0;
    double peak_to_mean = 0.0;
    double ncc = 0.0;
    double speckle_contrast = 0.0;
    double solid_angle_sr = 0.0;
    /// Grouped fractions in [0, 1], keys like "budget.real_image" or "order.plus1".
    std::map<std::string, double> power_fractions;
    /// Run configuration echoed for provenance, keys like "pitch" (written as "config.pitch").
    std::map<std::string, std::string> provenance;

    void validate() const;
};

struct DepthSample {
    double z = 0.0;
    double peak = 0.0;
    double mean = 0.0;
    std::size_t ix = 0;
    std::size_t iy = 0;
};

struct FocusResult {
    double z = 0.0;
    double x = 0.0;
    double y = 0.0;
    std::size_t ix = 0;
    std::size_t iy = 0;
    double peak = 0.0;
    double peak_to_mean = 0.0;
    std::vector<DepthSample> curve; // one entry per swept depth, in order
};

/// Exhaustive depth sweep over `steps` evenly spaced planes in
/// [z_min, z_max] (viewer side). Picks the plane with the largest single-pixel
/// intensity; planes are evaluated on setup.threads workers.
FocusResult focus_search(const TransmissionMask& mask, const ReferenceSpec& ref, const OpticalSetup& setup,
                         double z_min, double z_max, std::size_t steps);

/// Indices of strict interior local maxima of the peak-vs-depth curve.
std::vector<std::size_t> local_maxima(const std::vector<DepthSample>& curve);

/// Pixel of maximum value (first in row-major order on ties).
struct PeakLocation {
    std::size_t ix = 0;
    std::size_t iy = 0;
    double value = 0.0;
    double mean = 0.0;
};
PeakLocation find_peak(const RealField& map);

/// Mean-subtracted normalized cross-correlation in [-1, 1]. Throws
/// ZeroVariance if either input is constant, GridMismatch on length mismatch.
double ncc(std::span<const double> a, std::span<const double> b);
double ncc(const IntensityMap& reconstructed, std::span<const double> ground_truth);

/// Power fractions of the {-1, 0, +1} spectral bands of a plane field.
/// Bands are centred at -c, 0, +c along the carrier axis with half-width c/2;
/// `centroid_*` are the power-weighted mean frequencies (cycles/m, projected on
/// the carrier axis) of each band and `bin` the frequency spacing along it.
struct OrderSpectra {
    double minus1 = 0.0;
    double zero = 0.0;
    double plus1 = 0.0;
    double out_of_band = 0.0;
    double centroid_minus1 = 0.0;
    double centroid_zero = 0.0;
    double centroid_plus1 = 0.0;
    double bin = 0.0;
};
/// Throws CarrierAliased if the carrier reaches the Nyquist limit,
/// InvalidArgument for a zero carrier.
OrderSpectra order_spectra(const ComplexField& plane_field, Carrier carrier);

/// Rectangle of pixels [x0, x0 + width) x [y0, y0 + height).
struct Roi {
    std::size_t x0 = 0;
    std::size_t y0 = 0;
    std::size_t width = 0;
    std::size_t height = 0;
};

/// Standard deviation over mean inside the ROI. Throws EmptyRoi.
double speckle_contrast(const IntensityMap& intensity, const Roi& roi);

/// Exact solid angle of a w x h rectangle seen on-axis from distance d:
/// 4 asin(sin(atan(w / 2d)) sin(atan(h / 2d))).
double solid_angle(double screen_width, double screen_height, double distance);
/// Small-angle estimate w h / d^2.
double solid_angle_small(double screen_width, double screen_height, double distance);

struct PowerBudget {
    double attenuated_reference = 0.0;
    double real_image = 0.0;
    double virtual_image = 0.0;
};
/// power(term) / sum of the three powers. All-zero terms give (0, 0, 0).
PowerBudget power_budget(const TermFields& terms);

/// Fraction of the plane's power inside the window.
double window_capture(const ComplexField& field, const Window& window);

} // namespace holosim
