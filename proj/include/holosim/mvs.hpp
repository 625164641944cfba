#pragma once

// Micro-volumetric scanning projector: thin-lens conjugate geometry for the
// chip scan and synthesis of the divergent object field at the screen.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "holosim/field.hpp"
#include "holosim/setup.hpp"

namespace holosim {

struct LensSpec {
    double focal_length = 5e-3;      // m
    double aperture_diameter = 4e-3; // m

    void validate() const;
};

/// Chip-to-lens travel range on the object side of the lens.
struct ScanSpec {
    double chip_distance_min = 0.0; // m
    double chip_distance_max = 0.0; // m

    void validate(const LensSpec& lens) const;
};

/// Grayscale image, row-major, values in [0, 1].
struct Image {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;

    double operator()(std::size_t x, std::size_t y) const noexcept { return pixels[y * width + x]; }
    friend bool operator==(const Image&, const Image&) = default;
};

/// One projected 2D image at its (magnified) image-space depth.
struct Slice {
    Image intensity;
    double depth = 0.0;  // m, relative to the screen; projector side is negative
    double extent = 0.0; // m, physical width of the image
    /// Wavelength index this slice belongs to; empty means every wavelength.
    std::optional<std::size_t> channel;
};

struct Scene {
    std::string name;
    std::vector<Slice> slices;

    /// Throws ValidationError naming the violated invariant.
    void validate() const;
    /// Slices that apply to wavelength index `channel`, in order.
    Scene for_channel(std::size_t channel) const;
};

/// Thin-lens conjugate: 1/f = 1/do + 1/di. Throws AtFocus / VirtualImage.
double conjugate_distance(const LensSpec& lens, double object_distance);
/// Signed lateral magnification -di/do.
double magnification(double object_distance, double image_distance);
/// Image depth produced by the chip at `chip_distance` from the lens.
double scan_to_depth(const LensSpec& lens, double chip_distance);
/// Chip travel needed to sweep the image between z_near and z_far:
/// f^2 (1/(z_near - f) - 1/(z_far - f)). Throws DepthTooClose if z_near <= f.
double scan_range_for_depth_interval(const LensSpec& lens, double z_near, double z_far);

/// Slice intensity resampled (bilinear) onto the screen grid, centred on the
/// axis. Pixels outside the slice support are zero. Throws ExtentTooLarge.
RealField resample_slice(const Slice& slice, const OpticalSetup& setup);

/// Field of one slice on its own plane (plane_z = slice.depth): amplitude
/// sqrt(resampled intensity), phase uniform in [0, 2 pi) drawn from
/// `diffuse_seed` when setup.diffuse is set, zero otherwise.
ComplexField synthesize_slice_field(const Slice& slice, const OpticalSetup& setup, std::uint64_t diffuse_seed);

/// Per-slice diffuse seed derived from the run seed.
std::uint64_t slice_seed(std::uint64_t run_seed, std::size_t slice_index) noexcept;

/// Each slice field propagated to the screen plane (z = 0), in scene order.
std::vector<ComplexField> slice_screen_fields(const Scene& scene, const OpticalSetup& setup);

/// Object wave O(x, y) at the screen: ordered coherent sum of the slice
/// fields propagated from their depths to z = 0.
ComplexField compose_object_field(const Scene& scene, const OpticalSetup& setup);

} // namespace holosim
