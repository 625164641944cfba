#include "holosim/mvs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "holosim/parallel.hpp"
#include "holosim/propagation.hpp"

namespace holosim {

void OpticalSetup::validate() const {
    screen().validate();
    propagation.validate();
    if (threads == 0)
        throw Error{ErrorCode::InvalidArgument, "threads must be at least 1"};
}

void LensSpec::validate() const {
    if (!(focal_length > 0.0))
        throw Error{ErrorCode::ValidationError, "lens focal_length must be positive"};
    if (!(aperture_diameter > 0.0))
        throw Error{ErrorCode::ValidationError, "lens aperture_diameter must be positive"};
}

void ScanSpec::validate(const LensSpec& lens) const {
    if (!(lens.focal_length < chip_distance_min && chip_distance_min < chip_distance_max))
        throw Error{ErrorCode::ValidationError,
                    "scan needs focal_length < chip_distance_min < chip_distance_max"};
}

void Scene::validate() const {
    if (slices.empty())
        throw Error{ErrorCode::ValidationError, "scene needs at least one slice"};

    // Strictly increasing depth within every channel (unassigned slices
    // belong to all channels).
    std::size_t max_channel = 0;
    for (const auto& s : slices)
        if (s.channel)
            max_channel = std::max(max_channel, *s.channel);
    for (std::size_t ch = 0; ch <= max_channel; ++ch) {
        const double* previous = nullptr;
        for (const auto& s : slices) {
            if (s.channel && *s.channel != ch)
                continue;
            if (previous != nullptr && !(s.depth > *previous))
                throw Error{ErrorCode::ValidationError, "depths monotonic: slice depths must strictly increase"};
            previous = &s.depth;
        }
    }

    for (std::size_t i = 0; i < slices.size(); ++i) {
        const auto& s = slices[i];
        const std::string where = "slice " + std::to_string(i) + ": ";
        if (!std::isfinite(s.depth) || !(s.depth < 0.0))
            throw Error{ErrorCode::ValidationError, where + "depth must be negative (projector side of the screen)"};
        if (!(s.extent > 0.0) || !std::isfinite(s.extent))
            throw Error{ErrorCode::ValidationError, where + "extent must be positive"};
        if (s.intensity.width == 0 || s.intensity.height == 0 ||
            s.intensity.pixels.size() != s.intensity.width * s.intensity.height)
            throw Error{ErrorCode::ValidationError, where + "image is empty or malformed"};
        for (double v : s.intensity.pixels)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw Error{ErrorCode::ValidationError, where + "intensities must be non-negative"};
    }
}

Scene Scene::for_channel(std::size_t channel) const {
    Scene out;
    out.name = name;
    for (const auto& s : slices)
        if (!s.channel || *s.channel == channel)
            out.slices.push_back(s);
    return out;
}

double conjugate_distance(const LensSpec& lens, double object_distance) {
    lens.validate();
    const double f = lens.focal_length;
    if (object_distance == f)
        throw Error{ErrorCode::AtFocus, "object at the focal plane images to infinity"};
    if (object_distance < f)
        throw Error{ErrorCode::VirtualImage, "object inside the focal length forms a virtual image"};
    return 1.0 / (1.0 / f - 1.0 / object_distance);
}

double magnification(double object_distance, double image_distance) {
    if (!(object_distance > 0.0) || !(image_distance > 0.0))
        throw Error{ErrorCode::InvalidArgument, "magnification needs positive distances"};
    return -image_distance / object_distance;
}

double scan_to_depth(const LensSpec& lens, double chip_distance) {
    return conjugate_distance(lens, chip_distance);
}

double scan_range_for_depth_interval(const LensSpec& lens, double z_near, double z_far) {
    lens.validate();
    const double f = lens.focal_length;
    if (!(z_near <= z_far))
        throw Error{ErrorCode::InvalidArgument, "z_near must not exceed z_far"};
    if (!(z_near > f))
        throw Error{ErrorCode::DepthTooClose, "z_near must lie beyond the focal length"};
    return f * f * (1.0 / (z_near - f) - 1.0 / (z_far - f));
}

RealField resample_slice(const Slice& slice, const OpticalSetup& setup) {
    const auto geometry = setup.screen();
    geometry.validate();
    const auto& img = slice.intensity;
    if (img.width == 0 || img.height == 0 || img.pixels.size() != img.width * img.height)
        throw Error{ErrorCode::InvalidArgument, "slice image is empty or malformed"};
    const double px = slice.extent / static_cast<double>(img.width);
    const double slice_height = px * static_cast<double>(img.height);
    constexpr double tol = 1e-9;
    if (slice.extent > geometry.width() * (1.0 + tol) || slice_height > geometry.height() * (1.0 + tol))
        throw Error{ErrorCode::ExtentTooLarge, "slice extent exceeds the grid"};

    const double ratio = geometry.pitch / px;
    const double cx = static_cast<double>(img.width / 2);
    const double cy = static_cast<double>(img.height / 2);
    auto to_image = [&](std::size_t i, std::size_t n, double centre) {
        double u = (static_cast<double>(i) - static_cast<double>(n / 2)) * ratio + centre;
        if (std::abs(u - std::round(u)) < tol)
            u = std::round(u);
        return u;
    };

    RealField out{geometry};
    for (std::size_t iy = 0; iy < geometry.ny; ++iy) {
        const double v = to_image(iy, geometry.ny, cy);
        if (v < -0.5 || v >= static_cast<double>(img.height) - 0.5)
            continue;
        const double vc = std::clamp(v, 0.0, static_cast<double>(img.height - 1));
        const auto y0 = static_cast<std::size_t>(vc);
        const std::size_t y1 = std::min(y0 + 1, img.height - 1);
        const double fy = vc - static_cast<double>(y0);
        for (std::size_t ix = 0; ix < geometry.nx; ++ix) {
            const double u = to_image(ix, geometry.nx, cx);
            if (u < -0.5 || u >= static_cast<double>(img.width) - 0.5)
                continue;
            const double uc = std::clamp(u, 0.0, static_cast<double>(img.width - 1));
            const auto x0 = static_cast<std::size_t>(uc);
            const std::size_t x1 = std::min(x0 + 1, img.width - 1);
            const double fx = uc - static_cast<double>(x0);
            const double top = img(x0, y0) * (1.0 - fx) + img(x1, y0) * fx;
            const double bottom = img(x0, y1) * (1.0 - fx) + img(x1, y1) * fx;
            out(ix, iy) = top * (1.0 - fy) + bottom * fy;
        }
    }
    return out;
}

std::uint64_t slice_seed(std::uint64_t run_seed, std::size_t slice_index) noexcept {
    // splitmix64 finalizer over (seed, index)
    std::uint64_t z = run_seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(slice_index) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

ComplexField synthesize_slice_field(const Slice& slice, const OpticalSetup& setup, std::uint64_t diffuse_seed) {
    const auto amplitude = resample_slice(slice, setup);
    auto geometry = amplitude.geometry();
    geometry.plane_z = slice.depth;
    ComplexField field{geometry};
    auto src = amplitude.samples();
    auto dst = field.samples();
    if (!setup.diffuse) {
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] = complex{std::sqrt(src[i]), 0.0};
        return field;
    }
    // One phase per grid pixel in row-major order, independent of the image,
    // so the diffuser is fixed by the seed alone.
    std::mt19937_64 rng{diffuse_seed};
    constexpr double to_unit = 1.0 / 9007199254740992.0; // 2^-53
    for (std::size_t i = 0; i < dst.size(); ++i) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(rng() >> 11) * to_unit;
        dst[i] = std::polar(std::sqrt(src[i]), phase);
    }
    return field;
}

std::vector<ComplexField> slice_screen_fields(const Scene& scene, const OpticalSetup& setup) {
    setup.validate();
    scene.validate();
    std::vector<ComplexField> fields(scene.slices.size());
    parallel_for(scene.slices.size(), setup.threads, [&](std::size_t i) {
        const auto& slice = scene.slices[i];
        auto local = synthesize_slice_field(slice, setup, slice_seed(setup.seed, i));
        fields[i] = angular_spectrum_propagate(local, 0.0 - slice.depth, setup.propagation);
        fields[i].set_plane_z(0.0);
    });
    return fields;
}

ComplexField compose_object_field(const Scene& scene, const OpticalSetup& setup) {
    auto fields = slice_screen_fields(scene, setup);
    ComplexField total{setup.screen()};
    auto dst = total.samples();
    for (const auto& f : fields) {
        auto src = f.samples();
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] += src[i];
    }
    return total;
}

} // namespace holosim
