#pragma once

// File formats: PGM slice images and intensity renders, binary field dumps,
// the line-oriented scene file and the report CSV. Grammar and byte layouts
// are documented in docs/formats.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "holosim/field.hpp"
#include "holosim/metrics.hpp"
#include "holosim/mvs.hpp"
#include "holosim/rtrh.hpp"
#include "holosim/setup.hpp"

namespace holosim {

/// Binary PGM (P5), 8- or 16-bit, scaled to [0, 1] by maxval.
/// Throws UnsupportedFormat, CorruptHeader, TruncatedPayload, IoError.
Image read_slice_image(const std::filesystem::path& path);

/// Binary PGM (P5) with maxval 65535 (big-endian samples).
void write_pgm16(const std::filesystem::path& path, std::size_t width, std::size_t height,
                 std::span<const std::uint16_t> pixels);
/// 8-bit variant, used for bundled test images.
void write_pgm8(const std::filesystem::path& path, std::size_t width, std::size_t height,
                std::span<const std::uint8_t> pixels);

enum class ImageScaling { Linear, Log };

/// 16-bit quantization of an intensity map, without writing it.
std::vector<std::uint16_t> quantize_intensity(const IntensityMap& map, ImageScaling scaling);
void write_intensity_image(const IntensityMap& map, const std::filesystem::path& path,
                           ImageScaling scaling = ImageScaling::Linear);

/// Field dump: text header then interleaved re/im float64 samples, row-major.
void write_field(const ComplexField& field, const std::filesystem::path& path);
/// Throws HeaderMismatch, TruncatedPayload, IoError.
ComplexField read_field(const std::filesystem::path& path);

struct SweepSpec {
    double z_min = 0.0;
    double z_max = 0.0;
    std::size_t steps = 41;
};

struct WindowSpec {
    Window window;
    double z = 0.0; // plane of the viewing window, m
};

/// Fully validated scene file with every default resolved.
struct SceneConfig {
    Scene scene;
    std::vector<std::filesystem::path> slice_images; // absolute, one per slice
    OpticalSetup setup;                               // setup.wavelength = wavelengths[0]
    std::vector<double> wavelengths;
    ReferenceSpec reference;
    bool reference_amplitude_auto = false; // A_r set to the RMS object amplitude
    MaskSpec mask;
    std::optional<LensSpec> lens;
    std::optional<ScanSpec> scan;
    SweepSpec sweep;
    std::optional<WindowSpec> window;

    /// Setup for wavelength index `channel`.
    OpticalSetup setup_for(std::size_t channel) const;
};

/// Throws ParseError (with line context) or ValidationError naming the field.
SceneConfig load_scene(const std::filesystem::path& path);
/// Writes every resolved value back in scene-file syntax.
void save_scene(const SceneConfig& config, const std::filesystem::path& path);

/// key,value CSV, one metric per row, fixed row order.
void write_report(const ReconstructionReport& report, const std::filesystem::path& path);
ReconstructionReport read_report(const std::filesystem::path& path);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

} // namespace holosim
