#pragma once

// Batch pipelines behind the command-line subcommands. Every function writes
// its artifacts into `out` (created if missing) and throws holosim::Error,
// prefixed with the failing stage, on failure.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "holosim/metrics.hpp"
#include "holosim/propagation.hpp"
#include "holosim/scene_io.hpp"

namespace holosim {

struct SimulateOptions {
    std::filesystem::path scene;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed; // overrides the scene seed
    bool dump_fields = false;
    unsigned threads = 1;
    bool verbose = false;
};

/// One report per wavelength, in scene order.
std::vector<ReconstructionReport> run_simulate(const SimulateOptions& options);

struct PropagateOptions {
    std::filesystem::path in;
    std::filesystem::path out;
    double distance = 0.0;
    PropagationMethod method = PropagationMethod::AngularSpectrum;
    int pad_factor = 2;
    bool verbose = false;
};

/// Writes propagated.field and propagated.pgm; returns the propagated field.
ComplexField run_propagate(const PropagateOptions& options);

struct MvsDesignOptions {
    double focal_length = 5e-3;
    double z_near = 0.0;
    double z_far = 0.0;
    double screen_width = 1.0;
    double screen_height = 1.0;
    double watch_distance = 1.0;
    std::filesystem::path out;
};

struct MvsDesign {
    double chip_near = 0.0; // chip-to-lens distance imaging to z_near, m
    double chip_far = 0.0;
    double scan_range = 0.0; // m
    bool feasible = false;   // scan_range < 1 cm
    double magnification_near = 0.0;
    double magnification_far = 0.0;
    double solid_angle_sr = 0.0;
    double solid_angle_small_sr = 0.0;
};

/// Pure design arithmetic; throws DepthTooClose when z_near <= f.
MvsDesign mvs_design(const MvsDesignOptions& options);
/// Writes mvs_design.csv and returns the lines printed to stdout.
std::vector<std::string> run_mvs_design(const MvsDesignOptions& options, MvsDesign* result = nullptr);

struct SweepOptions {
    std::filesystem::path scene;
    std::filesystem::path out;
    double z_min = 0.0;
    double z_max = 0.0;
    std::size_t steps = 41;
    unsigned threads = 1;
    bool verbose = false;
};

struct SliceMatch {
    std::size_t slice = 0;
    double depth = 0.0;      // slice depth, projector side
    double expected_z = 0.0; // -depth
    double matched_z = 0.0;  // nearest local maximum (or sweep sample)
    double ncc = 0.0;
};

struct SweepResult {
    FocusResult focus;
    std::vector<std::size_t> maxima;
    std::vector<SliceMatch> slices;
};

/// Depth sweep per wavelength: peak_curve.csv and slice_ncc.csv.
std::vector<SweepResult> run_sweep(const SweepOptions& options);

/// HOLOSIM_THREADS if set to a positive integer, otherwise `fallback`.
unsigned threads_from_environment(unsigned fallback);

} // namespace holosim
