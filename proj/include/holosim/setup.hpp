#pragma once

#include <cstdint>

#include "holosim/field.hpp"
#include "holosim/propagation.hpp"

namespace holosim {

/// How depth slices combine on the screen. Coherent sums the slice fields;
/// Incoherent treats slices as time-sequential, so each slice forms its own
/// interferogram with the reference and the intensities add.
enum class SliceMode { Coherent, Incoherent };

/// Simulation grid and numerics for one wavelength.
struct OpticalSetup {
    std::size_t nx = 1024;
    std::size_t ny = 1024;
    double pitch = 8e-6;
    double wavelength = 532e-9;
    PropagationSpec propagation{};
    bool diffuse = true;
    std::uint64_t seed = 0;
    SliceMode slice_mode = SliceMode::Coherent;
    unsigned threads = 1;

    /// Geometry of the screen plane (z = 0).
    PlaneGeometry screen() const { return PlaneGeometry{nx, ny, pitch, wavelength, 0.0}; }
    void validate() const;
};

} // namespace holosim
