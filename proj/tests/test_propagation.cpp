#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "holosim/propagation.hpp"
#include "oracles.hpp"

using namespace holosim;
using oracle::Gen;

namespace {

constexpr double lambda = 532e-9;

ComplexField plane_wave(const PlaneGeometry& g, complex value) {
    ComplexField f{g};
    for (auto& v : f.samples())
        v = value;
    return f;
}

/// Smooth, compactly concentrated field whose spectrum sits well inside
/// the band limit.
ComplexField soft_field(Gen& gen, std::size_t n, double pitch) {
    const auto g = oracle::grid(n, pitch);
    ComplexField f{g};
    const double w = 0.08 * static_cast<double>(n) * pitch;
    for (int blob = 0; blob < 3; ++blob) {
        const double cx = gen.uniform(-0.1, 0.1) * g.width();
        const double cy = gen.uniform(-0.1, 0.1) * g.height();
        const complex a = gen.complex_normal();
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t ix = 0; ix < n; ++ix) {
                const double dx = g.x(ix) - cx;
                const double dy = g.y(iy) - cy;
                f(ix, iy) += a * std::exp(-(dx * dx + dy * dy) / (w * w));
            }
    }
    return f;
}

} // namespace

TEST_CASE("zero distance is an exact copy") {
    Gen gen{21};
    const auto f = gen.field(oracle::grid(32));
    for (int pad : {1, 2, 4}) {
        PropagationSpec spec;
        spec.pad_factor = pad;
        const auto out = angular_spectrum_propagate(f, 0.0, spec);
        CHECK(relative_l2(out.samples(), f.samples()) <= 1e-12);
        CHECK(out.plane_z() == f.plane_z());
        CHECK(relative_l2(back_propagate(f, 0.0, spec).samples(), f.samples()) <= 1e-12);
    }
}

TEST_CASE("matches a direct-DFT angular spectrum") {
    Gen gen{22};
    for (int pad : {1, 2}) {
        for (bool band_limit : {false, true}) {
            const auto f = gen.field(oracle::grid(16, 2e-6));
            for (double z : {3e-4, -1e-3, 0.02}) {
                PropagationSpec spec;
                spec.pad_factor = pad;
                spec.band_limit = band_limit;
                const auto got = angular_spectrum_propagate(f, z, spec);
                const auto want = oracle::naive_angular_spectrum(f, z, pad, band_limit);
                CAPTURE(pad);
                CAPTURE(band_limit);
                CAPTURE(z);
                CHECK(oracle::rel_l2(got, want) <= 1e-11);
                CHECK(got.plane_z() == doctest::Approx(z));
            }
        }
    }
}

TEST_CASE("plane wave keeps its magnitude and advances 2 pi z / lambda") {
    const auto g = oracle::grid(64);
    const auto f = plane_wave(g, {0.7, 0.0});
    PropagationSpec spec;
    spec.pad_factor = 1;
    for (double z : {1e-3, 0.0123456, 0.123456}) {
        const auto out = angular_spectrum_propagate(f, z, spec);
        const long double turns = static_cast<long double>(z) / static_cast<long double>(lambda);
        const double expected =
            static_cast<double>(2.0L * std::numbers::pi_v<long double> * (turns - std::floor(turns)));
        for (const auto& v : out.samples()) {
            CHECK(std::abs(std::abs(v) - 0.7) <= 1e-12);
            CHECK(std::abs(std::remainder(std::arg(v) - expected, 2.0 * std::numbers::pi)) <= 1e-9);
        }
    }
}

TEST_CASE("Gaussian beam width follows w(z)") {
    const double w0 = 0.5e-3;
    const double zr = std::numbers::pi * w0 * w0 / lambda;
    CHECK(zr == doctest::Approx(1.4763123).epsilon(1e-7));
    const auto f = oracle::gaussian(oracle::grid(1024, 8e-6), w0);
    for (double z : {0.5 * zr, zr, 2.0 * zr}) {
        const auto out = angular_spectrum_propagate(f, z);
        const double expected = oracle::gaussian_radius(w0, lambda, z);
        CAPTURE(z);
        CHECK(std::abs(oracle::beam_radius_x(out) / expected - 1.0) < 0.01);
    }
    CHECK(std::abs(oracle::beam_radius_x(angular_spectrum_propagate(f, zr)) / (w0 * std::sqrt(2.0)) - 1.0) < 0.01);
}

TEST_CASE("energy conservation for band-limited fields") {
    Gen gen{23};
    for (int trial = 0; trial < 4; ++trial) {
        const auto f = soft_field(gen, 256, 8e-6);
        const double z = gen.uniform(-0.05, 0.05);
        const auto out = angular_spectrum_propagate(f, z);
        CAPTURE(z);
        CHECK(std::abs(power(out) / power(f) - 1.0) <= 1e-10);
    }
}

TEST_CASE("round trip and semigroup") {
    Gen gen{24};
    for (int trial = 0; trial < 3; ++trial) {
        const auto f = soft_field(gen, 256, 8e-6);
        const double z1 = gen.uniform(0.005, 0.04);
        const double z2 = gen.uniform(-0.03, 0.03);
        const auto forward = angular_spectrum_propagate(f, z1);
        CHECK(relative_l2(back_propagate(forward, z1).samples(), f.samples()) <= 1e-8);
        const auto two_step = angular_spectrum_propagate(forward, z2);
        const auto one_step = angular_spectrum_propagate(f, z1 + z2);
        CHECK(relative_l2(two_step.samples(), one_step.samples()) <= 1e-9);
    }
}

TEST_CASE("linearity") {
    Gen gen{25};
    const auto g = oracle::grid(64);
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = gen.field(g);
        const auto h = gen.field(g);
        const complex a = gen.complex_normal();
        const complex b = gen.complex_normal();
        const double z = gen.uniform(-0.1, 0.1);
        const auto lhs = angular_spectrum_propagate(combine(scale(f, a), scale(h, b), CombineOp::Add), z);
        const auto rhs = combine(scale(angular_spectrum_propagate(f, z), a),
                                 scale(angular_spectrum_propagate(h, z), b), CombineOp::Add);
        CHECK(relative_l2(lhs.samples(), rhs.samples()) <= 1e-12);
    }
}

TEST_CASE("evanescent components are removed") {
    const auto g = oracle::grid(32, 0.2e-6);
    ComplexField f{g};
    const double fx = 14.0 / g.width();
    for (std::size_t iy = 0; iy < g.ny; ++iy)
        for (std::size_t ix = 0; ix < g.nx; ++ix)
            f(ix, iy) = std::polar(1.0, 2.0 * std::numbers::pi * fx * g.x(ix));
    REQUIRE(fx > 1.0 / lambda);
    PropagationSpec spec;
    spec.pad_factor = 1;
    spec.band_limit = false;
    CHECK(power(angular_spectrum_propagate(f, 1e-6, spec)) <= 1e-20 * power(f));
}

TEST_CASE("propagation spec validation") {
    PropagationSpec spec;
    spec.pad_factor = 3;
    CHECK_THROWS_AS(spec.validate(), Error);
    CHECK_THROWS_AS(angular_spectrum_propagate(ComplexField{oracle::grid(8)}, 0.1, spec), Error);
}

TEST_CASE("Fresnel output pitch") {
    const auto g = oracle::grid(1024, 8e-6);
    ComplexField f{g};
    f(512, 512) = 1.0;
    const auto out = fresnel_propagate(f, 0.5);
    CHECK(out.pitch() == doctest::Approx(5.32e-7 * 0.5 / (1024 * 8e-6)).epsilon(1e-12));
    CHECK(out.pitch() == doctest::Approx(32.47e-6).epsilon(1e-3));
    CHECK(out.plane_z() == doctest::Approx(0.5));
    CHECK(fresnel_propagate(f, -0.5).pitch() == doctest::Approx(out.pitch()));
}

TEST_CASE("Fresnel point source gives a uniform-magnitude spherical wave") {
    const auto g = oracle::grid(256, 8e-6);
    ComplexField f{g};
    f(128, 128) = 1.0;
    const auto out = fresnel_propagate(f, 0.3);
    double lo = 1e300;
    double hi = 0.0;
    for (std::size_t iy = 64; iy < 192; ++iy)
        for (std::size_t ix = 64; ix < 192; ++ix) {
            lo = std::min(lo, std::abs(out(ix, iy)));
            hi = std::max(hi, std::abs(out(ix, iy)));
        }
    CHECK(hi / lo < 1.3);
    // |u| = pitch^2 / (lambda z) for a unit sample.
    CHECK(std::abs(out(128, 128)) == doctest::Approx(8e-6 * 8e-6 / (lambda * 0.3)).epsilon(1e-9));
}

TEST_CASE("Fresnel Gaussian waist at 2 z_R") {
    const double w0 = 0.5e-3;
    const double zr = std::numbers::pi * w0 * w0 / lambda;
    const auto f = oracle::gaussian(oracle::grid(1024, 20e-6), w0);
    const auto out = fresnel_propagate(f, 2.0 * zr);
    CHECK(std::abs(oracle::beam_radius_x(out) / (w0 * std::sqrt(5.0)) - 1.0) < 0.02);
    // Paraxial energy bookkeeping: the transform is unitary up to pitch scaling.
    CHECK(power(out) == doctest::Approx(power(f)).epsilon(1e-9));
}

TEST_CASE("Fresnel rejects zero distance and non-square grids") {
    ComplexField f{oracle::grid(16)};
    try {
        fresnel_propagate(f, 0.0);
        FAIL("expected ZeroDistance");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ZeroDistance);
    }
    CHECK_THROWS_AS(fresnel_propagate(ComplexField{PlaneGeometry{16, 8, 8e-6, lambda, 0.0}}, 0.1), Error);
}

TEST_CASE("spectral propagator agrees with direct propagation") {
    Gen gen{26};
    const auto f = soft_field(gen, 128, 8e-6);
    PropagationSpec spec;
    const SpectralPropagator sp{f, spec};
    for (double z : {0.0, 0.01, -0.02, 0.05}) {
        const auto a = sp.at(z);
        const auto b = angular_spectrum_propagate(f, z, spec);
        CHECK(relative_l2(a.samples(), b.samples()) <= 1e-13);
        CHECK(a.plane_z() == b.plane_z());
    }
}

TEST_CASE("carrier frame reproduces direct propagation of a tilted field") {
    Gen gen{27};
    const auto envelope = soft_field(gen, 128, 8e-6);
    const auto& g = envelope.geometry();
    // Carrier on a bin of the padded grid so both routes see the same spectrum.
    const double bin = 1.0 / (2.0 * g.width());
    const Carrier carrier{40.0 * bin, -15.0 * bin};
    ComplexField ramp{g};
    for (std::size_t iy = 0; iy < g.ny; ++iy)
        for (std::size_t ix = 0; ix < g.nx; ++ix)
            ramp(ix, iy) = std::polar(1.0, 2.0 * std::numbers::pi * (carrier.fx * g.x(ix) + carrier.fy * g.y(iy)));
    const auto physical = combine(envelope, ramp, CombineOp::Multiply);
    const double z = 0.01;
    PropagationSpec spec;
    spec.band_limit = false;
    const SpectralPropagator sp{envelope, spec, carrier};
    ramp.set_plane_z(z);
    const auto via_carrier = combine(sp.at(z), ramp, CombineOp::Multiply);
    const auto direct = angular_spectrum_propagate(physical, z, spec);
    CHECK(relative_l2(via_carrier.samples(), direct.samples()) <= 1e-11);
}
