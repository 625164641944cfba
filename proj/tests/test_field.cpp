#include <doctest.h>

#include "holosim/field.hpp"
#include "oracles.hpp"

using namespace holosim;
using oracle::Gen;

TEST_CASE("power of zero and uniform fields") {
    CHECK(power(ComplexField{oracle::grid(4, 1.0)}) == 0.0);

    ComplexField ones{PlaneGeometry{2, 2, 1.0, 532e-9, 0.0}};
    for (auto& v : ones.samples())
        v = 1.0;
    CHECK(power(ones) == 4.0);
}

TEST_CASE("power matches a double-loop sum") {
    Gen gen{11};
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = gen.field(oracle::grid(64, gen.uniform(1e-6, 1e-5)));
        const double expected = oracle::brute_power(f);
        CHECK(std::abs(power(f) - expected) <= 1e-12 * expected);
    }
}

TEST_CASE("conjugate") {
    Gen gen{12};
    const auto g = oracle::grid(8);

    ComplexField real{g};
    for (auto& v : real.samples())
        v = gen.normal();
    CHECK(conjugate(real) == real);

    ComplexField imag{g};
    for (auto& v : imag.samples())
        v = complex{0.0, 1.0};
    const auto flipped = conjugate(imag);
    for (const auto& v : flipped.samples())
        CHECK(v == complex{0.0, -1.0});

    const auto f = gen.field(g);
    CHECK(conjugate(conjugate(f)) == f);
    CHECK(power(conjugate(f)) == power(f));
}

TEST_CASE("combine identities and elementwise oracle") {
    Gen gen{13};
    const auto g = oracle::grid(8);
    const auto f = gen.field(g);
    ComplexField zero{g};
    ComplexField ones{g};
    for (auto& v : ones.samples())
        v = 1.0;
    CHECK(combine(f, zero, CombineOp::Add) == f);
    CHECK(combine(f, ones, CombineOp::Multiply) == f);

    const auto h = gen.field(g);
    const auto sum = combine(f, h, CombineOp::Add);
    const auto prod = combine(f, h, CombineOp::Multiply);
    for (std::size_t iy = 0; iy < 8; ++iy)
        for (std::size_t ix = 0; ix < 8; ++ix) {
            const complex a = f(ix, iy);
            const complex b = h(ix, iy);
            CHECK(std::abs(sum(ix, iy) - (a + b)) <= 1e-15 * std::abs(a + b) + 1e-300);
            const complex p{a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
            CHECK(std::abs(prod(ix, iy) - p) <= 1e-15 * std::abs(p));
        }
}

TEST_CASE("combine is commutative and keeps metadata") {
    Gen gen{14};
    for (int trial = 0; trial < 20; ++trial) {
        const PlaneGeometry g{gen.index(2, 16), gen.index(2, 16), gen.uniform(1e-6, 1e-4), gen.uniform(4e-7, 7e-7),
                              gen.uniform(-1.0, 1.0)};
        const auto a = gen.field(g);
        const auto b = gen.field(g);
        for (auto op : {CombineOp::Add, CombineOp::Multiply}) {
            const auto ab = combine(a, b, op);
            CHECK(ab == combine(b, a, op));
            CHECK(ab.geometry() == g);
        }
        CHECK(conjugate(a).geometry() == g);
        CHECK(intensity(a).geometry() == g);
        CHECK(scale(a, {0.0, 2.0}).geometry() == g);
    }
}

TEST_CASE("combine rejects mismatched grids and planes") {
    const auto g = oracle::grid(8);
    ComplexField a{g};
    auto other = g;
    other.nx = 9;
    CHECK_THROWS_AS(combine(a, ComplexField{other}, CombineOp::Add), Error);
    try {
        combine(a, ComplexField{other}, CombineOp::Add);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::GridMismatch);
    }
    other = g;
    other.pitch *= 2.0;
    try {
        combine(a, ComplexField{other}, CombineOp::Multiply);
        FAIL("expected GridMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::GridMismatch);
    }
    other = g;
    other.plane_z = 0.1;
    try {
        combine(a, ComplexField{other}, CombineOp::Add);
        FAIL("expected PlaneMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PlaneMismatch);
    }
}

TEST_CASE("geometry validation") {
    CHECK_THROWS_AS(ComplexField(PlaneGeometry{1, 4, 1e-6, 5e-7, 0.0}), Error);
    CHECK_THROWS_AS(ComplexField(PlaneGeometry{4, 4, 0.0, 5e-7, 0.0}), Error);
    CHECK_THROWS_AS(ComplexField(PlaneGeometry{4, 4, 1e-6, -5e-7, 0.0}), Error);
    const PlaneGeometry g{4, 6, 2e-6, 5e-7, 0.0};
    CHECK(g.x(2) == 0.0);
    CHECK(g.y(3) == 0.0);
    CHECK(g.x(0) == doctest::Approx(-4e-6));
}

TEST_CASE("intensity is non-negative and equals |u|^2") {
    Gen gen{15};
    const auto f = gen.field(oracle::grid(16));
    const auto i = intensity(f);
    for (std::size_t k = 0; k < f.size(); ++k) {
        CHECK(i.samples()[k] >= 0.0);
        CHECK(i.samples()[k] == std::norm(f.samples()[k]));
    }
}
