// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

#include "holosim/metrics.hpp"
#include "holosim/mvs.hpp"
#include "holosim/propagation.hpp"
#include "holosim/rtrh.hpp"
#include "holosim/scene_io.hpp"
#include "oracles.hpp"

using namespace holosim;
namespace fs = std::filesystem;

namespace {

constexpr double lambda = 532e-9;
constexpr double pi = std::numbers::pi;
const fs::path work = fs::temp_directory_path() / "holosim_acceptance";
const fs::path scenes = fs::path{HOLOSIM_DATA_DIR} / "scenes";

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in{p, std::ios::binary};
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string{HOLOSIM_CLI} + " " + args + " >/dev/null 2>" + (work / "stderr.txt").string();
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::map<std::string, std::string> csv_map(const fs::path& p) {
    std::map<std::string, std::string> m;
    std::istringstream in{slurp(p)};
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line))
        m[line.substr(0, line.find(','))] = line.substr(line.find(',') + 1);
    return m;
}

OpticalSetup setup_for(std::size_t n, double pitch) {
    OpticalSetup s;
    s.nx = n;
    s.ny = n;
    s.pitch = pitch;
    s.wavelength = lambda;
    s.diffuse = false;
    return s;
}

ComplexField point_object(const OpticalSetup& s, double depth) {
    return compose_object_field(Scene{"point", {Slice{Image{1, 1, {1.0}}, depth, s.pitch, {}}}}, s);
}

double rms(const ComplexField& f) {
    double sum = 0.0;
    for (const auto& v : f.samples())
        sum += std::norm(v);
    return std::sqrt(sum / static_cast<double>(f.size()));
}

ComplexField soft_field(oracle::Gen& gen, std::size_t n, double pitch) {
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

Outcome scan_amplification() {
    const auto out = work / "ac1";
    if (cli("mvs-design --focal 5e-3 --znear 0.1 --zfar 5 --screen 1x1 --watch 1 --out " + q(out)) != 0)
        return {false, "mvs-design exited non-zero"};
    const auto m = csv_map(out / "mvs_design.csv");
    const double scan = std::stod(m.at("scan_range"));
    const double f = 5e-3;
    const double closed = 1.0 / (1.0 / f - 1.0 / 0.1) - 1.0 / (1.0 / f - 1.0 / 5.0);
    const double mm = scan * 1e3;
    const bool rounds = fmt("%.5g", mm) == "0.25815";
    const bool pass = std::abs(scan - closed) * 1e3 <= 1e-6 && rounds && m.at("scan_below_1cm") == "PASS";
    return {pass, fmt("scan range %.7f mm (closed form %.7f mm), flag %s", mm, closed * 1e3,
                      m.at("scan_below_1cm").c_str())};
}

Outcome solid_angle_claim() {
    const double exact = solid_angle(1.0, 1.0, 1.0);
    const double small = solid_angle_small(1.0, 1.0, 1.0);
    const bool pass = std::abs(exact - 0.79721) <= 1e-4 && small == 1.0;
    return {pass, fmt("solid_angle(1,1,1) = %.7f sr, expected 0.79721 +/- 1e-4; small-angle A/d^2 = %.1f", exact,
                      small)};
}

Outcome interference_identity() {
    oracle::Gen gen{1001};
    const auto g = oracle::grid(128);
    double worst = 0.0;
    for (int pair = 0; pair < 100; ++pair) {
        const auto o = gen.field(g);
        const auto r = gen.field(g);
        const auto i = interferogram(o, r);
        for (std::size_t k = 0; k < i.size(); ++k) {
            const std::complex<long double> ov{o.samples()[k].real(), o.samples()[k].imag()};
            const std::complex<long double> rv{r.samples()[k].real(), r.samples()[k].imag()};
            const long double expanded = std::norm(ov) + std::norm(rv) + 2.0L * (ov * std::conj(rv)).real();
            worst = std::max(worst, static_cast<double>(std::abs(i.samples()[k] - expanded) / expanded));
        }
    }
    return {worst <= 1e-12, fmt("100 pairs at 128^2, worst relative deviation %.2e", worst)};
}

Outcome term_behaviour() {
    oracle::Gen gen{1002};
    const auto small = setup_for(128, 8e-6);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const auto o = gen.field(small.screen());
        ReferenceSpec ref{gen.uniform(0.5, 2.0), gen.uniform(-0.02, 0.02), gen.uniform(-0.02, 0.02),
                          gen.uniform(0.0, 6.0)};
        const auto r = reference_wave(ref, small);
        const MaskSpec spec{gen.uniform(0.0, 0.2), {}, MaskMode::Linear, 0.5};
        MaskSpec scaled = spec;
        const auto hologram = interferogram(o, r);
        double peak = 0.0;
        for (double v : hologram.samples())
            peak = std::max(peak, v);
        scaled.gain = (1.0 - spec.bias) / peak;
        const auto terms = term_fields(o, r, scaled);
        const auto mask = transmission_mask(hologram, scaled);
        double num = 0.0;
        double den = 0.0;
        for (std::size_t k = 0; k < o.size(); ++k) {
            const complex sum = terms.attenuated_reference.samples()[k] + terms.real_image.samples()[k] +
                                terms.virtual_image.samples()[k];
            const complex want = mask.transmittance.samples()[k] * r.samples()[k];
            num = std::max(num, std::abs(sum - want));
            den = std::max(den, std::abs(want));
        }
        worst = std::max(worst, num / den);
    }

    const auto s = setup_for(2048, 4e-6);
    const auto o = point_object(s, -0.2);
    ReferenceSpec ref;
    ref.amplitude = rms(o);
    const auto terms = propagate_terms(o, ref, s, MaskSpec{}, 0.2);
    const auto real = find_peak(intensity(terms.real_image));
    const auto virt = find_peak(intensity(terms.virtual_image));
    const double real_ratio = real.value / real.mean;
    const double virt_ratio = virt.value / virt.mean;
    const bool pass = worst <= 1e-12 && real_ratio > 50.0 && virt_ratio < 5.0;
    return {pass, fmt("term sum deviation %.2e; at +0.2 m on 2048^2: real-image peak/mean %.1f, virtual %.2f", worst,
                      real_ratio, virt_ratio)};
}

Outcome end_to_end() {
    const auto out = work / "ac5";
    fs::remove_all(out);
    if (cli("simulate --scene " + q(scenes / "point_source.scene") + " --out " + q(out)) != 0)
        return {false, "simulate exited non-zero: " + slurp(work / "stderr.txt")};
    const auto r = read_report(out / "report.csv");
    const double step = (0.3 - 0.1) / 40.0;
    const double pitch = 4e-6;
    const bool pass =
        std::abs(r.focus_depth - 0.2) <= step && std::abs(r.focus_x) <= pitch && std::abs(r.focus_y) <= pitch;
    return {pass, fmt("z* = %.4f m, xy* = (%.1f, %.1f) um, peak/mean %.0f", r.focus_depth, r.focus_x * 1e6,
                      r.focus_y * 1e6, r.peak_to_mean)};
}

Outcome propagation_physics() {
    oracle::Gen gen{1006};
    double energy = 0.0;
    double round_trip = 0.0;
    double semigroup = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const auto f = soft_field(gen, 256, 8e-6);
        const double z1 = gen.uniform(0.005, 0.04);
        const double z2 = gen.uniform(-0.03, 0.03);
        const auto forward = angular_spectrum_propagate(f, z1);
        energy = std::max(energy, std::abs(power(forward) / power(f) - 1.0));
        round_trip = std::max(round_trip, relative_l2(back_propagate(forward, z1).samples(), f.samples()));
        semigroup = std::max(semigroup, relative_l2(angular_spectrum_propagate(forward, z2).samples(),
                                                    angular_spectrum_propagate(f, z1 + z2).samples()));
    }
    const double w0 = 0.5e-3;
    const double zr = pi * w0 * w0 / lambda;
    const auto beam = oracle::gaussian(oracle::grid(1024, 8e-6), w0);
    double width = 0.0;
    for (double z : {0.5 * zr, zr, 2.0 * zr}) {
        const auto out = angular_spectrum_propagate(beam, z);
        width = std::max(width, std::abs(oracle::beam_radius_x(out) / oracle::gaussian_radius(w0, lambda, z) - 1.0));
    }
    const bool pass = energy <= 1e-10 && round_trip <= 1e-8 && semigroup <= 1e-9 && width < 0.01;
    return {pass, fmt("energy %.1e, round trip %.1e, semigroup %.1e, Gaussian width %.2f%%", energy, round_trip,
                      semigroup, width * 100.0)};
}

Outcome zone_plate() {
    const auto s = setup_for(2048, 4e-6);
    const double z = 0.2;
    const auto o = point_object(s, -z);
    ReferenceSpec ref;
    ref.amplitude = std::abs(o(1024, 1024));
    ref.phase_offset = std::arg(o(1024, 1024));
    const auto i = interferogram(o, reference_wave(ref, s));
    const double r1 = std::sqrt(2.0 * lambda * z);
    std::size_t best = 1024;
    for (std::size_t ix = 1024; ix < 2048; ++ix) {
        const double x = s.screen().x(ix);
        if (x > std::sqrt(lambda * z) && x < std::sqrt(3.0 * lambda * z) && i(ix, 1024) > i(best, 1024))
            best = ix;
    }
    const double measured = s.screen().x(best);
    return {std::abs(measured - r1) <= s.pitch,
            fmt("first bright ring at %.4f mm, sqrt(2 lambda z) = %.4f mm, pitch 4 um", measured * 1e3, r1 * 1e3)};
}

Outcome order_separation() {
    const auto s = setup_for(512, 4e-6);
    const auto o = point_object(s, -0.2);
    ReferenceSpec ref;
    ref.amplitude = rms(o);
    ref.tilt_x = 2.0 * pi / 180.0;
    const auto mask = transmission_mask(interferogram(o, reference_wave(ref, s)), MaskSpec{});
    const double c = std::sin(2.0 * pi / 180.0) / lambda;
    const auto orders = order_spectra(to_complex(mask.transmittance), Carrier{c, 0.0});
    const bool centred = std::abs(orders.centroid_plus1 - c) <= orders.bin &&
                         std::abs(orders.centroid_minus1 + c) <= orders.bin;

    const auto g = oracle::grid(512, 4e-6);
    ComplexField fringes{g};
    for (std::size_t iy = 0; iy < g.ny; ++iy)
        for (std::size_t ix = 0; ix < g.nx; ++ix)
            fringes(ix, iy) = 0.5 * (1.0 + std::cos(2.0 * pi * c * g.x(ix)));
    const auto cos_orders = order_spectra(fringes, Carrier{c, 0.0});
    const double in_band = cos_orders.minus1 + cos_orders.zero + cos_orders.plus1;
    const double zero = cos_orders.zero / in_band;
    const double plus = cos_orders.plus1 / in_band;
    const double minus = cos_orders.minus1 / in_band;
    const bool ratio = std::abs(zero / (4.0 / 6.0) - 1.0) <= 0.02 && std::abs(plus / (1.0 / 6.0) - 1.0) <= 0.02 &&
                       std::abs(minus / (1.0 / 6.0) - 1.0) <= 0.02;
    return {centred && ratio && orders.plus1 > 0.05 && orders.minus1 > 0.05,
            fmt("+1 centre %.4e, -1 centre %.4e cycles/m (bin %.0f, sin(2 deg)/lambda %.4e); cosine mask "
                "%.4f:%.4f:%.4f",
                orders.centroid_plus1, orders.centroid_minus1, orders.bin, c, zero / minus, plus / minus, 1.0)};
}

Outcome speckle() {
    double contrast[2] = {0.0, 0.0};
    const char* names[2] = {"diffuse_square", "smooth_square"};
    for (int k = 0; k < 2; ++k) {
        const auto out = work / names[k];
        fs::remove_all(out);
        if (cli("simulate --scene " + q(scenes / (std::string{names[k]} + ".scene")) + " --out " + q(out)) != 0)
            return {false, std::string{names[k]} + ": simulate exited non-zero"};
        contrast[k] = read_report(out / "report.csv").speckle_contrast;
    }
    return {std::abs(contrast[0] - 1.0) <= 0.15 && contrast[1] < 0.3,
            fmt("diffuse contrast %.3f, smooth contrast %.3f", contrast[0], contrast[1])};
}

Outcome determinism() {
    const auto scene = scenes / "diffuse_square.scene";
    std::string threads_n = std::to_string(std::max(2u, std::thread::hardware_concurrency()));
    std::vector<fs::path> outs;
    for (const std::string& t : {std::string{"1"}, threads_n}) {
        const auto out = work / ("det_" + t);
        fs::remove_all(out);
        if (cli("simulate --scene " + q(scene) + " --seed 42 --dump-fields --threads " + t + " --out " + q(out)) != 0)
            return {false, "simulate exited non-zero"};
        outs.push_back(out);
    }
    bool same = true;
    for (const char* name : {"report.csv", "object.field", "recon.field"})
        same = same && slurp(outs[0] / name) == slurp(outs[1] / name);
    return {same, "report.csv, object.field, recon.field compared bytewise, --threads 1 vs " + threads_n};
}

} // namespace

int main() {
    fs::remove_all(work);
    fs::create_directories(work);
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"AC1 scan amplification", scan_amplification},
        {"AC2 viewing solid angle", solid_angle_claim},
        {"AC3 interference identity", interference_identity},
        {"AC4 hologram terms", term_behaviour},
        {"AC5 end-to-end reconstruction", end_to_end},
        {"AC6 propagation physics", propagation_physics},
        {"AC7 zone plate", zone_plate},
        {"AC8 order separation", order_separation},
        {"AC9 speckle statistics", speckle},
        {"AC10 determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string{"threw: "} + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << fmt(" [%.1f s]", secs) << std::endl;
    }
    std::cout << (10 - failed) << "/10 criteria pass" << std::endl;
    return failed ? 1 : 0;
}
