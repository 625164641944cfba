#include "holosim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "holosim/mvs.hpp"
#include "holosim/rtrh.hpp"

namespace holosim {

namespace fs = std::filesystem;

unsigned threads_from_environment(unsigned fallback) {
    if (const char* env = std::getenv("HOLOSIM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<unsigned>(v);
    }
    return fallback;
}

namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error{e.code(), std::string{name} + ": " + e.detail()};
    }
}

void log(bool verbose, const std::string& line) {
    if (verbose)
        std::clog << "holosim: " << line << '\n';
}

/// Files written by one command, removed again if the command fails.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_{std::move(dir)} {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_))
            throw Error{ErrorCode::IoError, "cannot create output directory " + dir_.string()};
    }
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;
    ~OutputSet() {
        if (committed_)
            return;
        std::error_code ec;
        for (const auto& p : written_)
            fs::remove(p, ec);
    }

    fs::path add(const std::string& name) {
        written_.push_back(dir_ / name);
        return written_.back();
    }
    void commit() { committed_ = true; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool committed_ = false;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out)
        throw Error{ErrorCode::IoError, "cannot open " + path.string() + " for writing"};
    out << text;
    out.flush();
    if (!out)
        throw Error{ErrorCode::IoError, "write failed for " + path.string()};
}

std::string channel_prefix(const SceneConfig& config, std::size_t k) {
    return config.wavelengths.size() > 1 ? "ch" + std::to_string(k) + "_" : std::string{};
}

/// Object waves and hologram for one wavelength.
struct ChannelState {
    OpticalSetup setup;
    Scene scene;
    ReferenceSpec reference;
    std::vector<ComplexField> slice_fields; // at the screen, scene order
    ComplexField object;                    // coherent sum
    IntensityMap hologram;
    TransmissionMask mask;
};

double rms_amplitude(const std::vector<ComplexField>& fields) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : fields) {
        for (const auto& v : f.samples())
            sum += std::norm(v);
        n = f.size();
    }
    return n ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
}

ChannelState prepare_channel(const SceneConfig& config, std::size_t k, unsigned threads, bool verbose) {
    ChannelState st;
    st.setup = config.setup_for(k);
    st.setup.threads = threads;
    st.scene = config.scene.for_channel(k);
    if (st.scene.slices.empty())
        throw Error{ErrorCode::ValidationError,
                    "object synthesis: no slice applies to wavelength index " + std::to_string(k)};

    log(verbose, "propagating " + std::to_string(st.scene.slices.size()) + " slice(s) to the screen");
    st.slice_fields = stage("object synthesis", [&] { return slice_screen_fields(st.scene, st.setup); });
    st.object = ComplexField{st.setup.screen()};
    for (const auto& f : st.slice_fields)
        st.object = combine(st.object, f, CombineOp::Add);

    st.reference = config.reference;
    if (config.reference_amplitude_auto) {
        const double a = rms_amplitude(st.slice_fields);
        st.reference.amplitude = a > 0.0 ? a : 1.0;
    }

    st.hologram = stage("hologram", [&] {
        const auto r = reference_wave(st.reference, st.setup);
        if (st.setup.slice_mode == SliceMode::Coherent)
            return interferogram(st.object, r);
        IntensityMap total{st.setup.screen()};
        auto dst = total.samples();
        for (const auto& f : st.slice_fields) {
            const auto part = interferogram(f, r);
            auto src = part.samples();
            for (std::size_t i = 0; i < dst.size(); ++i)
                dst[i] += src[i];
        }
        return total;
    });
    st.mask = stage("mask", [&] { return transmission_mask(st.hologram, config.mask); });
    return st;
}

std::size_t nearest_slice(const Scene& scene, double z) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scene.slices.size(); ++i)
        if (std::abs(-scene.slices[i].depth - z) < std::abs(-scene.slices[best].depth - z))
            best = i;
    return best;
}

/// Lateral offset of the real image at depth z: the conjugate term carries
/// twice the reference tilt frequency.
std::pair<double, double> real_image_offset(const ReferenceSpec& ref, double wavelength, double z) {
    const auto c = ref.carrier(wavelength);
    const double sx = 2.0 * wavelength * c.fx;
    const double sy = 2.0 * wavelength * c.fy;
    const double cz = 1.0 - sx * sx - sy * sy;
    if (!(cz > 0.0))
        return {0.0, 0.0};
    return {z * sx / std::sqrt(cz), z * sy / std::sqrt(cz)};
}

RealField shifted(const RealField& map, long dx, long dy) {
    RealField out{map.geometry()};
    const long nx = static_cast<long>(map.nx());
    const long ny = static_cast<long>(map.ny());
    for (long iy = 0; iy < ny; ++iy)
        for (long ix = 0; ix < nx; ++ix) {
            const long sx = ix - dx;
            const long sy = iy - dy;
            if (sx >= 0 && sx < nx && sy >= 0 && sy < ny)
                out(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy)) =
                    map(static_cast<std::size_t>(sx), static_cast<std::size_t>(sy));
        }
    return out;
}

struct SliceTruth {
    RealField intensity; // ground truth placed where the real image forms
    Roi roi;             // central 60% of its support
};

SliceTruth slice_truth(const Slice& slice, const ChannelState& st, double z) {
    const auto [ox, oy] = real_image_offset(st.reference, st.setup.wavelength, z);
    const long dx = std::lround(ox / st.setup.pitch);
    const long dy = std::lround(oy / st.setup.pitch);
    SliceTruth t{shifted(resample_slice(slice, st.setup), dx, dy), {}};

    const double w = slice.extent / st.setup.pitch;
    const double h = w * static_cast<double>(slice.intensity.height) / static_cast<double>(slice.intensity.width);
    const double cx = static_cast<double>(st.setup.nx / 2) + static_cast<double>(dx);
    const double cy = static_cast<double>(st.setup.ny / 2) + static_cast<double>(dy);
    auto span = [](double centre, double size, std::size_t n) {
        const double lo = std::max(0.0, std::ceil(centre - 0.3 * size));
        const double hi = std::min(static_cast<double>(n), std::floor(centre + 0.3 * size));
        return hi > lo ? std::pair{static_cast<std::size_t>(lo), static_cast<std::size_t>(hi - lo)}
                       : std::pair<std::size_t, std::size_t>{0, 0};
    };
    const auto [x0, rw] = span(cx, w, st.setup.nx);
    const auto [y0, rh] = span(cy, h, st.setup.ny);
    t.roi = Roi{x0, y0, rw, rh};
    return t;
}

double ncc_or_nan(const IntensityMap& recon, const RealField& truth) {
    try {
        return ncc(recon, truth.samples());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ZeroVariance)
            return std::nan("");
        throw;
    }
}

double speckle_or_nan(const IntensityMap& recon, const Roi& roi) {
    if (roi.width == 0 || roi.height == 0)
        return std::nan("");
    try {
        return speckle_contrast(recon, roi);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ZeroVariance)
            return std::nan("");
        throw;
    }
}

void echo_config(ReconstructionReport& report, const SceneConfig& config, const ChannelState& st) {
    auto& p = report.provenance;
    const auto& s = st.setup;
    p["scene"] = config.scene.name;
    p["nx"] = std::to_string(s.nx);
    p["ny"] = std::to_string(s.ny);
    p["pitch"] = format_double(s.pitch);
    p["wavelength"] = format_double(s.wavelength);
    p["pad_factor"] = std::to_string(s.propagation.pad_factor);
    p["band_limit"] = s.propagation.band_limit ? "true" : "false";
    p["diffuse"] = s.diffuse ? "true" : "false";
    p["seed"] = std::to_string(s.seed);
    p["slice_mode"] = s.slice_mode == SliceMode::Coherent ? "coherent" : "incoherent";
    p["slices"] = std::to_string(st.scene.slices.size());
    p["reference_amplitude"] = format_double(st.reference.amplitude);
    p["reference_amplitude_auto"] = config.reference_amplitude_auto ? "true" : "false";
    p["tilt_x"] = format_double(st.reference.tilt_x);
    p["tilt_y"] = format_double(st.reference.tilt_y);
    p["phase_offset"] = format_double(st.reference.phase_offset);
    p["mask_mode"] = config.mask.mode == MaskMode::Linear ? "linear" : "binary";
    p["mask_bias"] = format_double(st.mask.bias);
    p["mask_gain"] = format_double(st.mask.gain);
    p["mask_clamped_samples"] = std::to_string(st.mask.clamped_samples);
    p["sweep_z_min"] = format_double(config.sweep.z_min);
    p["sweep_z_max"] = format_double(config.sweep.z_max);
    p["sweep_steps"] = std::to_string(config.sweep.steps);
}

} // namespace

std::vector<ReconstructionReport> run_simulate(const SimulateOptions& options) {
    auto config = stage("load scene", [&] { return load_scene(options.scene); });
    if (options.seed)
        config.setup.seed = *options.seed;
    OutputSet outputs{options.out};
    std::vector<ReconstructionReport> reports;
    std::vector<IntensityMap> previews;

    for (std::size_t k = 0; k < config.wavelengths.size(); ++k) {
        const auto prefix = channel_prefix(config, k);
        log(options.verbose, "wavelength " + format_double(config.wavelengths[k]) + " m");
        auto st = prepare_channel(config, k, options.threads, options.verbose);

        log(options.verbose, "focus search over " + std::to_string(config.sweep.steps) + " planes");
        const auto focus = stage("focus search", [&] {
            return focus_search(st.mask, st.reference, st.setup, config.sweep.z_min, config.sweep.z_max,
                                config.sweep.steps);
        });

        ReconstructionReport report;
        report.focus_depth = focus.z;
        report.focus_x = focus.x;
        report.focus_y = focus.y;
        report.peak_intensity = focus.peak;
        report.peak_to_mean = focus.peak_to_mean;

        const Reconstruction reconstruction{st.mask, st.reference, st.setup};
        const auto recon_field = stage("reconstruction", [&] { return reconstruction.field(focus.z); });
        const auto recon = intensity(recon_field);

        std::optional<TermFields> terms;
        const bool linear_unclamped = config.mask.mode == MaskMode::Linear && st.mask.clamped_samples == 0 &&
                                      st.setup.slice_mode == SliceMode::Coherent;
        if (linear_unclamped) {
            MaskSpec resolved = config.mask;
            resolved.gain = st.mask.gain;
            terms = stage("term separation", [&] {
                return propagate_terms(st.object, st.reference, st.setup, resolved, focus.z);
            });
        }

        stage("metrics", [&] {
            // Image metrics on the nominal plane of the slice nearest the focus.
            const auto& nearest = st.scene.slices[nearest_slice(st.scene, focus.z)];
            const double image_z = std::abs(nearest.depth);
            const auto image = image_z == focus.z ? recon : reconstruction.intensity(image_z);
            const auto truth = slice_truth(nearest, st, image_z);
            report.ncc = ncc_or_nan(image, truth.intensity);
            report.speckle_contrast = speckle_or_nan(image, truth.roi);
            const double watch = config.window ? config.window->z : focus.z;
            report.solid_angle_sr = solid_angle(static_cast<double>(st.setup.nx) * st.setup.pitch,
                                                static_cast<double>(st.setup.ny) * st.setup.pitch, watch);
            if (terms) {
                const auto b = power_budget(*terms);
                report.power_fractions["budget.attenuated_reference"] = b.attenuated_reference;
                report.power_fractions["budget.real_image"] = b.real_image;
                report.power_fractions["budget.virtual_image"] = b.virtual_image;
            }
            if (!st.reference.carrier(st.setup.wavelength).is_zero()) {
                const auto orders = order_spectra(to_complex(st.mask.transmittance),
                                                  st.reference.carrier(st.setup.wavelength));
                report.power_fractions["order.minus1"] = orders.minus1;
                report.power_fractions["order.zero"] = orders.zero;
                report.power_fractions["order.plus1"] = orders.plus1;
                report.power_fractions["order.out_of_band"] = orders.out_of_band;
            }
            if (config.window) {
                const auto at_window = config.window->z == focus.z ? recon_field
                                                                   : reconstruction.field(config.window->z);
                report.power_fractions["window.capture"] = window_capture(at_window, config.window->window);
                if (terms) {
                    MaskSpec resolved = config.mask;
                    resolved.gain = st.mask.gain;
                    const auto real = config.window->z == focus.z
                                          ? terms->real_image
                                          : propagate_terms(st.object, st.reference, st.setup, resolved,
                                                            config.window->z)
                                                .real_image;
                    report.power_fractions["window.capture_real_image"] =
                        window_capture(real, config.window->window);
                }
            }
            echo_config(report, config, st);
            report.provenance["focus_steps"] = std::to_string(focus.curve.size());
            report.validate();
            return 0;
        });

        stage("write outputs", [&] {
            write_intensity_image(st.hologram, outputs.add(prefix + "interferogram.pgm"));
            write_intensity_image(st.mask.transmittance, outputs.add(prefix + "mask.pgm"));
            write_intensity_image(recon, outputs.add(prefix + "recon_total.pgm"));
            if (terms) {
                write_intensity_image(intensity(terms->attenuated_reference), outputs.add(prefix + "recon_zero.pgm"));
                write_intensity_image(intensity(terms->real_image), outputs.add(prefix + "recon_real.pgm"));
                write_intensity_image(intensity(terms->virtual_image), outputs.add(prefix + "recon_virtual.pgm"));
            }
            if (options.dump_fields) {
                write_field(st.object, outputs.add(prefix + "object.field"));
                write_field(recon_field, outputs.add(prefix + "recon.field"));
            }
            write_report(report, outputs.add(prefix + "report.csv"));
            return 0;
        });
        if (config.wavelengths.size() == 3)
            previews.push_back(recon);
        reports.push_back(std::move(report));
    }

    if (previews.size() == 3) {
        stage("write outputs", [&] {
            // Longest wavelength to red; one shared scale keeps the colour balance.
            std::vector<std::size_t> order{0, 1, 2};
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return config.wavelengths[a] > config.wavelengths[b]; });
            double peak = 0.0;
            for (const auto& p : previews)
                for (double v : p.samples())
                    peak = std::max(peak, v);
            const char* names[3] = {"preview_r.pgm", "preview_g.pgm", "preview_b.pgm"};
            for (std::size_t c = 0; c < 3; ++c) {
                const auto& map = previews[order[c]];
                std::vector<std::uint16_t> px(map.size(), 0);
                if (peak > 0.0)
                    for (std::size_t i = 0; i < px.size(); ++i)
                        px[i] = static_cast<std::uint16_t>(std::round(65535.0 * map.samples()[i] / peak));
                write_pgm16(outputs.add(names[c]), map.nx(), map.ny(), px);
            }
            return 0;
        });
    }
    outputs.commit();
    return reports;
}

ComplexField run_propagate(const PropagateOptions& options) {
    auto input = stage("read field", [&] { return read_field(options.in); });
    OutputSet outputs{options.out};
    PropagationSpec spec;
    spec.method = options.method;
    spec.distance = options.distance;
    spec.pad_factor = options.pad_factor;
    log(options.verbose, "propagating " + std::to_string(input.nx()) + "x" + std::to_string(input.ny()) +
                             " field by " + format_double(options.distance) + " m");
    auto result = stage("propagation", [&] { return propagate(input, spec); });
    stage("write outputs", [&] {
        write_field(result, outputs.add("propagated.field"));
        write_intensity_image(intensity(result), outputs.add("propagated.pgm"));
        return 0;
    });
    outputs.commit();
    return result;
}

MvsDesign mvs_design(const MvsDesignOptions& o) {
    const LensSpec lens{o.focal_length, LensSpec{}.aperture_diameter};
    MvsDesign d;
    d.scan_range = scan_range_for_depth_interval(lens, o.z_near, o.z_far);
    d.chip_near = conjugate_distance(lens, o.z_near);
    d.chip_far = conjugate_distance(lens, o.z_far);
    d.feasible = d.scan_range < 1e-2;
    d.magnification_near = magnification(d.chip_near, o.z_near);
    d.magnification_far = magnification(d.chip_far, o.z_far);
    d.solid_angle_sr = solid_angle(o.screen_width, o.screen_height, o.watch_distance);
    d.solid_angle_small_sr = solid_angle_small(o.screen_width, o.screen_height, o.watch_distance);
    return d;
}

std::vector<std::string> run_mvs_design(const MvsDesignOptions& options, MvsDesign* result) {
    const auto d = stage("mvs design", [&] { return mvs_design(options); });
    OutputSet outputs{options.out};
    const std::vector<std::pair<std::string, std::string>> rows{
        {"focal_length", format_double(options.focal_length)},
        {"z_near", format_double(options.z_near)},
        {"z_far", format_double(options.z_far)},
        {"chip_distance_near", format_double(d.chip_near)},
        {"chip_distance_far", format_double(d.chip_far)},
        {"scan_range", format_double(d.scan_range)},
        {"scan_below_1cm", d.feasible ? "PASS" : "FAIL"},
        {"magnification_near", format_double(d.magnification_near)},
        {"magnification_far", format_double(d.magnification_far)},
        {"screen_width", format_double(options.screen_width)},
        {"screen_height", format_double(options.screen_height)},
        {"watch_distance", format_double(options.watch_distance)},
        {"solid_angle_sr", format_double(d.solid_angle_sr)},
        {"solid_angle_small_sr", format_double(d.solid_angle_small_sr)},
    };
    std::ostringstream csv;
    csv << "key,value\n";
    for (const auto& [k, v] : rows)
        csv << k << ',' << v << '\n';
    stage("write outputs", [&] {
        write_text(outputs.add("mvs_design.csv"), csv.str());
        return 0;
    });
    outputs.commit();

    char buf[256];
    std::vector<std::string> lines;
    std::snprintf(buf, sizeof buf, "scan range      %.6f mm (%s against the 1 cm bar)", d.scan_range * 1e3,
                  d.feasible ? "PASS" : "FAIL");
    lines.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "chip distance   %.6f mm .. %.6f mm", d.chip_near * 1e3, d.chip_far * 1e3);
    lines.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "magnification   %.3f at %g m, %.3f at %g m", d.magnification_near,
                  options.z_near, d.magnification_far, options.z_far);
    lines.emplace_back(buf);
    std::snprintf(buf, sizeof buf, "solid angle     %.5f sr exact, %.5f sr small-angle", d.solid_angle_sr,
                  d.solid_angle_small_sr);
    lines.emplace_back(buf);
    if (result)
        *result = d;
    return lines;
}

std::vector<SweepResult> run_sweep(const SweepOptions& options) {
    auto config = stage("load scene", [&] { return load_scene(options.scene); });
    OutputSet outputs{options.out};
    std::vector<SweepResult> results;

    for (std::size_t k = 0; k < config.wavelengths.size(); ++k) {
        const auto prefix = channel_prefix(config, k);
        auto st = prepare_channel(config, k, options.threads, options.verbose);
        log(options.verbose, "sweeping " + std::to_string(options.steps) + " planes");

        SweepResult r;
        r.focus = stage("focus search", [&] {
            return focus_search(st.mask, st.reference, st.setup, options.z_min, options.z_max, options.steps);
        });
        r.maxima = local_maxima(r.focus.curve);

        const Reconstruction reconstruction{st.mask, st.reference, st.setup};
        stage("metrics", [&] {
            for (std::size_t i = 0; i < st.scene.slices.size(); ++i) {
                const auto& slice = st.scene.slices[i];
                SliceMatch m;
                m.slice = i;
                m.depth = slice.depth;
                m.expected_z = -slice.depth;
                auto closer = [&](double a, double b) {
                    return std::abs(a - m.expected_z) < std::abs(b - m.expected_z);
                };
                if (!r.maxima.empty()) {
                    m.matched_z = r.focus.curve[r.maxima.front()].z;
                    for (auto idx : r.maxima)
                        if (closer(r.focus.curve[idx].z, m.matched_z))
                            m.matched_z = r.focus.curve[idx].z;
                } else {
                    m.matched_z = r.focus.curve.front().z;
                    for (const auto& s : r.focus.curve)
                        if (closer(s.z, m.matched_z))
                            m.matched_z = s.z;
                }
                const auto recon = reconstruction.intensity(m.matched_z);
                m.ncc = ncc_or_nan(recon, slice_truth(slice, st, m.matched_z).intensity);
                r.slices.push_back(m);
            }
            return 0;
        });

        stage("write outputs", [&] {
            std::ostringstream curve;
            curve << "z,peak,mean,ix,iy,local_max\n";
            for (std::size_t i = 0; i < r.focus.curve.size(); ++i) {
                const auto& s = r.focus.curve[i];
                const bool is_max = std::find(r.maxima.begin(), r.maxima.end(), i) != r.maxima.end();
                curve << format_double(s.z) << ',' << format_double(s.peak) << ',' << format_double(s.mean) << ','
                      << s.ix << ',' << s.iy << ',' << (is_max ? 1 : 0) << '\n';
            }
            write_text(outputs.add(prefix + "peak_curve.csv"), curve.str());

            std::ostringstream table;
            table << "slice,depth,expected_z,matched_z,ncc\n";
            for (const auto& m : r.slices)
                table << m.slice << ',' << format_double(m.depth) << ',' << format_double(m.expected_z) << ','
                      << format_double(m.matched_z) << ',' << format_double(m.ncc) << '\n';
            write_text(outputs.add(prefix + "slice_ncc.csv"), table.str());
            return 0;
        });
        results.push_back(std::move(r));
    }
    outputs.commit();
    return results;
}

} // namespace holosim
