// holosim: batch front end for the projector + hologram simulator.
//
// Exit status: 0 success, 1 pipeline failure, 2 usage error.

#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "holosim/pipeline.hpp"

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
    if (!ok)
        throw UsageError{message};
}

std::pair<double, double> parse_screen(const std::string& text) {
    const auto x = text.find('x');
    require(x != std::string::npos, "--screen expects <width>x<height> in metres, got '" + text + "'");
    try {
        std::size_t used_w = 0;
        std::size_t used_h = 0;
        const double w = std::stod(text.substr(0, x), &used_w);
        const double h = std::stod(text.substr(x + 1), &used_h);
        require(used_w == x && used_h == text.size() - x - 1, "--screen: trailing characters in '" + text + "'");
        return {w, h};
    } catch (const std::logic_error&) {
        throw UsageError{"--screen expects <width>x<height> in metres, got '" + text + "'"};
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scanning-projector and real-time hologram simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "holosim 1.0");

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    unsigned threads = 0;
    bool verbose = false;

    holosim::SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Run the full pipeline on a scene file");
    simulate->add_option("--scene", sim.scene, "Scene file")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", sim.out, "Output directory")->required();
    std::uint64_t seed = 0;
    auto* seed_opt = simulate->add_option("--seed", seed, "Diffuser seed (overrides the scene)");
    simulate->add_flag("--dump-fields", sim.dump_fields, "Also write object and reconstruction field dumps");
    simulate->add_option("--threads", threads, "Worker threads (default HOLOSIM_THREADS or all cores)");
    simulate->add_flag("-v,--verbose", verbose, "Progress on stderr");

    holosim::PropagateOptions prop;
    std::string method = "as";
    auto* propagate = app.add_subcommand("propagate", "Propagate a field dump over a distance");
    propagate->add_option("--in", prop.in, "Input field dump")->required()->check(CLI::ExistingFile);
    propagate->add_option("--dz", prop.distance, "Distance in metres")->required();
    propagate->add_option("--method", method, "as or fresnel")->check(CLI::IsMember({"as", "fresnel"}));
    propagate->add_option("--pad", prop.pad_factor, "Zero-padding factor")->check(CLI::IsMember({1, 2, 4}));
    propagate->add_option("--out", prop.out, "Output directory")->required();
    propagate->add_flag("-v,--verbose", verbose, "Progress on stderr");

    holosim::MvsDesignOptions design;
    std::string screen = "1x1";
    auto* mvs = app.add_subcommand("mvs-design", "Scan range, magnification and viewing solid angle");
    mvs->add_option("--focal", design.focal_length, "Lens focal length, m")->required();
    mvs->add_option("--znear", design.z_near, "Nearest image depth, m")->required();
    mvs->add_option("--zfar", design.z_far, "Farthest image depth, m")->required();
    mvs->add_option("--screen", screen, "Screen size <w>x<h>, m");
    mvs->add_option("--watch", design.watch_distance, "Watch distance from the screen, m");
    mvs->add_option("--out", design.out, "Output directory")->required();

    holosim::SweepOptions sweep;
    auto* sw = app.add_subcommand("sweep", "Peak-vs-depth curve and per-slice correlation");
    sw->add_option("--scene", sweep.scene, "Scene file")->required()->check(CLI::ExistingFile);
    sw->add_option("--zmin", sweep.z_min, "Nearest viewer-side depth, m")->required();
    sw->add_option("--zmax", sweep.z_max, "Farthest viewer-side depth, m")->required();
    sw->add_option("--steps", sweep.steps, "Number of planes")->required();
    sw->add_option("--out", sweep.out, "Output directory")->required();
    sw->add_option("--threads", threads, "Worker threads (default HOLOSIM_THREADS or all cores)");
    sw->add_flag("-v,--verbose", verbose, "Progress on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const unsigned workers = threads ? threads : holosim::threads_from_environment(hw);

    try {
        if (simulate->parsed()) {
            if (*seed_opt)
                sim.seed = seed;
            sim.threads = workers;
            sim.verbose = verbose;
            const auto reports = holosim::run_simulate(sim);
            for (std::size_t k = 0; k < reports.size(); ++k)
                std::cout << "channel " << k << ": focus z = " << reports[k].focus_depth
                          << " m, x = " << reports[k].focus_x << " m, y = " << reports[k].focus_y
                          << " m, peak/mean = " << reports[k].peak_to_mean << '\n';
        } else if (propagate->parsed()) {
            prop.method = method == "as" ? holosim::PropagationMethod::AngularSpectrum
                                         : holosim::PropagationMethod::FresnelSingleTransform;
            prop.verbose = verbose;
            const auto out = holosim::run_propagate(prop);
            std::cout << "propagated " << out.nx() << "x" << out.ny() << " field to z = " << out.geometry().plane_z
                      << " m, pitch " << out.geometry().pitch << " m\n";
        } else if (mvs->parsed()) {
            std::tie(design.screen_width, design.screen_height) = parse_screen(screen);
            require(design.focal_length > 0.0, "--focal must be positive");
            require(design.z_near > 0.0 && design.z_far > 0.0, "--znear and --zfar must be positive");
            require(design.z_near <= design.z_far, "--znear must not exceed --zfar");
            require(design.screen_width > 0.0 && design.screen_height > 0.0, "--screen sizes must be positive");
            require(design.watch_distance > 0.0, "--watch must be positive");
            for (const auto& line : holosim::run_mvs_design(design))
                std::cout << line << '\n';
        } else if (sw->parsed()) {
            require(sweep.z_min > 0.0, "--zmin must be positive (viewer side)");
            require(sweep.z_max > sweep.z_min, "empty depth range: --zmax must exceed --zmin");
            require(sweep.steps >= 2, "--steps must be at least 2");
            sweep.threads = workers;
            sweep.verbose = verbose;
            const auto results = holosim::run_sweep(sweep);
            for (std::size_t k = 0; k < results.size(); ++k) {
                std::cout << "channel " << k << ": " << results[k].maxima.size() << " local maxima";
                for (auto i : results[k].maxima)
                    std::cout << ' ' << results[k].focus.curve[i].z;
                std::cout << '\n';
            }
        }
    } catch (const UsageError& e) {
        std::cerr << "holosim: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "holosim: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
