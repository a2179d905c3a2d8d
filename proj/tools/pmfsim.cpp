// pmfsim: simulation front end for a fiber-based polarization-entangled
// photon pair source. Subcommands compute SFWM pair-generation spectra,
// pump walk-off profiles, simulated two-photon-interference fringes,
// fringe-visibility fits and parameter sweeps, all as CSV artifacts.
//
// Exit codes: 0 success, 1 computation/validation error, 2 I/O or schema
// error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pmf/config.hpp"
#include "pmf/csv.hpp"
#include "pmf/fiber.hpp"
#include "pmf/fringe_fit.hpp"
#include "pmf/pipeline.hpp"
#include "pmf/polarization.hpp"
#include "pmf/sfwm.hpp"

namespace {

struct GlobalOptions {
    std::string config_path;
    std::vector<std::string> overrides; // key=value
    double theta_deg = -1.0;            // pump angle shortcut, <0 means unset
    double lv_override_m = -1.0;        // direct L_v in meters, <0 means unset
    bool hwp_angles = false;
    bool dump = false;
};

pmf::ExperimentConfig load_config(const GlobalOptions& opts) {
    pmf::ExperimentConfig config;
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw pmf::IoError("cannot open config file: " + opts.config_path);
        config = pmf::parse_config(in);
    }
    for (const auto& assignment : opts.overrides) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos)
            throw pmf::ValidationError("--set expects key=value, got '" + assignment + "'");
        pmf::set_config_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
    }
    if (opts.theta_deg >= 0.0) config.theta_deg = opts.theta_deg;
    if (opts.lv_override_m >= 0.0) config.walkoff_override_m = opts.lv_override_m / 2.0;
    pmf::validate(config);
    return config;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw pmf::IoError("cannot open output file: " + path);
    return out;
}

// Analyzer inputs may be given as physical half-wave-plate angles; the
// transmission axis rotates at twice the plate angle.
double analyzer_angle(double input_deg, bool hwp_angles) {
    return hwp_angles ? 2.0 * input_deg : input_deg;
}

void cmd_spectra(const pmf::ExperimentConfig& config, double from_thz, double to_thz,
                 int points, const std::string& output) {
    const auto grid = pmf::DetuningGrid::linspaced(from_thz, to_thz, points);
    const auto line = config.fiber_line();
    const auto pump = config.pump();
    const auto lengths = config.lengths();
    const auto spec = pmf::spectrum(grid, pump, line, lengths, config.phase_factor);

    auto params = pmf::config_params(config);
    params.emplace_back("grid.from_thz", pmf::fmt(from_thz));
    params.emplace_back("grid.to_thz", pmf::fmt(to_thz));
    params.emplace_back("grid.points", std::to_string(points));
    params.emplace_back("lengths.l_scalar_m", pmf::fmt(lengths.l_scalar_m));
    params.emplace_back("lengths.l_vector_m", pmf::fmt(lengths.l_vector_m));
    auto out = open_output(output);
    pmf::write_spectrum_csv(out, spec, params);

    const double ratio = pmf::suppression_ratio(config.signal_detuning_thz, pump, line, lengths,
                                                config.phase_factor);
    std::cout << "suppression_ratio at " << pmf::fmt(config.signal_detuning_thz)
              << " THz = " << pmf::fmt(ratio) << "\n";
    std::cout << "wrote " << output << "\n";
}

void cmd_walkoff(const pmf::ExperimentConfig& config, int samples, const std::string& output) {
    const auto line = config.fiber_line();
    const auto profile = pmf::walkoff_delay_profile(line, samples);
    auto out = open_output(output);
    pmf::write_comment_params(out, pmf::config_params(config));
    out << "z_m,delay_ps\n";
    for (Eigen::Index k = 0; k < profile.rows(); ++k)
        out << pmf::fmt(profile(k, 0)) << ',' << pmf::fmt(profile(k, 1)) << "\n";
    std::cout << "wrote " << output << "\n";
}

void cmd_fringe(const pmf::ExperimentConfig& config, std::vector<double> theta_s,
                std::vector<double> theta_i, bool hwp_angles, const std::string& output) {
    for (auto& t : theta_s) t = analyzer_angle(t, hwp_angles);
    for (auto& t : theta_i) t = analyzer_angle(t, hwp_angles);
    const auto rows = pmf::run_fringe_scan(config, theta_s, theta_i);
    auto out = open_output(output);
    pmf::write_comment_params(out, pmf::config_params(config));
    out << pmf::kFringeHeader << "\n";
    for (const auto& row : rows) pmf::write_fringe_row(out, row);
    std::cout << "wrote " << output << " (" << rows.size() << " rows)\n";
}

void cmd_fit(const std::string& input, bool subtract_accidentals, const std::string& output) {
    std::ifstream in(input);
    if (!in) throw pmf::IoError("cannot open dataset: " + input);
    const auto rows = pmf::read_fringe_csv(in);
    const auto datasets = pmf::group_fringe_rows(rows, subtract_accidentals);
    if (datasets.empty()) throw pmf::ValidationError("dataset contains no rows");

    auto out = open_output(output);
    out << "# source = " << std::filesystem::path(input).filename().string() << "\n";
    out << "# subtract_accidentals = " << (subtract_accidentals ? "true" : "false") << "\n";
    out << pmf::kFitReportHeader << "\n";
    for (const auto& data : datasets) {
        const auto fit = pmf::fit_fringe(data);
        out << pmf::fmt(data.theta_s_deg) << ',' << pmf::fmt(fit.visibility) << ','
            << pmf::fmt(fit.visibility_stderr) << ',' << pmf::fmt(fit.phase_deg) << ','
            << pmf::fmt(fit.mean_level) << ',' << pmf::fmt(fit.reduced_chi_square) << "\n";

        std::ostringstream line;
        line.precision(4);
        line << "theta_s = " << data.theta_s_deg << " deg over " << data.counts.size()
             << " points: V = " << fit.visibility << " +/- " << fit.visibility_stderr
             << ", theta0 = " << fit.phase_deg << " deg, C0 = " << fit.mean_level
             << ", chi2/dof = " << fit.reduced_chi_square
             << (fit.converged ? "" : " [did not converge]")
             << (fit.visibility_clamped ? " [visibility clamped to 1]" : "");
        std::cout << line.str() << "\n";
    }
    std::cout << "wrote " << output << "\n";
}

void cmd_sweep(const pmf::ExperimentConfig& base, const std::string& param, double from,
               double to, int points, const std::string& output) {
    auto out = open_output(output);
    pmf::write_comment_params(out, pmf::config_params(base));
    out << "# sweep.param = " << param << "\n";
    out << "param_value,suppression,mu_signal_band\n";
    for (int k = 0; k < points; ++k) {
        const double value = points == 1 ? from : from + (to - from) * k / (points - 1);
        pmf::ExperimentConfig config = base;
        pmf::set_config_value(config, param, pmf::fmt(value));
        const auto point = pmf::evaluate_sweep_point(config, value);
        out << pmf::fmt(point.param_value) << ',' << pmf::fmt(point.suppression) << ','
            << pmf::fmt(point.mu_signal_band) << "\n";
    }
    std::cout << "wrote " << output << " (" << points << " points)\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SFWM photon-pair source simulator for spliced birefringent fiber"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    GlobalOptions global;
    app.add_option("--config", global.config_path, "Configuration file (sectioned key = value)");
    app.add_option("--set", global.overrides,
                   "Override a configuration value, e.g. --set pump.theta_deg=30")
        ->type_name("KEY=VALUE");
    app.add_option("--theta", global.theta_deg, "Pump polarization angle in degrees");
    app.add_option("--lv-override", global.lv_override_m,
                   "Force the vector-process effective length L_v (meters)");
    app.add_flag("--hwp-angles", global.hwp_angles,
                 "Analyzer angles are physical half-wave-plate angles (doubling applied)");
    app.add_flag("--dump-config", global.dump, "Echo the validated configuration and exit");

    auto* spectra = app.add_subcommand("spectra", "Pair-generation spectral densities as CSV");
    double from_thz = -1.0, to_thz = 1.0;
    int spectra_points = 2001;
    std::string spectra_out = "spectrum.csv";
    spectra->add_option("--from", from_thz, "Grid start, THz");
    spectra->add_option("--to", to_thz, "Grid end, THz");
    spectra->add_option("--points", spectra_points, "Grid points")->check(CLI::Range(2, 10000000));
    spectra->add_option("-o,--output", spectra_out, "Output CSV path");

    auto* walkoff = app.add_subcommand("walkoff", "Pump walk-off delay profile as CSV");
    int walkoff_samples = 301;
    std::string walkoff_out = "walkoff.csv";
    walkoff->add_option("--samples", walkoff_samples, "Profile sample count");
    walkoff->add_option("-o,--output", walkoff_out, "Output CSV path");

    auto* fringe = app.add_subcommand("fringe", "Simulated coincidence fringes as CSV");
    std::vector<double> theta_s{0.0, 135.0};
    std::vector<double> theta_i_list;
    double ti_start = 0.0, ti_stop = 180.0;
    int ti_count = 13;
    std::string fringe_out = "fringe.csv";
    fringe->add_option("--theta-s", theta_s, "Signal analyzer angles, degrees");
    fringe->add_option("--theta-i", theta_i_list, "Explicit idler analyzer angles, degrees");
    fringe->add_option("--ti-start", ti_start, "Idler sweep start, degrees");
    fringe->add_option("--ti-stop", ti_stop, "Idler sweep end, degrees");
    fringe->add_option("--ti-count", ti_count, "Idler sweep point count")->check(CLI::Range(1, 100000));
    fringe->add_option("-o,--output", fringe_out, "Output CSV path");

    auto* fit = app.add_subcommand("fit", "Fit visibilities from a counting CSV");
    std::string fit_input;
    std::string fit_out = "fit_report.csv";
    bool subtract_accidentals = false;
    fit->add_option("dataset", fit_input, "Counting CSV produced by the fringe command")
        ->required();
    fit->add_flag("--subtract-accidentals", subtract_accidentals,
                  "Subtract the accidental estimate before fitting");
    fit->add_option("-o,--output", fit_out, "Report CSV path");

    auto* sweep = app.add_subcommand("sweep", "Suppression/band-rate sweep over one parameter");
    std::string sweep_param;
    double sweep_from = 0.0, sweep_to = 1.0;
    int sweep_points = 0;
    std::string sweep_out = "sweep.csv";
    sweep->add_option("--param", sweep_param, "Configuration key to sweep")->required();
    sweep->add_option("--from", sweep_from, "Sweep start")->required();
    sweep->add_option("--to", sweep_to, "Sweep end")->required();
    sweep->add_option("--points", sweep_points, "Sweep point count")->required();
    sweep->add_option("-o,--output", sweep_out, "Output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        const pmf::ExperimentConfig config = load_config(global);
        if (global.dump) {
            pmf::dump_config(std::cout, config);
            return 0;
        }
        if (spectra->parsed()) {
            cmd_spectra(config, from_thz, to_thz, spectra_points, spectra_out);
        } else if (walkoff->parsed()) {
            cmd_walkoff(config, walkoff_samples, walkoff_out);
        } else if (fringe->parsed()) {
            std::vector<double> theta_i = theta_i_list;
            if (theta_i.empty()) {
                for (int k = 0; k < ti_count; ++k)
                    theta_i.push_back(ti_count == 1
                                          ? ti_start
                                          : ti_start + (ti_stop - ti_start) * k / (ti_count - 1));
            }
            cmd_fringe(config, theta_s, theta_i, global.hwp_angles, fringe_out);
        } else if (fit->parsed()) {
            cmd_fit(fit_input, subtract_accidentals, fit_out);
        } else if (sweep->parsed()) {
            if (sweep_points < 0) throw pmf::ValidationError("sweep: points must be >= 0");
            cmd_sweep(config, sweep_param, sweep_from, sweep_to, sweep_points, sweep_out);
        } else {
            std::cerr << "no subcommand given; try --help\n";
            return 1;
        }
    } catch (const pmf::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const pmf::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const pmf::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
