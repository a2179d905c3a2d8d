#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pmf/counting.hpp"
#include "pmf/csv.hpp"
#include "pmf/errors.hpp"
#include "pmf/fiber.hpp"
#include "pmf/polarization.hpp"
#include "pmf/sfwm.hpp"

// Experiment configuration: a flat, sectioned key = value text file plus
// programmatic overrides. Every key is listed in the descriptor table
// below; unknown keys are rejected with their path. The shipped defaults
// reproduce the standard instrument settings this simulator models.

namespace pmf {

struct ExperimentConfig {
    // [fiber]
    double fiber_length_m = 150.0;
    bool fiber_splice_mid = true;
    double delta_beta1_ps_per_m = 0.286;
    double beta2_ps2_per_m = -3.824e-3;
    double gamma_per_w_m = 3e-3;
    std::optional<double> walkoff_override_m = 7.5; // nullopt: derive from pulse width

    // [pump]
    double peak_power_w = 0.8;
    double theta_deg = 45.0;
    double pulse_width_ps = 20.0;
    double rep_rate_hz = 1e6;
    double center_wavelength_nm = 1552.75;

    // [filters]
    double signal_detuning_thz = 0.2;
    double idler_detuning_thz = -0.2;
    double bandwidth_ghz = 100.0;

    // [losses]
    double transmission_s = 0.495;
    double transmission_i = 0.495;
    double ripple_depth = 0.0;

    // [detectors]
    double efficiency_s = 0.2183;
    double efficiency_i = 0.2256;
    double dark_prob = 1e-5;
    double gate_width_ns = 2.5;

    // [run]
    double duration_s = 10.0;
    std::uint64_t seed = 23;
    double mean_pairs_per_pulse = 0.0185;
    PairStatistics pair_statistics = PairStatistics::Poisson;

    // [noise]
    double werner_v = 0.93;
    double phase_phi_deg = 12.0;
    double amplitude_imbalance = 1.0;
    double background_flux_s = 2e-4;
    double background_flux_i = 2e-4;

    // [spectra]
    PhaseFactor phase_factor = PhaseFactor::SinSq;
    double rate_scale = 1.0;

    FiberLine fiber_line() const {
        return fiber_splice_mid
                   ? mid_spliced_line(fiber_length_m, delta_beta1_ps_per_m, beta2_ps2_per_m,
                                      gamma_per_w_m)
                   : uniform_line(fiber_length_m, delta_beta1_ps_per_m, beta2_ps2_per_m,
                                  gamma_per_w_m);
    }

    PumpConfig pump() const {
        return PumpConfig{peak_power_w, theta_deg, pulse_width_ps, rep_rate_hz,
                          center_wavelength_nm};
    }

    EffectiveLengths lengths() const {
        return effective_lengths(fiber_line(), pump(), walkoff_override_m);
    }

    FilterSpec signal_filter() const { return FilterSpec{signal_detuning_thz, bandwidth_ghz}; }
    FilterSpec idler_filter() const { return FilterSpec{idler_detuning_thz, bandwidth_ghz}; }

    SourceNoise source_noise() const {
        return SourceNoise{werner_v, amplitude_imbalance, deg2rad(phase_phi_deg)};
    }

    TwoQubitState state() const { return make_state(source_noise()); }

    ChannelLoss channel_loss() const {
        return ChannelLoss{transmission_s, transmission_i, ripple_depth};
    }

    DetectorModel detector_s() const { return DetectorModel{efficiency_s, dark_prob, gate_width_ns}; }
    DetectorModel detector_i() const { return DetectorModel{efficiency_i, dark_prob, gate_width_ns}; }

    RunConfig run_config() const {
        return RunConfig{rep_rate_hz, duration_s,    mean_pairs_per_pulse,
                         background_flux_s, background_flux_i, seed, pair_statistics};
    }

    double duty_cycle() const { return pulse_width_ps * 1e-12 * rep_rate_hz; }
};

namespace detail {

inline double parse_config_double(const std::string& key, const std::string& text) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    double value = 0.0;
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ValidationError(key + ": not a number: '" + text + "'");
    return value;
}

inline std::uint64_t parse_config_uint(const std::string& key, const std::string& text) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    std::uint64_t value = 0;
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ValidationError(key + ": not a nonnegative integer: '" + text + "'");
    return value;
}

inline bool parse_config_bool(const std::string& key, const std::string& text) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw ValidationError(key + ": expected true or false, got '" + text + "'");
}

struct ConfigKey {
    const char* path; // "section.key"
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

inline const std::vector<ConfigKey>& config_keys() {
    auto num = [](const char* path, double ExperimentConfig::* member) {
        return ConfigKey{path,
                         [path, member](ExperimentConfig& c, const std::string& v) {
                             c.*member = parse_config_double(path, v);
                         },
                         [member](const ExperimentConfig& c) { return fmt(c.*member); }};
    };
    static const std::vector<ConfigKey> keys = {
        num("fiber.length_m", &ExperimentConfig::fiber_length_m),
        ConfigKey{"fiber.splice_mid",
                  [](ExperimentConfig& c, const std::string& v) {
                      c.fiber_splice_mid = parse_config_bool("fiber.splice_mid", v);
                  },
                  [](const ExperimentConfig& c) {
                      return std::string(c.fiber_splice_mid ? "true" : "false");
                  }},
        num("fiber.delta_beta1_ps_per_m", &ExperimentConfig::delta_beta1_ps_per_m),
        num("fiber.beta2_ps2_per_m", &ExperimentConfig::beta2_ps2_per_m),
        num("fiber.gamma_per_w_m", &ExperimentConfig::gamma_per_w_m),
        ConfigKey{"fiber.walkoff_override_m",
                  [](ExperimentConfig& c, const std::string& v) {
                      if (v == "auto")
                          c.walkoff_override_m.reset();
                      else
                          c.walkoff_override_m =
                              parse_config_double("fiber.walkoff_override_m", v);
                  },
                  [](const ExperimentConfig& c) {
                      return c.walkoff_override_m ? fmt(*c.walkoff_override_m)
                                                  : std::string("auto");
                  }},
        num("pump.peak_power_w", &ExperimentConfig::peak_power_w),
        num("pump.theta_deg", &ExperimentConfig::theta_deg),
        num("pump.pulse_width_ps", &ExperimentConfig::pulse_width_ps),
        num("pump.rep_rate_hz", &ExperimentConfig::rep_rate_hz),
        num("pump.center_wavelength_nm", &ExperimentConfig::center_wavelength_nm),
        num("filters.signal_detuning_thz", &ExperimentConfig::signal_detuning_thz),
        num("filters.idler_detuning_thz", &ExperimentConfig::idler_detuning_thz),
        num("filters.bandwidth_ghz", &ExperimentConfig::bandwidth_ghz),
        num("losses.transmission_s", &ExperimentConfig::transmission_s),
        num("losses.transmission_i", &ExperimentConfig::transmission_i),
        num("losses.ripple_depth", &ExperimentConfig::ripple_depth),
        num("detectors.efficiency_s", &ExperimentConfig::efficiency_s),
        num("detectors.efficiency_i", &ExperimentConfig::efficiency_i),
        num("detectors.dark_prob", &ExperimentConfig::dark_prob),
        num("detectors.gate_width_ns", &ExperimentConfig::gate_width_ns),
        num("run.duration_s", &ExperimentConfig::duration_s),
        ConfigKey{"run.seed",
                  [](ExperimentConfig& c, const std::string& v) {
                      c.seed = parse_config_uint("run.seed", v);
                  },
                  [](const ExperimentConfig& c) { return std::to_string(c.seed); }},
        num("run.mean_pairs_per_pulse", &ExperimentConfig::mean_pairs_per_pulse),
        ConfigKey{"run.pair_statistics",
                  [](ExperimentConfig& c, const std::string& v) {
                      if (v == "poisson")
                          c.pair_statistics = PairStatistics::Poisson;
                      else if (v == "thermal")
                          c.pair_statistics = PairStatistics::Thermal;
                      else
                          throw ValidationError(
                              "run.pair_statistics: expected poisson or thermal, got '" + v + "'");
                  },
                  [](const ExperimentConfig& c) {
                      return std::string(c.pair_statistics == PairStatistics::Thermal ? "thermal"
                                                                                      : "poisson");
                  }},
        num("noise.werner_v", &ExperimentConfig::werner_v),
        num("noise.phase_phi_deg", &ExperimentConfig::phase_phi_deg),
        num("noise.amplitude_imbalance", &ExperimentConfig::amplitude_imbalance),
        num("noise.background_flux_s", &ExperimentConfig::background_flux_s),
        num("noise.background_flux_i", &ExperimentConfig::background_flux_i),
        ConfigKey{"spectra.phase_factor",
                  [](ExperimentConfig& c, const std::string& v) {
                      if (v == "sin")
                          c.phase_factor = PhaseFactor::SinSq;
                      else if (v == "sinc")
                          c.phase_factor = PhaseFactor::SincSq;
                      else
                          throw ValidationError("spectra.phase_factor: expected sin or sinc, got '" +
                                                v + "'");
                  },
                  [](const ExperimentConfig& c) {
                      return std::string(c.phase_factor == PhaseFactor::SincSq ? "sinc" : "sin");
                  }},
        num("spectra.rate_scale", &ExperimentConfig::rate_scale),
    };
    return keys;
}

inline std::string trim(const std::string& text) {
    size_t a = text.find_first_not_of(" \t");
    size_t b = text.find_last_not_of(" \t");
    if (a == std::string::npos) return "";
    return text.substr(a, b - a + 1);
}

} // namespace detail

// Applies one "section.key = value" assignment.
inline void set_config_value(ExperimentConfig& config, const std::string& path,
                             const std::string& value) {
    for (const auto& key : detail::config_keys()) {
        if (path == key.path) {
            key.set(config, value);
            return;
        }
    }
    throw ValidationError(path + ": unknown configuration key");
}

// Cross-field validation with the offending key path in every message.
inline void validate(const ExperimentConfig& config) {
    auto require = [](bool ok, const char* message) {
        if (!ok) throw ValidationError(message);
    };
    require(config.fiber_length_m > 0.0, "fiber.length_m: must be > 0");
    require(config.delta_beta1_ps_per_m >= 0.0, "fiber.delta_beta1_ps_per_m: must be >= 0");
    require(config.gamma_per_w_m > 0.0, "fiber.gamma_per_w_m: must be > 0");
    require(!config.walkoff_override_m || *config.walkoff_override_m > 0.0,
            "fiber.walkoff_override_m: must be > 0 or auto");
    require(config.peak_power_w >= 0.0, "pump.peak_power_w: must be >= 0");
    require(config.theta_deg >= 0.0 && config.theta_deg < 180.0,
            "pump.theta_deg: must satisfy 0 <= theta < 180");
    require(config.pulse_width_ps > 0.0, "pump.pulse_width_ps: must be > 0");
    require(config.rep_rate_hz > 0.0, "pump.rep_rate_hz: must be > 0");
    require(config.center_wavelength_nm > 0.0, "pump.center_wavelength_nm: must be > 0");
    require(config.bandwidth_ghz > 0.0, "filters.bandwidth_ghz: must be > 0");
    require(config.transmission_s > 0.0 && config.transmission_s <= 1.0,
            "losses.transmission_s: must lie in (0, 1]");
    require(config.transmission_i > 0.0 && config.transmission_i <= 1.0,
            "losses.transmission_i: must lie in (0, 1]");
    require(config.ripple_depth >= 0.0 && config.ripple_depth < 1.0,
            "losses.ripple_depth: must lie in [0, 1)");
    require(config.efficiency_s >= 0.0 && config.efficiency_s <= 1.0,
            "detectors.efficiency_s: must lie in [0, 1]");
    require(config.efficiency_i >= 0.0 && config.efficiency_i <= 1.0,
            "detectors.efficiency_i: must lie in [0, 1]");
    require(config.dark_prob >= 0.0 && config.dark_prob < 1.0,
            "detectors.dark_prob: must lie in [0, 1)");
    require(config.gate_width_ns > 0.0, "detectors.gate_width_ns: must be > 0");
    require(config.duration_s > 0.0, "run.duration_s: must be > 0");
    require(config.mean_pairs_per_pulse >= 0.0, "run.mean_pairs_per_pulse: must be >= 0");
    require(config.werner_v >= 0.0 && config.werner_v <= 1.0,
            "noise.werner_v: must lie in [0, 1]");
    require(config.amplitude_imbalance > 0.0, "noise.amplitude_imbalance: must be > 0");
    require(config.background_flux_s >= 0.0, "noise.background_flux_s: must be >= 0");
    require(config.background_flux_i >= 0.0, "noise.background_flux_i: must be >= 0");
    require(config.rate_scale > 0.0, "spectra.rate_scale: must be > 0");
}

// Parses `[section]` / `key = value` text on top of the built-in defaults.
inline ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig config;
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string text = detail::trim(line);
        if (text.empty() || text.front() == '#' || text.front() == ';') continue;
        if (text.front() == '[') {
            if (text.back() != ']')
                throw SchemaError("config line " + std::to_string(line_no) +
                                  ": malformed section header '" + text + "'");
            section = detail::trim(text.substr(1, text.size() - 2));
            continue;
        }
        const size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw SchemaError("config line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + text + "'");
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string value = detail::trim(text.substr(eq + 1));
        if (section.empty())
            throw SchemaError("config line " + std::to_string(line_no) +
                              ": key '" + key + "' outside any [section]");
        set_config_value(config, section + "." + key, value);
    }
    return config;
}

// Canonical echo of a configuration; reparsing it reproduces the exact
// configuration (round-trip numeric precision).
inline void dump_config(std::ostream& os, const ExperimentConfig& config) {
    std::string section;
    for (const auto& key : detail::config_keys()) {
        const std::string path(key.path);
        const std::string sec = path.substr(0, path.find('.'));
        if (sec != section) {
            if (!section.empty()) os << "\n";
            os << "[" << sec << "]\n";
            section = sec;
        }
        os << path.substr(path.find('.') + 1) << " = " << key.get(config) << "\n";
    }
}

// All parameters as key/value strings, for CSV comment headers.
inline std::vector<std::pair<std::string, std::string>> config_params(
    const ExperimentConfig& config) {
    std::vector<std::pair<std::string, std::string>> params;
    for (const auto& key : detail::config_keys())
        params.emplace_back(key.path, key.get(config));
    return params;
}

} // namespace pmf
