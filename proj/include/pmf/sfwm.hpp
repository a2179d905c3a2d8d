#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include <Eigen/Dense>

#include "pmf/errors.hpp"
#include "pmf/fiber.hpp"

// Photon-flux spectral densities of the scalar and vector SFWM scattering
// processes in a birefringent fiber, plus band-integrated pair rates.
//
// Detuning convention: user-facing values are ordinary frequency detunings
// nu = Omega/2pi in THz; the PFSD formulas take the angular detuning Omega
// in rad/ps. With (m, ps, W) units every phase argument is dimensionless.
//
//   f_HH = (g P_H L_s)^2 sin^2[(b2 W^2 + 2 g P_H) L_s/2]
//   f_VV = (g P_V L_s)^2 sin^2[(b2 W^2 + 2 g P_V) L_s/2]
//   f_HV = 4/9 (g sqrt(P_H P_V) L_v)^2 sin^2[(db1 W + b2 W^2 + g(P_H+P_V)) L_v/2]
//   f_VH = 4/9 (g sqrt(P_H P_V) L_v)^2 sin^2[(db1 W - b2 W^2 - g(P_H+P_V)) L_v/2]

namespace pmf {

inline double omega_from_thz(double detuning_thz) {
    return 2.0 * std::numbers::pi * detuning_thz; // rad/ps
}

// sin^2 is the printed phase factor; sinc^2 is the phase-matched variant
// used by some conventions and is selectable for comparison.
enum class PhaseFactor { SinSq, SincSq };

inline double phase_factor(double arg, PhaseFactor kind) {
    if (kind == PhaseFactor::SincSq) {
        if (arg == 0.0) return 1.0;
        const double s = std::sin(arg) / arg;
        return s * s;
    }
    const double s = std::sin(arg);
    return s * s;
}

struct DetuningGrid {
    Eigen::ArrayXd detuning_thz; // strictly increasing

    static DetuningGrid linspaced(double lo_thz, double hi_thz, Eigen::Index n) {
        if (n < 2 || !(lo_thz < hi_thz))
            throw ValidationError("detuning grid: need n >= 2 and lo < hi");
        return DetuningGrid{Eigen::ArrayXd::LinSpaced(n, lo_thz, hi_thz)};
    }
};

inline void validate(const DetuningGrid& grid) {
    if (grid.detuning_thz.size() < 2)
        throw ValidationError("detuning grid: need at least 2 points");
    for (Eigen::Index k = 0; k + 1 < grid.detuning_thz.size(); ++k) {
        if (!(grid.detuning_thz[k] < grid.detuning_thz[k + 1]))
            throw ValidationError("detuning grid: values must be strictly increasing");
        if (!std::isfinite(grid.detuning_thz[k]))
            throw ValidationError("detuning grid: values must be finite");
    }
}

struct PfsdSpectrum {
    DetuningGrid grid;
    Eigen::ArrayXd f_hh, f_vv, f_hv, f_vh; // dimensionless, per grid point
};

struct FilterSpec {
    double center_detuning_thz = 0.0; // signed; signal positive, idler negative
    double bandwidth_ghz = 0.0;       // rectangular passband
};

inline void validate(const FilterSpec& f) {
    if (!(f.bandwidth_ghz > 0.0))
        throw ValidationError("filter: bandwidth must be > 0");
}

// Scalar-process PFSD for one axis carrying pump power p_axis_w.
inline double pfsd_scalar(double omega_rad_ps, double p_axis_w,
                          const EffectiveLengths& lengths, const FiberSegment& segment,
                          PhaseFactor kind = PhaseFactor::SinSq) {
    if (!(p_axis_w >= 0.0))
        throw ValidationError("pfsd: pump power must be >= 0");
    const double g = segment.gamma_w_m;
    const double ls = lengths.l_scalar_m;
    const double amp = g * p_axis_w * ls;
    const double arg = (segment.beta2_ps2_m * omega_rad_ps * omega_rad_ps + 2.0 * g * p_axis_w) * ls / 2.0;
    return amp * amp * phase_factor(arg, kind);
}

// Vector-process PFSDs (f_HV, f_VH). The two phase arguments differ only in
// the sign of the beta2 and power terms.
inline std::pair<double, double> pfsd_vector(double omega_rad_ps, double p_h_w, double p_v_w,
                                             const EffectiveLengths& lengths,
                                             const FiberSegment& segment,
                                             PhaseFactor kind = PhaseFactor::SinSq) {
    if (!(p_h_w >= 0.0) || !(p_v_w >= 0.0))
        throw ValidationError("pfsd: pump powers must be >= 0");
    const double g = segment.gamma_w_m;
    const double lv = lengths.l_vector_m;
    const double amp = g * std::sqrt(p_h_w * p_v_w) * lv;
    const double pre = 4.0 / 9.0 * amp * amp;
    const double walk = segment.delta_beta1_ps_m * omega_rad_ps;
    const double match = segment.beta2_ps2_m * omega_rad_ps * omega_rad_ps + g * (p_h_w + p_v_w);
    const double arg_hv = (walk + match) * lv / 2.0;
    const double arg_vh = (walk - match) * lv / 2.0;
    return {pre * phase_factor(arg_hv, kind), pre * phase_factor(arg_vh, kind)};
}

// All four PFSDs over a detuning grid. Evaluation is independent per grid
// point, so the result does not depend on evaluation order.
inline PfsdSpectrum spectrum(const DetuningGrid& grid, const PumpConfig& pump,
                             const FiberLine& line, const EffectiveLengths& lengths,
                             PhaseFactor kind = PhaseFactor::SinSq) {
    validate(grid);
    validate(line);
    const auto [p_h, p_v] = pump_split(pump);
    const FiberSegment& seg = line.segments.front();
    const Eigen::Index n = grid.detuning_thz.size();
    PfsdSpectrum spec{grid, Eigen::ArrayXd(n), Eigen::ArrayXd(n), Eigen::ArrayXd(n), Eigen::ArrayXd(n)};
    for (Eigen::Index k = 0; k < n; ++k) {
        const double omega = omega_from_thz(grid.detuning_thz[k]);
        spec.f_hh[k] = pfsd_scalar(omega, p_h, lengths, seg, kind);
        spec.f_vv[k] = pfsd_scalar(omega, p_v, lengths, seg, kind);
        std::tie(spec.f_hv[k], spec.f_vh[k]) = pfsd_vector(omega, p_h, p_v, lengths, seg, kind);
    }
    return spec;
}

// (f_HH + f_VV) / (f_HV + f_VH) at one detuning. A vanishing vector PFSD
// (single-axis pump) reports infinite suppression rather than failing.
inline double suppression_ratio(double detuning_thz, const PumpConfig& pump,
                                const FiberLine& line, const EffectiveLengths& lengths,
                                PhaseFactor kind = PhaseFactor::SinSq) {
    validate(line);
    const auto [p_h, p_v] = pump_split(pump);
    const FiberSegment& seg = line.segments.front();
    const double omega = omega_from_thz(detuning_thz);
    const double scalar = pfsd_scalar(omega, p_h, lengths, seg, kind) +
                          pfsd_scalar(omega, p_v, lengths, seg, kind);
    const auto [f_hv, f_vh] = pfsd_vector(omega, p_h, p_v, lengths, seg, kind);
    const double vector = f_hv + f_vh;
    if (vector == 0.0) return std::numeric_limits<double>::infinity();
    return scalar / vector;
}

enum class BandComponents { All, Scalar, Vector };

struct BandRate {
    double pairs_per_pulse = 0.0;  // mu
    double pairs_per_second = 0.0;
};

namespace detail {

// Trapezoidal integral of y over [lo, hi] with linear interpolation at the
// passband edges. The grid must cover the passband.
inline double trapz_band(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, double lo, double hi) {
    if (lo < x[0] || hi > x[x.size() - 1])
        throw ValidationError("band rate: filter passband extends outside the spectrum grid");
    if (hi <= lo) return 0.0;
    auto value_at = [&](double xv, Eigen::Index seg) {
        const double t = (xv - x[seg]) / (x[seg + 1] - x[seg]);
        return y[seg] + t * (y[seg + 1] - y[seg]);
    };
    Eigen::Index k = 0;
    while (x[k + 1] <= lo && k + 2 < x.size()) ++k;
    double integral = 0.0;
    double x_prev = lo;
    double y_prev = value_at(lo, k);
    while (k + 1 < x.size() && x[k + 1] < hi) {
        integral += 0.5 * (y_prev + y[k + 1]) * (x[k + 1] - x_prev);
        x_prev = x[k + 1];
        y_prev = y[k + 1];
        ++k;
    }
    integral += 0.5 * (y_prev + value_at(hi, k)) * (hi - x_prev);
    return integral;
}

} // namespace detail

// Integrates the selected PFSD components over the filter passband and
// converts to mean pairs per pulse and pairs per second. The PFSD carries
// the dimensionless normalization of the formulas above; rate_scale is the
// single spectral-density-to-rate constant (default 1). duty is the pulse
// duty cycle, pulse_width * rep_rate.
inline BandRate band_rate(const PfsdSpectrum& spec, const FilterSpec& filter,
                          double rep_rate_hz, double duty, double rate_scale = 1.0,
                          BandComponents components = BandComponents::All) {
    if (!(filter.bandwidth_ghz >= 0.0)) // zero width is a valid degenerate band
        throw ValidationError("band rate: bandwidth must be >= 0");
    if (!(rep_rate_hz > 0.0) || !(duty > 0.0))
        throw ValidationError("band rate: rep rate and duty must be > 0");
    const double half_bw_thz = filter.bandwidth_ghz / 1000.0 / 2.0;
    const double lo = filter.center_detuning_thz - half_bw_thz;
    const double hi = filter.center_detuning_thz + half_bw_thz;
    Eigen::ArrayXd total;
    switch (components) {
        case BandComponents::Scalar: total = spec.f_hh + spec.f_vv; break;
        case BandComponents::Vector: total = spec.f_hv + spec.f_vh; break;
        default: total = spec.f_hh + spec.f_vv + spec.f_hv + spec.f_vh; break;
    }
    const double integral_thz = detail::trapz_band(spec.grid.detuning_thz, total, lo, hi);
    // THz integral -> pairs/s while the pulse is on, then duty-cycle average.
    const double in_pulse_rate = rate_scale * integral_thz * 1e12;
    const double pairs_per_second = in_pulse_rate * duty;
    return BandRate{pairs_per_second / rep_rate_hz, pairs_per_second};
}

} // namespace pmf
