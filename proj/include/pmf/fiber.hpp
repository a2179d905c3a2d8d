#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pmf/errors.hpp"

// Two-section birefringent fiber geometry: pump walk-off delays and the
// effective interaction lengths of the scalar and vector scattering
// processes. Internal unit system is (m, ps, W); wavelengths enter in nm.

namespace pmf {

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct FiberSegment {
    double length_m = 0.0;
    double delta_beta1_ps_m = 0.0; // group birefringence, ps/m
    double beta2_ps2_m = 0.0;      // group-velocity dispersion, ps^2/m
    double gamma_w_m = 0.0;        // nonlinear coefficient, 1/(W m)
    double axis_offset_deg = 0.0;  // slow-axis angle vs lab H; 0 or 90 only
};

inline void validate(const FiberSegment& seg) {
    if (!(seg.length_m > 0.0))
        throw ValidationError("fiber segment: length must be > 0, got " +
                              std::to_string(seg.length_m));
    if (!(seg.gamma_w_m > 0.0))
        throw ValidationError("fiber segment: gamma must be > 0");
    if (!(seg.delta_beta1_ps_m >= 0.0))
        throw ValidationError("fiber segment: delta_beta1 must be >= 0");
    if (seg.axis_offset_deg != 0.0 && seg.axis_offset_deg != 90.0)
        throw ValidationError("fiber segment: axis offset must be 0 or 90 degrees");
}

struct FiberLine {
    std::vector<FiberSegment> segments;

    double total_length_m() const {
        double sum = 0.0;
        for (const auto& s : segments) sum += s.length_m;
        return sum;
    }
};

inline void validate(const FiberLine& line) {
    if (line.segments.empty())
        throw ValidationError("fiber line: needs at least one segment");
    for (const auto& s : line.segments) validate(s);
}

// Single uniform section, slow axis on lab H.
inline FiberLine uniform_line(double length_m, double delta_beta1_ps_m,
                              double beta2_ps2_m, double gamma_w_m) {
    FiberLine line{{FiberSegment{length_m, delta_beta1_ps_m, beta2_ps2_m, gamma_w_m, 0.0}}};
    validate(line);
    return line;
}

// Two equal sections spliced at the midpoint with a 90 degree axis offset.
inline FiberLine mid_spliced_line(double total_length_m, double delta_beta1_ps_m,
                                  double beta2_ps2_m, double gamma_w_m) {
    const double half = total_length_m / 2.0;
    FiberLine line{{FiberSegment{half, delta_beta1_ps_m, beta2_ps2_m, gamma_w_m, 0.0},
                    FiberSegment{half, delta_beta1_ps_m, beta2_ps2_m, gamma_w_m, 90.0}}};
    validate(line);
    return line;
}

struct PumpConfig {
    double peak_power_w = 0.0;        // P_p
    double theta_deg = 0.0;           // pump polarization angle vs H, [0, 180)
    double pulse_width_ps = 0.0;      // FWHM
    double rep_rate_hz = 0.0;
    double center_wavelength_nm = 0.0;
};

inline void validate(const PumpConfig& pump) {
    if (!(pump.peak_power_w >= 0.0))
        throw ValidationError("pump: peak power must be >= 0");
    if (!(pump.theta_deg >= 0.0 && pump.theta_deg < 180.0))
        throw ValidationError("pump: theta must satisfy 0 <= theta < 180, got " +
                              std::to_string(pump.theta_deg));
    if (!(pump.pulse_width_ps > 0.0))
        throw ValidationError("pump: pulse width must be > 0");
    if (!(pump.rep_rate_hz > 0.0))
        throw ValidationError("pump: repetition rate must be > 0");
}

struct EffectiveLengths {
    double l_scalar_m = 0.0; // L_s, full fiber length
    double l_vector_m = 0.0; // L_v, region where both pump components overlap
};

// Splits the pump peak power onto the two fiber axes: (P cos^2, P sin^2).
inline std::pair<double, double> pump_split(const PumpConfig& pump) {
    validate(pump);
    const double th = deg2rad(pump.theta_deg);
    const double c = std::cos(th);
    const double s = std::sin(th);
    return {pump.peak_power_w * c * c, pump.peak_power_w * s * s};
}

// Distance after which the H and V pump envelopes have separated by one
// pulse width.
inline double walkoff_length(double pulse_width_ps, double delta_beta1_ps_m) {
    if (!(delta_beta1_ps_m > 0.0))
        throw ValidationError("walkoff length: delta_beta1 must be > 0 "
                              "(zero birefringence gives no walk-off)");
    if (!(pulse_width_ps >= 0.0))
        throw ValidationError("walkoff length: pulse width must be >= 0");
    return pulse_width_ps / delta_beta1_ps_m;
}

// Accumulated H-vs-V pump group delay at position z. Piecewise linear with
// slope +/- delta_beta1; the sign flips at every 90 degree splice.
inline double pump_delay_at(const FiberLine& line, double z_m) {
    validate(line);
    if (z_m < 0.0 || z_m > line.total_length_m())
        throw ValidationError("pump delay: z outside the fiber, z = " + std::to_string(z_m));
    double delay = 0.0;
    double z0 = 0.0;
    double sign = 1.0;
    double prev_offset = line.segments.front().axis_offset_deg;
    for (const auto& seg : line.segments) {
        if (seg.axis_offset_deg != prev_offset) sign = -sign;
        prev_offset = seg.axis_offset_deg;
        const double dz = std::min(seg.length_m, z_m - z0);
        if (dz <= 0.0) break;
        delay += sign * seg.delta_beta1_ps_m * dz;
        z0 += seg.length_m;
    }
    return delay;
}

// Uniform samples of the delay profile over [0, L]; column 0 is z in m,
// column 1 the delay in ps.
inline Eigen::ArrayX2d walkoff_delay_profile(const FiberLine& line, Eigen::Index z_samples) {
    validate(line);
    if (z_samples < 2)
        throw ValidationError("walkoff profile: need at least 2 samples");
    const double total = line.total_length_m();
    Eigen::ArrayX2d profile(z_samples, 2);
    profile.col(0) = Eigen::ArrayXd::LinSpaced(z_samples, 0.0, total);
    for (Eigen::Index k = 0; k < z_samples; ++k)
        profile(k, 1) = pump_delay_at(line, profile(k, 0));
    return profile;
}

// L_s is the total fiber length; L_v is double the walk-off length, clamped
// to L_s. The override pins the walk-off length directly instead of deriving
// it from the pulse width. With zero birefringence the pump
// components never separate and L_v equals L_s.
inline EffectiveLengths effective_lengths(const FiberLine& line, const PumpConfig& pump,
                                          std::optional<double> walkoff_override_m = {}) {
    validate(line);
    validate(pump);
    const double l_scalar = line.total_length_m();
    double walkoff;
    if (walkoff_override_m) {
        if (!(*walkoff_override_m > 0.0))
            throw ValidationError("effective lengths: walk-off override must be > 0");
        walkoff = *walkoff_override_m;
    } else if (line.segments.front().delta_beta1_ps_m == 0.0) {
        walkoff = l_scalar; // no walk-off at all
    } else {
        walkoff = walkoff_length(pump.pulse_width_ps, line.segments.front().delta_beta1_ps_m);
    }
    const double l_vector = std::min(2.0 * walkoff, l_scalar);
    return EffectiveLengths{l_scalar, l_vector};
}

} // namespace pmf
