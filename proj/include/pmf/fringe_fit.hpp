#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "pmf/errors.hpp"
#include "pmf/fiber.hpp"

// Two-photon interference fringe fitting. The model is
//
//   C(theta_i) = C0 * (1 + V cos(2 (theta_i - theta0)))
//
// with the 180 degree period fixed by the measurement physics; only C0, V
// and theta0 are free. Weighted least squares with Poisson weights
// 1/max(counts, 1), solved by Levenberg-Marquardt on the 3x3 normal
// equations. Standard errors come from the inverse curvature (J^T W J)^-1
// at the optimum; with inverse-variance weights no chi-square rescaling is
// applied.

namespace pmf {

struct FringeDataset {
    double theta_s_deg = 0.0;
    std::vector<double> theta_i_deg;
    std::vector<double> counts;       // nonnegative; coincidence counts per point
    std::uint64_t pulses_per_point = 0;
};

inline void validate(const FringeDataset& data) {
    if (data.theta_i_deg.size() != data.counts.size())
        throw ValidationError("fringe dataset: angle and count lists differ in length");
    std::set<double> distinct(data.theta_i_deg.begin(), data.theta_i_deg.end());
    if (distinct.size() < 4)
        throw ValidationError("fringe dataset: need at least 4 distinct theta_i values");
    for (double c : data.counts)
        if (!(c >= 0.0))
            throw ValidationError("fringe dataset: counts must be >= 0");
}

struct FitResult {
    double visibility = 0.0;
    double phase_deg = 0.0;        // theta0, reported in [0, 180)
    double mean_level = 0.0;       // C0
    double visibility_stderr = 0.0;
    double phase_stderr_deg = 0.0;
    double mean_level_stderr = 0.0;
    double reduced_chi_square = 0.0;
    bool converged = false;
    bool visibility_clamped = false; // unclamped estimate left [0, 1]
    int iterations = 0;
};

// Model-free (max - min)/(max + min) over the raw counts.
inline double raw_visibility(const FringeDataset& data) {
    if (data.counts.size() < 2)
        throw ValidationError("raw visibility: need at least 2 points");
    const auto [lo, hi] = std::minmax_element(data.counts.begin(), data.counts.end());
    if (*hi + *lo == 0.0)
        throw ValidationError("raw visibility: all counts are zero");
    return (*hi - *lo) / (*hi + *lo);
}

namespace detail {

struct FringeObjective {
    const std::vector<double>& theta_rad;
    const std::vector<double>& counts;
    const std::vector<double>& weights;

    double chi_square(const Eigen::Vector3d& p) const {
        double chi2 = 0.0;
        for (size_t k = 0; k < counts.size(); ++k) {
            const double m = p[0] * (1.0 + p[1] * std::cos(2.0 * (theta_rad[k] - p[2])));
            const double r = counts[k] - m;
            chi2 += weights[k] * r * r;
        }
        return chi2;
    }

    void normal_equations(const Eigen::Vector3d& p, Eigen::Matrix3d& jtj,
                          Eigen::Vector3d& jtr) const {
        jtj.setZero();
        jtr.setZero();
        for (size_t k = 0; k < counts.size(); ++k) {
            const double arg = 2.0 * (theta_rad[k] - p[2]);
            const double c = std::cos(arg);
            const double s = std::sin(arg);
            Eigen::Vector3d j(1.0 + p[1] * c,          // d/dC0
                              p[0] * c,                // d/dV
                              2.0 * p[0] * p[1] * s);  // d/dtheta0
            const double r = counts[k] - p[0] * (1.0 + p[1] * c);
            jtj.noalias() += weights[k] * j * j.transpose();
            jtr.noalias() += weights[k] * r * j;
        }
    }
};

} // namespace detail

// Weighted nonlinear least squares of the fringe model. Initialization is
// deterministic: C0 from the mean, V from the raw visibility, theta0 from
// the discrete Fourier phase of the cos(2 theta) component.
inline FitResult fit_fringe(const FringeDataset& data) {
    validate(data);

    const size_t n = data.counts.size();
    double total = 0.0;
    for (double c : data.counts) total += c;
    if (total == 0.0)
        throw ValidationError("fringe fit: all counts are zero");

    std::vector<double> theta_rad(n), weights(n);
    for (size_t k = 0; k < n; ++k) {
        theta_rad[k] = deg2rad(data.theta_i_deg[k]);
        weights[k] = 1.0 / std::max(data.counts[k], 1.0); // Poisson variance, floored
    }

    Eigen::Vector3d p;
    p[0] = total / static_cast<double>(n);
    p[1] = std::min(raw_visibility(data), 0.999);
    double re = 0.0, im = 0.0;
    for (size_t k = 0; k < n; ++k) {
        re += data.counts[k] * std::cos(2.0 * theta_rad[k]);
        im += data.counts[k] * std::sin(2.0 * theta_rad[k]);
    }
    p[2] = 0.5 * std::atan2(im, re);

    const detail::FringeObjective obj{theta_rad, data.counts, weights};
    double chi2 = obj.chi_square(p);
    double lambda = 1e-3;
    FitResult result;
    const int max_iterations = 200;
    for (result.iterations = 0; result.iterations < max_iterations; ++result.iterations) {
        Eigen::Matrix3d jtj;
        Eigen::Vector3d jtr;
        obj.normal_equations(p, jtj, jtr);

        bool stepped = false;
        for (int attempt = 0; attempt < 16 && !stepped; ++attempt) {
            Eigen::Matrix3d damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Eigen::Vector3d delta = damped.ldlt().solve(jtr);
            const Eigen::Vector3d trial = p + delta;
            const double trial_chi2 = obj.chi_square(trial);
            if (std::isfinite(trial_chi2) && trial_chi2 <= chi2) {
                const double drop = chi2 - trial_chi2;
                p = trial;
                chi2 = trial_chi2;
                lambda = std::max(lambda * 0.3, 1e-14);
                stepped = true;
                if (drop <= 1e-14 * (chi2 + 1e-300) &&
                    delta.cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + p.cwiseAbs().maxCoeff()))
                    result.converged = true;
            } else {
                lambda *= 10.0;
            }
        }
        // No acceptable step at any damping: already at the minimum.
        if (!stepped) result.converged = true;
        if (!stepped || result.converged) break;
    }

    // Undamped Gauss-Newton polish: chi-square comparisons saturate at
    // rounding precision before the gradient does, so finish on the normal
    // equations directly. Guarded to small steps only.
    if (result.converged) {
        for (int polish = 0; polish < 4; ++polish) {
            Eigen::Matrix3d jtj;
            Eigen::Vector3d jtr;
            obj.normal_equations(p, jtj, jtr);
            const Eigen::Vector3d delta = jtj.ldlt().solve(jtr);
            if (!delta.allFinite() ||
                delta.cwiseAbs().maxCoeff() > 1e-4 * (1.0 + p.cwiseAbs().maxCoeff()))
                break;
            const Eigen::Vector3d trial = p + delta;
            const double trial_chi2 = obj.chi_square(trial);
            if (!(trial_chi2 <= chi2 * (1.0 + 1e-9))) break;
            p = trial;
            chi2 = std::min(chi2, trial_chi2);
        }
    }

    // Canonical parameter region: C0 > 0, V >= 0, theta0 in [0, 180).
    if (p[0] < 0.0) { p[0] = -p[0]; p[1] = -p[1]; }
    if (p[1] < 0.0) { p[1] = -p[1]; p[2] += std::numbers::pi / 2.0; }
    p[2] = std::fmod(p[2], std::numbers::pi);
    if (p[2] < 0.0) p[2] += std::numbers::pi;

    Eigen::Matrix3d jtj;
    Eigen::Vector3d jtr;
    obj.normal_equations(p, jtj, jtr);
    const Eigen::Matrix3d cov = jtj.inverse();

    result.mean_level = p[0];
    result.visibility = p[1];
    result.phase_deg = rad2deg(p[2]);
    result.mean_level_stderr = std::sqrt(std::max(cov(0, 0), 0.0));
    result.visibility_stderr = std::sqrt(std::max(cov(1, 1), 0.0));
    result.phase_stderr_deg = rad2deg(std::sqrt(std::max(cov(2, 2), 0.0)));
    result.reduced_chi_square = n > 3 ? chi2 / static_cast<double>(n - 3) : 0.0;
    if (result.visibility > 1.0) {
        result.visibility_clamped = true;
        result.visibility = 1.0;
    }
    return result;
}

} // namespace pmf
