#pragma once

#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>

#include "pmf/errors.hpp"
#include "pmf/fiber.hpp"

// Two-photon polarization state of the pair source and analytic measurement
// probabilities behind rotatable polarization analyzers.
//
// Density matrices live on the product basis {|HH>, |HV>, |VH>, |VV>}
// (signal qubit first). Analyzer angles are polarization transmission
// angles in degrees; P(theta) projects onto cos(theta)|H> + sin(theta)|V>.

namespace pmf {

using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;

struct TwoQubitState {
    Matrix4c rho = Matrix4c::Zero();
};

struct AnalyzerSetting {
    double theta_s_deg = 0.0;
    double theta_i_deg = 0.0;
};

enum class Side { Signal, Idler };

// Source imperfections folded into the emitted state. werner_v is the
// entangled fraction of an isotropic-noise mixture and equals the ideal
// fringe visibility. amplitude_imbalance is the VV/HH weight ratio of the
// entangled component; phase_phi_rad the relative phase between |HH> and
// |VV>.
struct SourceNoise {
    double werner_v = 1.0;
    double amplitude_imbalance = 1.0;
    double phase_phi_rad = 0.0;
};

inline void validate(const SourceNoise& noise) {
    if (!(noise.werner_v >= 0.0 && noise.werner_v <= 1.0))
        throw ValidationError("source noise: werner_v must lie in [0, 1]");
    if (!(noise.amplitude_imbalance > 0.0))
        throw ValidationError("source noise: amplitude imbalance must be > 0");
    if (!std::isfinite(noise.phase_phi_rad))
        throw ValidationError("source noise: phase must be finite");
}

inline void validate(const TwoQubitState& state) {
    const Matrix4c& rho = state.rho;
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
        throw ValidationError("state: density matrix is not Hermitian");
    if (std::abs(rho.trace().real() - 1.0) > 1e-12 || std::abs(rho.trace().imag()) > 1e-12)
        throw ValidationError("state: trace must be 1");
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw ValidationError("state: density matrix has a negative eigenvalue");
}

namespace detail {

inline Vector4c entangled_ket(const SourceNoise& noise) {
    // VV/HH probability-weight ratio r gives amplitude a = 1/(1+r) on HH.
    const double a = 1.0 / (1.0 + noise.amplitude_imbalance);
    Vector4c psi = Vector4c::Zero();
    psi(0) = std::sqrt(a);
    psi(3) = std::polar(std::sqrt(1.0 - a), noise.phase_phi_rad);
    return psi;
}

} // namespace detail

// rho = V |psi><psi| + (1-V) I/4 with
// |psi> = sqrt(a)|HH> + e^{i phi} sqrt(1-a)|VV>.
inline TwoQubitState make_state(const SourceNoise& noise) {
    validate(noise);
    const Vector4c psi = detail::entangled_ket(noise);
    Matrix4c rho = noise.werner_v * (psi * psi.adjoint());
    rho += (1.0 - noise.werner_v) / 4.0 * Matrix4c::Identity();
    return TwoQubitState{rho};
}

// Colored-noise alternative: the non-entangled fraction is a classical
// HH/VV mixture (residual distinguishability) instead of isotropic noise.
inline TwoQubitState make_colored_state(const SourceNoise& noise) {
    validate(noise);
    const Vector4c psi = detail::entangled_ket(noise);
    const double a = 1.0 / (1.0 + noise.amplitude_imbalance);
    Matrix4c rho = noise.werner_v * (psi * psi.adjoint());
    rho(0, 0) += (1.0 - noise.werner_v) * a;
    rho(3, 3) += (1.0 - noise.werner_v) * (1.0 - a);
    return TwoQubitState{rho};
}

inline Eigen::Vector2cd analyzer_ket(double theta_deg) {
    const double th = deg2rad(theta_deg);
    return Eigen::Vector2cd(std::cos(th), std::sin(th));
}

// <P(theta_s) x P(theta_i)> under rho.
inline double coincidence_prob(const TwoQubitState& state, const AnalyzerSetting& setting) {
    const Eigen::Vector2cd vs = analyzer_ket(setting.theta_s_deg);
    const Eigen::Vector2cd vi = analyzer_ket(setting.theta_i_deg);
    Vector4c v;
    v << vs(0) * vi(0), vs(0) * vi(1), vs(1) * vi(0), vs(1) * vi(1);
    return (v.adjoint() * state.rho * v)(0).real();
}

// Reduced single-qubit state of one side.
inline Eigen::Matrix2cd partial_trace(const TwoQubitState& state, Side keep) {
    Eigen::Matrix2cd red = Eigen::Matrix2cd::Zero();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
                if (keep == Side::Signal)
                    red(a, b) += state.rho(2 * a + c, 2 * b + c);
                else
                    red(a, b) += state.rho(2 * c + a, 2 * c + b);
            }
    return red;
}

// Projection probability behind a single analyzer, the other side ignored.
inline double single_prob(const TwoQubitState& state, Side side, double theta_deg) {
    const Eigen::Vector2cd v = analyzer_ket(theta_deg);
    const Eigen::Matrix2cd red = partial_trace(state, side);
    return (v.adjoint() * red * v)(0).real();
}

// (C_max - C_min)/(C_max + C_min) of the coincidence fringe versus theta_i
// at fixed theta_s. P(theta) has only the 2theta harmonic, so the fringe is
// an exact sinusoid C = c0 + cc cos(2 theta_i) + cs sin(2 theta_i) and the
// extrema follow from three probe settings. Returns NaN when the fringe
// vanishes identically (C_max + C_min = 0).
inline double visibility_analytic(const TwoQubitState& state, double theta_s_deg) {
    auto c = [&](double theta_i_deg) {
        return coincidence_prob(state, AnalyzerSetting{theta_s_deg, theta_i_deg});
    };
    const double c0 = 0.5 * (c(0.0) + c(90.0));
    const double cc = 0.5 * (c(0.0) - c(90.0));
    const double cs = 0.5 * (c(45.0) - c(135.0));
    const double amp = std::hypot(cc, cs);
    if (c0 <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return amp / c0;
}

} // namespace pmf
