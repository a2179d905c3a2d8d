#include "doctest.h"

#include <cmath>
#include <random>

#include "pmf/fiber.hpp"
#include "pmf/sfwm.hpp"

using namespace pmf;

namespace {

// Independent long-double oracle for the PFSD expressions, written straight
// from the formulas and kept separate from the library evaluation path.
namespace oracle {

constexpr long double kGamma = 3e-3L;
constexpr long double kBeta2 = -3.824e-3L;
constexpr long double kDb1 = 0.286L;

long double scalar(long double omega, long double p, long double ls) {
    const long double amp = kGamma * p * ls;
    const long double arg = (kBeta2 * omega * omega + 2.0L * kGamma * p) * ls / 2.0L;
    return amp * amp * sinl(arg) * sinl(arg);
}

long double vector_hv(long double omega, long double ph, long double pv, long double lv) {
    const long double amp = kGamma * sqrtl(ph * pv) * lv;
    const long double arg =
        (kDb1 * omega + kBeta2 * omega * omega + kGamma * (ph + pv)) * lv / 2.0L;
    return 4.0L / 9.0L * amp * amp * sinl(arg) * sinl(arg);
}

long double vector_vh(long double omega, long double ph, long double pv, long double lv) {
    const long double amp = kGamma * sqrtl(ph * pv) * lv;
    const long double arg =
        (kDb1 * omega - kBeta2 * omega * omega - kGamma * (ph + pv)) * lv / 2.0L;
    return 4.0L / 9.0L * amp * amp * sinl(arg) * sinl(arg);
}

long double suppression(long double detuning_thz) {
    const long double omega = 2.0L * 3.14159265358979323846264338327950288L * detuning_thz;
    const long double s = 2.0L * scalar(omega, 0.4L, 150.0L);
    const long double v = vector_hv(omega, 0.4L, 0.4L, 15.0L) + vector_vh(omega, 0.4L, 0.4L, 15.0L);
    return s / v;
}

} // namespace oracle

FiberSegment default_segment() { return FiberSegment{75.0, 0.286, -3.824e-3, 3e-3, 0.0}; }

FiberLine default_line() { return mid_spliced_line(150.0, 0.286, -3.824e-3, 3e-3); }

PumpConfig default_pump() { return PumpConfig{0.8, 45.0, 20.0, 1e6, 1552.75}; }

EffectiveLengths default_lengths() { return EffectiveLengths{150.0, 15.0}; }

double uniform(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

} // namespace

TEST_CASE("scalar PFSD matches the frozen oracle values") {
    const EffectiveLengths lengths = default_lengths();
    const FiberSegment seg = default_segment();

    // Omega = 0, P = 0.4 W: 0.18^2 sin^2(0.18)
    CHECK(pfsd_scalar(0.0, 0.4, lengths, seg) ==
          doctest::Approx(1.038471456417456e-3).epsilon(1e-12).scale(0.0));
    CHECK(static_cast<double>(oracle::scalar(0.0L, 0.4L, 150.0L)) ==
          doctest::Approx(1.038471456417456e-3).epsilon(1e-12).scale(0.0));

    // 0.2 THz detuning (kappa = -3.6386e-3 / m)
    const double omega = omega_from_thz(0.2);
    CHECK(pfsd_scalar(omega, 0.4, lengths, seg) ==
          doctest::Approx(2.3536005860170296e-3).epsilon(1e-9).scale(0.0));
    CHECK(pfsd_scalar(omega, 0.4, lengths, seg) ==
          doctest::Approx(static_cast<double>(oracle::scalar(omega, 0.4L, 150.0L))).epsilon(1e-9));

    CHECK(pfsd_scalar(omega, 0.0, lengths, seg) == 0.0);
}

TEST_CASE("vector PFSDs match the frozen oracle values") {
    const EffectiveLengths lengths = default_lengths();
    const FiberSegment seg = default_segment();
    const double omega = omega_from_thz(0.2);

    const auto [f_hv, f_vh] = pfsd_vector(omega, 0.4, 0.4, lengths, seg);
    CHECK(f_hv == doctest::Approx(2.9931130259831555e-5).epsilon(1e-9).scale(0.0));
    CHECK(f_vh == doctest::Approx(2.3815907950259842e-5).epsilon(1e-9).scale(0.0));
    CHECK(f_hv == doctest::Approx(static_cast<double>(oracle::vector_hv(omega, 0.4L, 0.4L, 15.0L)))
                      .epsilon(1e-9));
    CHECK(f_vh == doctest::Approx(static_cast<double>(oracle::vector_vh(omega, 0.4L, 0.4L, 15.0L)))
                      .epsilon(1e-9));

    // Pump on a single axis: no vector process.
    const auto [z_hv, z_vh] = pfsd_vector(omega, 0.0, 0.8, lengths, seg);
    CHECK(z_hv == 0.0);
    CHECK(z_vh == 0.0);
}

TEST_CASE("vector PFSD sign symmetry f_HV(-omega) = f_VH(omega)") {
    const EffectiveLengths lengths = default_lengths();
    const FiberSegment seg = default_segment();
    std::mt19937_64 rng(23);
    for (int k = 0; k < 200; ++k) {
        const double omega = -8.0 + 16.0 * uniform(rng);
        const double ph = 0.8 * uniform(rng);
        const double pv = 0.8 * uniform(rng);
        const auto [hv_neg, vh_neg] = pfsd_vector(-omega, ph, pv, lengths, seg);
        const auto [hv_pos, vh_pos] = pfsd_vector(omega, ph, pv, lengths, seg);
        CHECK(hv_neg == doctest::Approx(vh_pos).epsilon(1e-12).scale(1e-30));
        CHECK(vh_neg == doctest::Approx(hv_pos).epsilon(1e-12).scale(1e-30));
    }
}

TEST_CASE("scalar PFSD is even in omega") {
    const EffectiveLengths lengths = default_lengths();
    const FiberSegment seg = default_segment();
    std::mt19937_64 rng(29);
    for (int k = 0; k < 200; ++k) {
        const double omega = -8.0 + 16.0 * uniform(rng);
        const double p = 0.8 * uniform(rng);
        CHECK(pfsd_scalar(omega, p, lengths, seg) == pfsd_scalar(-omega, p, lengths, seg));
    }
}

TEST_CASE("gamma -> 0 limit kills every PFSD") {
    const EffectiveLengths lengths = default_lengths();
    FiberSegment seg = default_segment();
    seg.gamma_w_m = 0.0; // raw formula limit; constructed lines reject gamma = 0
    const double omega = omega_from_thz(0.3);
    CHECK(pfsd_scalar(omega, 0.4, lengths, seg) == 0.0);
    const auto [f_hv, f_vh] = pfsd_vector(omega, 0.4, 0.4, lengths, seg);
    CHECK(f_hv == 0.0);
    CHECK(f_vh == 0.0);
}

TEST_CASE("spectrum over a grid: symmetry cases") {
    const auto grid = DetuningGrid::linspaced(-1.0, 1.0, 401);
    const FiberLine line = default_line();
    const EffectiveLengths lengths = default_lengths();

    PumpConfig pump = default_pump(); // theta = 45
    const PfsdSpectrum spec = spectrum(grid, pump, line, lengths);
    for (Eigen::Index k = 0; k < grid.detuning_thz.size(); ++k) {
        CHECK(spec.f_hh[k] == doctest::Approx(spec.f_vv[k]).epsilon(1e-12).scale(1e-30));
        CHECK(spec.f_hh[k] >= 0.0);
        CHECK(spec.f_hv[k] >= 0.0);
    }

    pump.theta_deg = 0.0; // single-axis pump
    const PfsdSpectrum axis = spectrum(grid, pump, line, lengths);
    for (Eigen::Index k = 0; k < grid.detuning_thz.size(); ++k) {
        CHECK(axis.f_vv[k] == 0.0);
        CHECK(axis.f_hv[k] == 0.0);
        CHECK(axis.f_vh[k] == 0.0);
    }
}

TEST_CASE("relabeling invariance: theta -> 90 - theta with H <-> V swap") {
    const EffectiveLengths lengths = default_lengths();
    const FiberSegment seg = default_segment();
    FiberSegment flipped = seg;
    flipped.delta_beta1_ps_m = -seg.delta_beta1_ps_m; // axis swap flips the walk-off sign
    std::mt19937_64 rng(31);
    for (int k = 0; k < 200; ++k) {
        const double omega = -8.0 + 16.0 * uniform(rng);
        const double theta = 180.0 * uniform(rng) * 0.4999;
        PumpConfig pump = default_pump();
        pump.theta_deg = theta;
        const auto [p_h, p_v] = pump_split(pump);
        pump.theta_deg = 90.0 - theta;
        const auto [q_h, q_v] = pump_split(pump);

        CHECK(pfsd_scalar(omega, q_v, lengths, seg) ==
              doctest::Approx(pfsd_scalar(omega, p_h, lengths, seg)).epsilon(1e-9).scale(1e-30));
        CHECK(pfsd_scalar(omega, q_h, lengths, seg) ==
              doctest::Approx(pfsd_scalar(omega, p_v, lengths, seg)).epsilon(1e-9).scale(1e-30));

        const auto [f_hv, f_vh] = pfsd_vector(omega, p_h, p_v, lengths, seg);
        const auto [g_hv, g_vh] = pfsd_vector(omega, q_h, q_v, lengths, flipped);
        CHECK(g_vh == doctest::Approx(f_hv).epsilon(1e-9).scale(1e-30));
        CHECK(g_hv == doctest::Approx(f_vh).epsilon(1e-9).scale(1e-30));
    }
}

TEST_CASE("suppression ratio at 0.2 THz matches the frozen oracle value") {
    const double ratio = suppression_ratio(0.2, default_pump(), default_line(), default_lengths());
    CHECK(ratio == doctest::Approx(87.5806617219374).epsilon(1e-9));
    CHECK(ratio == doctest::Approx(static_cast<double>(oracle::suppression(0.2L))).epsilon(1e-9));
    // "about two orders of magnitude"
    CHECK(ratio > 50.0);
    CHECK(ratio < 200.0);
}

TEST_CASE("suppression ratio is infinite for a single-axis pump") {
    PumpConfig pump = default_pump();
    pump.theta_deg = 0.0;
    CHECK(std::isinf(suppression_ratio(0.2, pump, default_line(), default_lengths())));
}

TEST_CASE("suppression ratio with matched phases is the prefactor ratio 9/4") {
    // L_v = L_s and zero birefringence align all four phase arguments, so
    // (f_HH + f_VV) / (f_HV + f_VH) = 2 / (2 * 4/9) = 9/4 exactly, at any
    // detuning where the common sin^2 is nonzero.
    const FiberLine line = mid_spliced_line(150.0, 0.0, -3.824e-3, 3e-3);
    const EffectiveLengths lengths{150.0, 150.0};
    CHECK(suppression_ratio(0.0, default_pump(), line, lengths) ==
          doctest::Approx(2.25).epsilon(1e-12));
}

TEST_CASE("scalar PFSD zeros sit where the phase argument vanishes or hits -pi") {
    const EffectiveLengths lengths = default_lengths();
    const FiberSegment seg = default_segment();
    const double p = 0.4;
    // Interior dip: beta2 W^2 + 2 gamma P = 0.
    const double omega_dip = std::sqrt(2.0 * seg.gamma_w_m * p / -seg.beta2_ps2_m);
    CHECK(pfsd_scalar(omega_dip, p, lengths, seg) < 1e-20);
    // First lobe zero: (beta2 W^2 + 2 gamma P) L_s / 2 = -pi.
    const double omega_zero = std::sqrt(
        (2.0 * std::numbers::pi / lengths.l_scalar_m + 2.0 * seg.gamma_w_m * p) /
        -seg.beta2_ps2_m);
    CHECK(pfsd_scalar(omega_zero, p, lengths, seg) < 1e-18);
    CHECK(omega_zero / (2.0 * std::numbers::pi) == doctest::Approx(0.5416).epsilon(1e-3));
    // The lobe peak in between dwarfs both zeros.
    CHECK(pfsd_scalar(0.5 * (omega_dip + omega_zero), p, lengths, seg) > 1e-4);
}

TEST_CASE("vector PFSD is maximal for the balanced pump split") {
    const EffectiveLengths lengths = default_lengths();
    const FiberSegment seg = default_segment();
    const double omega = omega_from_thz(0.2);
    double best = -1.0, arg_best = -1.0;
    for (double theta = 5.0; theta <= 85.0; theta += 5.0) {
        PumpConfig pump = default_pump();
        pump.theta_deg = theta;
        const auto [p_h, p_v] = pump_split(pump);
        const auto [f_hv, f_vh] = pfsd_vector(omega, p_h, p_v, lengths, seg);
        if (f_hv + f_vh > best) {
            best = f_hv + f_vh;
            arg_best = theta;
        }
    }
    CHECK(arg_best == 45.0);
}

TEST_CASE("suppression ratio grows as L_v shrinks (within the first lobe)") {
    double previous = 0.0;
    for (int k = 0; k < 30; ++k) {
        const double lv = 30.0 - k; // 30 m down to 1 m at 0.05 THz: first lobe
        const EffectiveLengths lengths{150.0, lv};
        const double ratio = suppression_ratio(0.05, default_pump(), default_line(), lengths);
        if (k > 0) CHECK(ratio > previous);
        previous = ratio;
    }
}

TEST_CASE("sinc^2 variant relates to sin^2 by the squared argument") {
    const EffectiveLengths lengths = default_lengths();
    const FiberSegment seg = default_segment();
    const double omega = omega_from_thz(0.2);
    const double arg = (seg.beta2_ps2_m * omega * omega + 2.0 * seg.gamma_w_m * 0.4) * 150.0 / 2.0;
    const double sin_form = pfsd_scalar(omega, 0.4, lengths, seg, PhaseFactor::SinSq);
    const double sinc_form = pfsd_scalar(omega, 0.4, lengths, seg, PhaseFactor::SincSq);
    CHECK(sinc_form == doctest::Approx(sin_form / (arg * arg)).epsilon(1e-12));
}

TEST_CASE("band rate: degenerate and analytic cases") {
    const auto grid = DetuningGrid::linspaced(-1.0, 1.0, 2001);
    const PfsdSpectrum spec = spectrum(grid, default_pump(), default_line(), default_lengths());
    const double duty = 20.0 * 1e-12 * 1e6;

    // Zero-width filter: no pairs.
    const BandRate zero = band_rate(spec, FilterSpec{0.2, 0.0}, 1e6, duty);
    CHECK(zero.pairs_per_second == 0.0);
    CHECK(zero.pairs_per_pulse == 0.0);

    // Flat spectrum: rate is linear in the bandwidth.
    PfsdSpectrum flat = spec;
    flat.f_hh.setConstant(1.0);
    flat.f_vv.setConstant(0.5);
    flat.f_hv.setZero();
    flat.f_vh.setZero();
    const BandRate b1 = band_rate(flat, FilterSpec{0.2, 50.0}, 1e6, duty);
    const BandRate b2 = band_rate(flat, FilterSpec{0.2, 100.0}, 1e6, duty);
    CHECK(b2.pairs_per_pulse == doctest::Approx(2.0 * b1.pairs_per_pulse).epsilon(1e-9));
    CHECK(b1.pairs_per_second ==
          doctest::Approx(1.5 * 0.05e12 * duty).epsilon(1e-9)); // c * B * duty

    // Component selection decomposes the total.
    const FilterSpec filter{0.2, 100.0};
    const double total = band_rate(spec, filter, 1e6, duty).pairs_per_second;
    const double scalar_part =
        band_rate(spec, filter, 1e6, duty, 1.0, BandComponents::Scalar).pairs_per_second;
    const double vector_part =
        band_rate(spec, filter, 1e6, duty, 1.0, BandComponents::Vector).pairs_per_second;
    CHECK(scalar_part + vector_part == doctest::Approx(total).epsilon(1e-12));
    CHECK(scalar_part > 50.0 * vector_part);

    // Passband outside the grid coverage.
    CHECK_THROWS_AS(band_rate(spec, FilterSpec{1.05, 200.0}, 1e6, duty), ValidationError);
}

TEST_CASE("band rate agrees with a 100x finer trapezoidal oracle within 0.1%") {
    const auto grid = DetuningGrid::linspaced(-1.0, 1.0, 2001);
    const PfsdSpectrum spec = spectrum(grid, default_pump(), default_line(), default_lengths());
    const double duty = 20.0 * 1e-12 * 1e6;
    const FilterSpec filter{0.2, 100.0};
    const BandRate coarse = band_rate(spec, filter, 1e6, duty);

    // Oracle: direct fine-grid integration of the same formulas.
    const long double lo = 0.2L - 0.05L, hi = 0.2L + 0.05L;
    const int n = 200001;
    long double integral = 0.0L;
    for (int k = 0; k < n; ++k) {
        const long double nu = lo + (hi - lo) * k / (n - 1);
        const long double omega = 2.0L * 3.14159265358979323846264338327950288L * nu;
        const long double f = oracle::scalar(omega, 0.4L, 150.0L) * 2.0L +
                              oracle::vector_hv(omega, 0.4L, 0.4L, 15.0L) +
                              oracle::vector_vh(omega, 0.4L, 0.4L, 15.0L);
        const long double w = (k == 0 || k == n - 1) ? 0.5L : 1.0L;
        integral += w * f;
    }
    integral *= (hi - lo) / (n - 1);
    const double oracle_pairs_per_second = static_cast<double>(integral) * 1e12 * duty;
    CHECK(coarse.pairs_per_second ==
          doctest::Approx(oracle_pairs_per_second).epsilon(1e-3));
}

TEST_CASE("band rate is additive over disjoint bands") {
    const auto grid = DetuningGrid::linspaced(-1.0, 1.0, 2001);
    const PfsdSpectrum spec = spectrum(grid, default_pump(), default_line(), default_lengths());
    const double duty = 20.0 * 1e-12 * 1e6;
    const BandRate whole = band_rate(spec, FilterSpec{0.2, 100.0}, 1e6, duty);
    const BandRate left = band_rate(spec, FilterSpec{0.175, 50.0}, 1e6, duty);
    const BandRate right = band_rate(spec, FilterSpec{0.225, 50.0}, 1e6, duty);
    CHECK(whole.pairs_per_second ==
          doctest::Approx(left.pairs_per_second + right.pairs_per_second).epsilon(1e-12));
}

TEST_CASE("detuning grid validation") {
    CHECK_THROWS_AS(DetuningGrid::linspaced(1.0, -1.0, 100), ValidationError);
    DetuningGrid bad{Eigen::ArrayXd(3)};
    bad.detuning_thz << 0.0, 0.0, 1.0;
    CHECK_THROWS_AS(validate(bad), ValidationError);
}
