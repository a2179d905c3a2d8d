#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "pmf/errors.hpp"
#include "pmf/polarization.hpp"

// Detector click statistics: closed-form expected rates per pulse and a
// seeded Monte Carlo of pulse-synchronous counting runs.
//
// Reproducibility contract: every pulse owns an RNG stream derived from
// (seed, pulse index), so a run is bit-identical for a given RunConfig no
// matter how pulses are partitioned into blocks or threads. Within a pulse
// the draw order is fixed: pair number, then per pair (analyzer outcome,
// signal detection, idler detection), then background photons per side,
// then dark counts. Detection draws are consumed whether or not the photon
// passed its analyzer, which keeps draws aligned across parameter sweeps
// under common random numbers.

namespace pmf {

struct DetectorModel {
    double efficiency = 1.0;    // eta
    double dark_prob = 0.0;     // per gate
    double gate_width_ns = 2.5;
};

inline void validate(const DetectorModel& det) {
    if (!(det.efficiency >= 0.0 && det.efficiency <= 1.0))
        throw ValidationError("detector: efficiency must lie in [0, 1]");
    if (!(det.dark_prob >= 0.0 && det.dark_prob < 1.0))
        throw ValidationError("detector: dark probability must lie in [0, 1)");
    if (!(det.gate_width_ns > 0.0))
        throw ValidationError("detector: gate width must be > 0");
}

// Filters, splices and analyzers lumped into one transmission per side.
// ripple_depth adds the polarization-dependent loss of the idler analyzer
// as a sinusoidal modulation of transmission_i (default off).
struct ChannelLoss {
    double transmission_s = 1.0;
    double transmission_i = 1.0;
    double ripple_depth = 0.0;
};

inline void validate(const ChannelLoss& loss) {
    if (!(loss.transmission_s > 0.0 && loss.transmission_s <= 1.0) ||
        !(loss.transmission_i > 0.0 && loss.transmission_i <= 1.0))
        throw ValidationError("channel loss: transmissions must lie in (0, 1]");
    if (!(loss.ripple_depth >= 0.0 && loss.ripple_depth < 1.0))
        throw ValidationError("channel loss: ripple depth must lie in [0, 1)");
}

inline double idler_transmission(const ChannelLoss& loss, double theta_i_deg) {
    const double s = std::sin(2.0 * deg2rad(theta_i_deg));
    return loss.transmission_i * (1.0 - loss.ripple_depth * s * s);
}

enum class PairStatistics { Poisson, Thermal };

struct RunConfig {
    double rep_rate_hz = 1e6;
    double duration_s = 10.0;
    double mean_pairs_per_pulse = 0.0; // mu
    double background_flux_s = 0.0;    // mean uncorrelated photons/pulse
    double background_flux_i = 0.0;
    std::uint64_t rng_seed = 0;
    PairStatistics pair_statistics = PairStatistics::Poisson;
};

inline void validate(const RunConfig& run) {
    if (!(run.rep_rate_hz > 0.0))
        throw ValidationError("run: repetition rate must be > 0");
    if (!(run.duration_s > 0.0))
        throw ValidationError("run: duration must be > 0");
    if (!(run.mean_pairs_per_pulse >= 0.0))
        throw ValidationError("run: mean pairs per pulse must be >= 0");
    if (!(run.background_flux_s >= 0.0) || !(run.background_flux_i >= 0.0))
        throw ValidationError("run: background fluxes must be >= 0");
}

struct CountRecord {
    std::uint64_t pulses = 0;
    std::uint64_t singles_s = 0;
    std::uint64_t singles_i = 0;
    std::uint64_t coincidences = 0;
    double accidentals_estimate = 0.0;
};

struct ExpectedRates {
    double singles_s = 0.0;     // per pulse
    double singles_i = 0.0;
    double coincidences = 0.0;  // includes the accidental term
    double accidentals = 0.0;
    bool multi_pair_warning = false; // mu too large for the first-order form
};

// First-order per-pulse rates. Valid for mu <= 0.1; beyond that the
// multi-pair warning flags that the linearized form is an approximation.
inline ExpectedRates expected_rates(const TwoQubitState& state, const AnalyzerSetting& setting,
                                    double mu, const ChannelLoss& losses,
                                    const DetectorModel& det_s, const DetectorModel& det_i,
                                    double background_s = 0.0, double background_i = 0.0) {
    validate(state);
    validate(losses);
    validate(det_s);
    validate(det_i);
    if (!(mu >= 0.0))
        throw ValidationError("expected rates: mu must be >= 0");
    const double q_s = losses.transmission_s * det_s.efficiency;
    const double q_i = idler_transmission(losses, setting.theta_i_deg) * det_i.efficiency;
    ExpectedRates rates;
    rates.singles_s = mu * q_s * single_prob(state, Side::Signal, setting.theta_s_deg) +
                      background_s * q_s + det_s.dark_prob;
    rates.singles_i = mu * q_i * single_prob(state, Side::Idler, setting.theta_i_deg) +
                      background_i * q_i + det_i.dark_prob;
    rates.accidentals = rates.singles_s * rates.singles_i;
    rates.coincidences = mu * q_s * q_i * coincidence_prob(state, setting) + rates.accidentals;
    rates.multi_pair_warning = mu > 0.1;
    return rates;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// xoshiro256++, seeded through splitmix64.
class PulseRng {
public:
    explicit PulseRng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& w : s_) w = splitmix64(x);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
    std::uint64_t s_[4];
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed ^ (0x632BE59BD9B4E019ull * (index + 1));
    return splitmix64(x);
}

// Poisson sample by CDF inversion of a single uniform; exact and portable
// for the small means used here.
inline int poisson_inverse(double lambda, double u) {
    if (lambda <= 0.0) return 0;
    double p = std::exp(-lambda);
    double cum = p;
    int k = 0;
    while (u > cum && k < 4096) {
        ++k;
        p *= lambda / k;
        cum += p;
    }
    return k;
}

// Thermal (Bose-Einstein) pair-number sample, same inversion scheme.
inline int thermal_inverse(double mean, double u) {
    if (mean <= 0.0) return 0;
    const double ratio = mean / (1.0 + mean);
    double p = 1.0 / (1.0 + mean);
    double cum = p;
    int k = 0;
    while (u > cum && k < 4096) {
        ++k;
        p *= ratio;
        cum += p;
    }
    return k;
}

} // namespace detail

// One pulsed counting run. Per pulse the pair number is drawn from the
// configured statistics, each photon is routed through its analyzer
// projection, channel loss and detector efficiency, and background and
// dark Bernoulli clicks are added. Detectors are non-number-resolving: at
// most one click per side per gate; a coincidence is both sides clicking
// in the same gate.
inline CountRecord simulate_run(const RunConfig& run, const TwoQubitState& state,
                                const AnalyzerSetting& setting, const ChannelLoss& losses,
                                const DetectorModel& det_s, const DetectorModel& det_i) {
    validate(run);
    validate(state);
    validate(losses);
    validate(det_s);
    validate(det_i);

    const auto pulses = static_cast<std::uint64_t>(std::llround(run.duration_s * run.rep_rate_hz));
    const double mu = run.mean_pairs_per_pulse;

    // Joint analyzer outcome table for one pair.
    const double c_pp = coincidence_prob(state, setting);
    const double marg_s = single_prob(state, Side::Signal, setting.theta_s_deg);
    const double marg_i = single_prob(state, Side::Idler, setting.theta_i_deg);
    const double c_pf = std::max(0.0, marg_s - c_pp); // signal passes, idler blocked
    const double c_fp = std::max(0.0, marg_i - c_pp);

    const double q_s = losses.transmission_s * det_s.efficiency;
    const double q_i = idler_transmission(losses, setting.theta_i_deg) * det_i.efficiency;

    CountRecord rec;
    rec.pulses = pulses;
    for (std::uint64_t pulse = 0; pulse < pulses; ++pulse) {
        detail::PulseRng rng(detail::mix_seed(run.rng_seed, pulse));
        bool click_s = false;
        bool click_i = false;

        const int n_pairs = run.pair_statistics == PairStatistics::Thermal
                                ? detail::thermal_inverse(mu, rng.uniform())
                                : detail::poisson_inverse(mu, rng.uniform());
        for (int j = 0; j < n_pairs; ++j) {
            const double u = rng.uniform();
            const bool pass_s = u < c_pp + c_pf;
            const bool pass_i = u < c_pp || (u >= c_pp + c_pf && u < c_pp + c_pf + c_fp);
            const double u_det_s = rng.uniform();
            const double u_det_i = rng.uniform();
            if (pass_s && u_det_s < q_s) click_s = true;
            if (pass_i && u_det_i < q_i) click_i = true;
        }
        if (run.background_flux_s > 0.0) {
            const int n = detail::poisson_inverse(run.background_flux_s, rng.uniform());
            for (int j = 0; j < n; ++j)
                if (rng.uniform() < q_s) click_s = true;
        }
        if (run.background_flux_i > 0.0) {
            const int n = detail::poisson_inverse(run.background_flux_i, rng.uniform());
            for (int j = 0; j < n; ++j)
                if (rng.uniform() < q_i) click_i = true;
        }
        if (det_s.dark_prob > 0.0 && rng.uniform() < det_s.dark_prob) click_s = true;
        if (det_i.dark_prob > 0.0 && rng.uniform() < det_i.dark_prob) click_i = true;

        rec.singles_s += click_s;
        rec.singles_i += click_i;
        rec.coincidences += click_s && click_i;
    }
    rec.accidentals_estimate =
        static_cast<double>(rec.singles_s) * static_cast<double>(rec.singles_i) /
        static_cast<double>(pulses);
    return rec;
}

// Expected same-gate accidental count of two uncorrelated click streams.
inline double accidental_estimate(const CountRecord& rec) {
    if (rec.pulses == 0)
        throw ValidationError("accidental estimate: record has no pulses");
    return static_cast<double>(rec.singles_s) * static_cast<double>(rec.singles_i) /
           static_cast<double>(rec.pulses);
}

} // namespace pmf
