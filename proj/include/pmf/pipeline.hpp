#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmf/config.hpp"
#include "pmf/counting.hpp"
#include "pmf/csv.hpp"
#include "pmf/fringe_fit.hpp"
#include "pmf/sfwm.hpp"

// Composition of the computation modules into the artifacts the CLI emits.

namespace pmf {

// Every (theta_s, theta_i) point gets its own derived stream so angle scans
// are statistically independent and reruns are byte-identical.
inline std::uint64_t fringe_point_seed(std::uint64_t base_seed, std::size_t s_index,
                                       std::size_t i_index) {
    return detail::mix_seed(base_seed, 0x100000ull * (s_index + 1) + i_index);
}

// One simulated counting run per analyzer pair, in input order.
inline std::vector<FringeRow> run_fringe_scan(const ExperimentConfig& config,
                                              const std::vector<double>& theta_s_deg,
                                              const std::vector<double>& theta_i_deg) {
    validate(config);
    const TwoQubitState state = config.state();
    const ChannelLoss losses = config.channel_loss();
    const DetectorModel det_s = config.detector_s();
    const DetectorModel det_i = config.detector_i();
    std::vector<FringeRow> rows;
    rows.reserve(theta_s_deg.size() * theta_i_deg.size());
    for (std::size_t si = 0; si < theta_s_deg.size(); ++si) {
        for (std::size_t ii = 0; ii < theta_i_deg.size(); ++ii) {
            RunConfig run = config.run_config();
            run.rng_seed = fringe_point_seed(config.seed, si, ii);
            const AnalyzerSetting setting{theta_s_deg[si], theta_i_deg[ii]};
            const CountRecord rec = simulate_run(run, state, setting, losses, det_s, det_i);
            rows.push_back(FringeRow{theta_s_deg[si], theta_i_deg[ii], rec.pulses, rec.singles_s,
                                     rec.singles_i, rec.coincidences, rec.accidentals_estimate});
        }
    }
    return rows;
}

// Groups counting rows into one dataset per distinct theta_s (in order of
// first appearance). With subtract_accidentals the accidental estimate is
// removed from each point, floored at zero; weights still come from the raw
// counts.
inline std::vector<FringeDataset> group_fringe_rows(const std::vector<FringeRow>& rows,
                                                    bool subtract_accidentals = false) {
    std::vector<FringeDataset> datasets;
    for (const auto& row : rows) {
        FringeDataset* dest = nullptr;
        for (auto& d : datasets)
            if (d.theta_s_deg == row.theta_s_deg) dest = &d;
        if (!dest) {
            datasets.push_back(FringeDataset{row.theta_s_deg, {}, {}, row.pulses});
            dest = &datasets.back();
        }
        double counts = static_cast<double>(row.coincidences);
        if (subtract_accidentals) counts = std::max(0.0, counts - row.accidentals_est);
        dest->theta_i_deg.push_back(row.theta_i_deg);
        dest->counts.push_back(counts);
    }
    return datasets;
}

struct SweepPoint {
    double param_value = 0.0;
    double suppression = 0.0;
    double mu_signal_band = 0.0;
};

// Suppression ratio at the signal filter detuning plus the pairs-per-pulse
// integral over the signal filter band.
inline SweepPoint evaluate_sweep_point(const ExperimentConfig& config, double param_value) {
    validate(config);
    const FiberLine line = config.fiber_line();
    const PumpConfig pump = config.pump();
    const EffectiveLengths lengths = config.lengths();
    SweepPoint point;
    point.param_value = param_value;
    point.suppression = suppression_ratio(config.signal_detuning_thz, pump, line, lengths,
                                          config.phase_factor);
    const FilterSpec filter = config.signal_filter();
    const double half_bw_thz = filter.bandwidth_ghz / 1000.0 / 2.0;
    const DetuningGrid grid = DetuningGrid::linspaced(
        filter.center_detuning_thz - 2.0 * half_bw_thz,
        filter.center_detuning_thz + 2.0 * half_bw_thz, 2001);
    const PfsdSpectrum spec = spectrum(grid, pump, line, lengths, config.phase_factor);
    point.mu_signal_band =
        band_rate(spec, filter, config.rep_rate_hz, config.duty_cycle(), config.rate_scale)
            .pairs_per_pulse;
    return point;
}

} // namespace pmf
