#pragma once

#include "apdsim/device.hpp"
#include "apdsim/rng.hpp"
#include "apdsim/signalchain.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace apdsim {

/// One APD at its operating point. dc_fraction (DC share of the total
/// bias) only matters when the device's dc_sweep_coefficient is nonzero.
struct ApdOperatingPoint {
    DeviceCharacteristic device;
    double overbias = 0.0;
    double dc_fraction = 0.0;
};

struct RunConfig {
    double clock_rate = 1e5;       // hertz
    std::uint64_t n_gates = 1;
    double mean_photons = 0.0;     // mu per gate at the coupler input
    double splitter_ratio = 0.5;   // probability a photon routes to APD 1
    ApdOperatingPoint apd1;
    ApdOperatingPoint apd2;
    ChainParams chain;
    std::uint64_t seed = 1;
    bool waveform_mode = false;    // full waveform pipeline vs analytic classification
    bool record_outcomes = false;  // keep the per-gate outcome stream

    void validate() const;
};

/// Ground-truth provenance for one gate.
struct GateTruth {
    std::uint32_t photons_sent = 0;
    std::uint32_t photons_detected_1 = 0;
    std::uint32_t photons_detected_2 = 0;
    bool dark_1 = false, dark_2 = false;
    bool afterpulse_1 = false, afterpulse_2 = false;
};

struct GateOutcome {
    std::uint64_t gate_index = 0;
    Classification classification;
    GateTruth truth;
    bool coincident = false;  // both APDs avalanched in this gate
};

struct CountSummary {
    std::uint64_t apd1 = 0, apd2 = 0, none = 0, ambiguous = 0;
    std::uint64_t total() const { return apd1 + apd2 + none + ambiguous; }
};

/// Aggregated truth flags over a run.
struct TruthTally {
    std::uint64_t photons_sent = 0;
    std::uint64_t detections_1 = 0, detections_2 = 0;
    std::uint64_t dark_1 = 0, dark_2 = 0;
    std::uint64_t afterpulse_1 = 0, afterpulse_2 = 0;
    std::uint64_t coincident = 0;
};

struct RunResult {
    CountSummary counts;
    TruthTally truth;
    std::vector<GateOutcome> outcomes;  // empty unless record_outcomes
    std::uint64_t seed = 0;
    RunConfig config;
};

/// Double-pulse (two successive gates) tallies for afterpulse analysis.
/// Gate A is illuminated, gate B is dark after `interval_s` of trap decay;
/// traps are reset between pairs. The protocol characterizes APD 1 alone.
struct AfterpulseData {
    double interval_s = 0.0;
    std::uint64_t n_pairs = 0;
    std::uint64_t click_a = 0;             // pairs whose gate A clicked
    std::uint64_t click_b_with_a = 0;      // gate-B clicks among those
    std::uint64_t no_click_a = 0;
    std::uint64_t click_b_without_a = 0;
    std::uint64_t afterpulse_truth_b = 0;  // gate-B afterpulse mechanism fired
    std::optional<double> baseline;        // configured gate-B background, if any
    std::uint64_t seed = 0;
};

/// Per-run cache of derived per-APD rates plus, in waveform mode, the
/// memoized waveform-pipeline classification per avalanche pattern (the
/// chain is noiseless and avalanches trigger at the gate center, so each
/// of the four patterns maps to one fixed output trace).
class GateContext {
public:
    explicit GateContext(RunConfig config);

    const RunConfig& config() const { return config_; }
    double efficiency(int apd) const { return eta_[apd]; }
    double dark_prob(int apd) const { return dark_[apd]; }
    double avalanche_amplitude(int apd) const { return amplitude_[apd]; }

    /// Classification for a given avalanche pattern. Analytic mode maps a
    /// lone avalanche to its APD and a coincidence to None (ideal
    /// cancellation); waveform mode runs the full signal chain.
    Classification classify(bool avalanche_1, bool avalanche_2) const;

private:
    Classification classify_waveform(bool avalanche_1, bool avalanche_2) const;

    RunConfig config_;
    double eta_[2], dark_[2], amplitude_[2];
    mutable std::optional<Classification> memo_[2][2];
};

/// Simulates one gate. Draw layout per gate (fixed, so paired-seed runs
/// stay aligned): photon count ~ Poisson(mu) when illuminated and mu > 0;
/// one routing uniform per photon; one detection uniform per photon at
/// each APD; then dark and afterpulse uniforms for APD 1, then APD 2.
/// Trap states must be decayed to the current gate time by the caller;
/// captures from this gate's avalanches are applied before returning.
GateOutcome simulate_gate(RngStream& rng, const GateContext& ctx,
                          TrapState& trap1, TrapState& trap2, bool illuminated);

/// As simulate_gate but with the photon count pinned (no Poisson draw).
GateOutcome simulate_gate_with_photons(RngStream& rng, const GateContext& ctx,
                                       std::uint32_t n_photons,
                                       TrapState& trap1, TrapState& trap2);

/// Runs n_gates with inter-gate trap decay of 1/clock_rate. Deterministic
/// for a fixed (config, seed).
RunResult run_experiment(const RunConfig& config);

/// Double-pulse protocol on APD 1: for each pair, a bright gate A
/// (pulse_a_mean_photons, default 100) followed after `interval` by a dark
/// gate B; trap state is reset between pairs. interval must be at least
/// the gate width.
AfterpulseData double_pulse_run(const RunConfig& config, double interval,
                                std::uint64_t n_pairs,
                                double pulse_a_mean_photons = 100.0);

/// Independent replicas with seeds base_seed + replica_index, executed
/// concurrently and merged in replica order.
std::vector<RunResult> batch_replicate(const RunConfig& config,
                                       std::uint32_t n_replicas,
                                       std::uint64_t base_seed);

}  // namespace apdsim
