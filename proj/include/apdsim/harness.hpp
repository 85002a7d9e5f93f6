#pragma once

#include "apdsim/config.hpp"
#include "apdsim/estimator.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace apdsim {

/// A created run directory: runs/<subcommand>-<utc>-<confighash8>/ plus the
/// manifest bookkeeping. Data artifacts depend only on (config, seed);
/// the manifest additionally records the creation time and run id.
struct RunDir {
    std::filesystem::path dir;
    std::string run_id;
    nlohmann::json config_echo;
    std::vector<std::string> artifacts;

    std::filesystem::path artifact(const std::string& name);
};

RunDir make_run_dir(const std::filesystem::path& out_root,
                    const std::string& subcommand, const nlohmann::json& config_echo);

/// Writes manifest.json (run id, subcommand, tool version, seed, config
/// echo, artifact list, creation time).
void write_manifest(RunDir& run, const std::string& subcommand, std::uint64_t seed);

// Sub-run seeds inside a harness command derive as config seed + stream
// index, with stream indices assigned in the documented loop order of each
// command (the same rule batch_replicate uses).

struct SpikeDemoResult {
    double residual_ratio = 0.0;  // residual peak / single-arm spike peak
    double arm_peak = 0.0;
    double residual_peak = 0.0;
    RunDir run;
};

/// One gate without photons through both arms and the hybrid: emits
/// arm1.csv, arm2.csv, differential.csv and the peak ratio.
SpikeDemoResult run_spike_demo(const ToolConfig& cfg,
                               const std::filesystem::path& out_root);

struct BiasSweepRow {
    double overbias = 0.0;
    double eta_true = 0.0, pd_true = 0.0;
    FitResult fit;
    double pd_over_eta = 0.0;  // fitted figure of merit
};

struct BiasSweepResult {
    std::vector<BiasSweepRow> rows;
    double best_pd_over_eta = 0.0;  // smallest fitted ratio across the grid
    RunDir run;
};

/// Device-1 characterization: per overbias grid point, a dark run plus
/// illuminated runs over the mu grid (all photons routed to APD 1), then
/// the joint Poisson-model fit. Emits sweep.csv and summary.json.
BiasSweepResult run_bias_sweep(const ToolConfig& cfg,
                               const std::filesystem::path& out_root);

struct AfterpulsePoint {
    double interval_s = 0.0;
    AfterpulseEstimate estimate;
    AfterpulseData data;
};

struct AfterpulseResult {
    std::vector<AfterpulsePoint> points;
    ExponentialDecayFit decay_fit;
    RunDir run;
};

/// Double-pulse protocol over the interval grid. Emits afterpulse.csv
/// (interval_s, p_after, stderr) and the fitted amplitude/tau summary.
AfterpulseResult run_afterpulse(const ToolConfig& cfg,
                                const std::filesystem::path& out_root);

struct WhichPathRow {
    double mu = 0.0;
    std::uint64_t apd1 = 0, apd2 = 0, none = 0, ambiguous = 0;
    double frac_apd1 = 0.0;  // among classified clicks
};

struct WhichPathResult {
    std::vector<WhichPathRow> rows;
    RunDir run;
};

/// Which-path experiment over the mu grid with the waveform pipeline
/// forced on. Emits whichpath.csv and, for the lowest mu, a 2 ms event
/// raster (raster.csv) replaying the head of that run.
WhichPathResult run_which_path(const ToolConfig& cfg,
                               const std::filesystem::path& out_root);

/// Range arithmetic passthrough; returns {range_km, qber_at_range,
/// criterion, status} and writes it as summary.json.
nlohmann::json run_link_range(const ToolConfig& cfg,
                              const std::filesystem::path& out_root);

}  // namespace apdsim
