#pragma once

#include "apdsim/estimator.hpp"
#include "apdsim/linkbudget.hpp"
#include "apdsim/montecarlo.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace apdsim {

struct SweepConfig {
    std::vector<double> overbias_grid{1.5};
    std::vector<double> mu_grid{0.0, 0.1, 0.5, 1.0, 2.0};
    std::uint64_t gates_per_point = 10'000'000;
};

struct AfterpulseConfig {
    std::vector<double> interval_grid_s{0.5e-6, 1e-6, 2e-6, 5e-6};
    std::uint64_t n_pairs = 10'000'000;
    double pulse_a_mean_photons = 100.0;
    // Baseline for the background subtraction: the device's dark
    // probability at the operating point, or the empirical no-click-A rate.
    bool device_baseline = true;
};

struct WhichPathConfig {
    std::vector<double> mu_grid{0.2, 1.0, 5.0};
};

/// Full run configuration: one JSON document with sections
/// {device1, device2, chain, run, link, sweep, afterpulse, whichpath}.
struct ToolConfig {
    RunConfig run;  // carries apd1/apd2, chain, seed, gate counts
    LinkParams link;
    SweepConfig sweep;
    AfterpulseConfig afterpulse;
    WhichPathConfig whichpath;
};

/// Both APDs on the 178 K preset at the nominal 1.5 V overbias point.
ToolConfig default_tool_config();

nlohmann::json device_to_json(const DeviceCharacteristic& dev);
DeviceCharacteristic device_from_json(const nlohmann::json& j);

/// Count and truth tallies of a finished run.
nlohmann::json run_result_summary_json(const RunResult& result);

nlohmann::json fit_result_to_json(const FitResult& fit);

nlohmann::json tool_config_to_json(const ToolConfig& cfg);
ToolConfig tool_config_from_json(const nlohmann::json& j);
ToolConfig load_tool_config(const std::filesystem::path& path);

/// FNV-1a over the canonical (sorted-key) dump; run identifiers derive
/// from this, so identical configs map to identical hashes.
std::string config_hash(const nlohmann::json& canonical);

}  // namespace apdsim
