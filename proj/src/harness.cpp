#include "apdsim/harness.hpp"

#include "apdsim/csv.hpp"
#include "apdsim/linkbudget.hpp"
#include "apdsim/version.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace apdsim {

using nlohmann::json;

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace

std::filesystem::path RunDir::artifact(const std::string& name) {
    artifacts.push_back(name);
    return dir / name;
}

RunDir make_run_dir(const std::filesystem::path& out_root,
                    const std::string& subcommand, const json& config_echo) {
    RunDir run;
    run.config_echo = config_echo;
    run.run_id = subcommand + "-" + utc_timestamp() + "-" +
                 config_hash(config_echo).substr(0, 8);
    // Repeated runs inside one second share a timestamp; suffix them.
    std::filesystem::path dir = out_root / run.run_id;
    for (int suffix = 1; std::filesystem::exists(dir); ++suffix)
        dir = out_root / (run.run_id + "-" + std::to_string(suffix));
    run.dir = dir;
    run.run_id = dir.filename().string();
    std::filesystem::create_directories(run.dir);
    return run;
}

void write_manifest(RunDir& run, const std::string& subcommand, std::uint64_t seed) {
    json manifest{{"run_id", run.run_id},
                  {"subcommand", subcommand},
                  {"tool_version", kVersion},
                  {"seed", seed},
                  {"config", run.config_echo},
                  {"config_hash", config_hash(run.config_echo)},
                  {"artifacts", run.artifacts},
                  {"created_utc", utc_timestamp()}};
    write_json_file(run.dir / "manifest.json", manifest);
}

SpikeDemoResult run_spike_demo(const ToolConfig& cfg,
                               const std::filesystem::path& out_root) {
    const ChainParams& chain = cfg.run.chain;
    chain.validate();

    SpikeDemoResult result;
    result.run = make_run_dir(out_root, "spike-demo", tool_config_to_json(cfg));

    const Waveform spike = synth_gate_spike(chain);
    const Waveform arm1 = compose_arm(chain, spike, std::nullopt, -1, 1.0);
    const Waveform arm2 = compose_arm(chain, spike, std::nullopt, -1, 1.0);
    const Waveform diff = hybrid_subtract(chain, arm1, arm2);
    const Waveform arm_ref = band_limit(chain, spike);

    auto peak = [](const Waveform& w) {
        double m = 0.0;
        for (double s : w.samples) m = std::max(m, std::abs(s));
        return m;
    };
    result.arm_peak = peak(arm_ref);
    result.residual_peak = peak(diff);
    result.residual_ratio = result.arm_peak > 0.0
                                ? result.residual_peak / result.arm_peak
                                : 0.0;

    write_waveform_csv(result.run.artifact("arm1.csv"), arm1);
    write_waveform_csv(result.run.artifact("arm2.csv"), arm2);
    write_waveform_csv(result.run.artifact("differential.csv"), diff);
    write_json_file(result.run.artifact("summary.json"),
                    json{{"residual_ratio", result.residual_ratio},
                         {"arm_peak_volts", result.arm_peak},
                         {"residual_peak_volts", result.residual_peak},
                         {"gain_mismatch", chain.gain_mismatch}});
    write_manifest(result.run, "spike-demo", cfg.run.seed);
    return result;
}

BiasSweepResult run_bias_sweep(const ToolConfig& cfg,
                               const std::filesystem::path& out_root) {
    if (cfg.sweep.overbias_grid.empty() || cfg.sweep.mu_grid.size() < 2)
        throw ConfigError("sweep: needs an overbias grid and at least two mu points");

    BiasSweepResult result;
    result.run = make_run_dir(out_root, "sweep-bias", tool_config_to_json(cfg));

    // Single-APD characterization: every photon routed to APD 1.
    RunConfig base = cfg.run;
    base.splitter_ratio = 1.0;
    base.waveform_mode = false;
    base.n_gates = cfg.sweep.gates_per_point;
    base.record_outcomes = false;

    std::uint64_t stream = 0;
    result.best_pd_over_eta = std::numeric_limits<double>::infinity();
    for (double ob : cfg.sweep.overbias_grid) {
        std::vector<CountSample> samples;
        for (double mu : cfg.sweep.mu_grid) {
            RunConfig point = base;
            point.apd1.overbias = ob;
            point.apd2.overbias = ob;
            point.mean_photons = mu;
            point.seed = cfg.run.seed + stream++;
            const RunResult run = run_experiment(point);
            samples.push_back({mu, run.counts.apd1, point.n_gates});
        }
        BiasSweepRow row;
        row.overbias = ob;
        row.eta_true = efficiency_at(cfg.run.apd1.device, ob);
        row.pd_true = dark_prob_at(cfg.run.apd1.device, ob);
        row.fit = fit_poisson_model(samples);
        if (!row.fit.converged)
            throw std::runtime_error(
                "sweep-bias: fit did not converge at overbias " + std::to_string(ob));
        row.pd_over_eta = row.fit.eta_hat > 0.0 ? row.fit.pd_hat / row.fit.eta_hat : 0.0;
        result.rows.push_back(row);
        if (row.pd_over_eta < result.best_pd_over_eta)
            result.best_pd_over_eta = row.pd_over_eta;
    }

    {
        std::ofstream out(result.run.artifact("sweep.csv"), std::ios::binary);
        out << "overbias,eta_true,eta_hat,pd_true,pd_hat,pd_over_eta\n";
        for (const BiasSweepRow& r : result.rows)
            out << format_double(r.overbias) << ',' << format_double(r.eta_true) << ','
                << format_double(r.fit.eta_hat) << ',' << format_double(r.pd_true) << ','
                << format_double(r.fit.pd_hat) << ',' << format_double(r.pd_over_eta)
                << '\n';
    }
    json fits = json::array();
    for (const BiasSweepRow& r : result.rows) {
        json entry = fit_result_to_json(r.fit);
        entry["overbias"] = r.overbias;
        entry["eta_true"] = r.eta_true;
        entry["pd_true"] = r.pd_true;
        fits.push_back(entry);
    }
    write_json_file(result.run.artifact("summary.json"),
                    json{{"device", cfg.run.apd1.device.name},
                         {"gates_per_point", cfg.sweep.gates_per_point},
                         {"mu_grid", cfg.sweep.mu_grid},
                         {"fits", fits},
                         {"best_pd_over_eta", result.best_pd_over_eta}});
    write_manifest(result.run, "sweep-bias", cfg.run.seed);
    return result;
}

AfterpulseResult run_afterpulse(const ToolConfig& cfg,
                                const std::filesystem::path& out_root) {
    if (cfg.afterpulse.interval_grid_s.empty())
        throw ConfigError("afterpulse: interval grid is empty");
    for (double interval : cfg.afterpulse.interval_grid_s)
        if (interval < cfg.run.chain.gate_width)
            throw ConfigError("afterpulse: interval below the gate width");

    AfterpulseResult result;
    result.run = make_run_dir(out_root, "afterpulse", tool_config_to_json(cfg));

    std::uint64_t stream = 0;
    for (double interval : cfg.afterpulse.interval_grid_s) {
        RunConfig point = cfg.run;
        point.seed = cfg.run.seed + stream++;
        AfterpulseData data = double_pulse_run(point, interval, cfg.afterpulse.n_pairs,
                                               cfg.afterpulse.pulse_a_mean_photons);
        if (cfg.afterpulse.device_baseline)
            data.baseline = dark_prob_at(cfg.run.apd1.device, cfg.run.apd1.overbias);
        AfterpulsePoint point_result;
        point_result.interval_s = interval;
        point_result.data = data;
        point_result.estimate = estimate_afterpulse(data);
        result.points.push_back(point_result);
    }

    std::vector<std::pair<double, AfterpulseEstimate>> curve;
    for (const AfterpulsePoint& p : result.points)
        curve.emplace_back(p.interval_s, p.estimate);
    result.decay_fit = fit_exponential_decay(curve);

    {
        std::ofstream out(result.run.artifact("afterpulse.csv"), std::ios::binary);
        out << "interval_s,p_after,stderr\n";
        for (const AfterpulsePoint& p : result.points)
            out << format_double(p.interval_s) << ',' << format_double(p.estimate.p_after)
                << ',' << format_double(p.estimate.stderr_) << '\n';
    }
    write_json_file(
        result.run.artifact("summary.json"),
        json{{"device", cfg.run.apd1.device.name},
             {"n_pairs", cfg.afterpulse.n_pairs},
             {"fit_amplitude", result.decay_fit.amplitude},
             {"fit_tau_s", result.decay_fit.tau},
             {"fit_valid", result.decay_fit.valid},
             {"true_tau_s", cfg.run.apd1.device.trap.detrap_time_constant}});
    write_manifest(result.run, "afterpulse", cfg.run.seed);
    return result;
}

WhichPathResult run_which_path(const ToolConfig& cfg,
                               const std::filesystem::path& out_root) {
    if (cfg.whichpath.mu_grid.empty())
        throw ConfigError("whichpath: mu grid is empty");

    WhichPathResult result;
    result.run = make_run_dir(out_root, "which-path", tool_config_to_json(cfg));

    RunConfig base = cfg.run;
    base.waveform_mode = true;  // coincidence cancellation is the point here
    base.record_outcomes = false;

    json run_summaries = json::array();
    std::uint64_t stream = 0;
    for (double mu : cfg.whichpath.mu_grid) {
        RunConfig point = base;
        point.mean_photons = mu;
        point.seed = cfg.run.seed + stream++;
        const RunResult run = run_experiment(point);
        json summary = run_result_summary_json(run);
        summary["mu"] = mu;
        run_summaries.push_back(summary);
        WhichPathRow row;
        row.mu = mu;
        row.apd1 = run.counts.apd1;
        row.apd2 = run.counts.apd2;
        row.none = run.counts.none;
        row.ambiguous = run.counts.ambiguous;
        const std::uint64_t classified = row.apd1 + row.apd2;
        row.frac_apd1 = classified > 0
                            ? static_cast<double>(row.apd1) / static_cast<double>(classified)
                            : 0.0;
        result.rows.push_back(row);
    }

    {
        std::ofstream out(result.run.artifact("whichpath.csv"), std::ios::binary);
        out << "mu,n1,n2,none,ambiguous,frac_apd1\n";
        for (const WhichPathRow& r : result.rows)
            out << format_double(r.mu) << ',' << r.apd1 << ',' << r.apd2 << ','
                << r.none << ',' << r.ambiguous << ',' << format_double(r.frac_apd1)
                << '\n';
    }

    // Event raster for the lowest mu: replay the head of that run (same
    // seed, so it is exactly the first 2 ms of the sweep point).
    {
        const auto lowest =
            std::min_element(cfg.whichpath.mu_grid.begin(), cfg.whichpath.mu_grid.end());
        const std::size_t lowest_index =
            static_cast<std::size_t>(lowest - cfg.whichpath.mu_grid.begin());
        RunConfig raster = base;
        raster.mean_photons = *lowest;
        raster.seed = cfg.run.seed + lowest_index;
        raster.record_outcomes = true;
        raster.n_gates = std::min<std::uint64_t>(
            base.n_gates,
            static_cast<std::uint64_t>(std::llround(2e-3 * base.clock_rate)));
        raster.n_gates = std::max<std::uint64_t>(raster.n_gates, 1);
        const RunResult head = run_experiment(raster);
        write_outcomes_csv(result.run.artifact("raster.csv"), head.outcomes);
    }

    write_json_file(result.run.artifact("summary.json"),
                    json{{"mu_grid", cfg.whichpath.mu_grid},
                         {"n_gates", base.n_gates},
                         {"waveform_mode", true},
                         {"runs", run_summaries}});
    write_manifest(result.run, "which-path", cfg.run.seed);
    return result;
}

json run_link_range(const ToolConfig& cfg, const std::filesystem::path& out_root) {
    const RangeResult range = max_range(cfg.link);
    json summary{
        {"range_km", range.km},
        {"status", to_string(range.status)},
        {"qber_at_range",
         range.status == RangeResult::Status::Bounded ? qber(cfg.link, range.km) : 0.0},
        {"criterion",
         cfg.link.criterion == RangeCriterion::MaxQber ? "qber" : "ratio"},
        {"criterion_value", cfg.link.criterion_value},
        {"eta", cfg.link.eta},
        {"pd", cfg.link.pd},
        {"attenuation_db_per_km", cfg.link.attenuation_db_per_km}};

    RunDir run = make_run_dir(out_root, "link-range", tool_config_to_json(cfg));
    write_json_file(run.artifact("summary.json"), summary);
    write_manifest(run, "link-range", cfg.run.seed);
    return summary;
}

}  // namespace apdsim
