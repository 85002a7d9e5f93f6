#include "apdsim/config.hpp"

#include <fstream>

namespace apdsim {

using nlohmann::json;

namespace {

double get_num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        throw ConfigError(std::string("config: '") + key + "' must be a number");
    return j.at(key).get<double>();
}

std::uint64_t get_u64(const json& j, const char* key, std::uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<std::uint64_t>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
    return j.contains(key) ? j.at(key).get<bool>() : fallback;
}

std::vector<double> get_grid(const json& j, const char* key,
                             std::vector<double> fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<std::vector<double>>();
}

}  // namespace

nlohmann::json device_to_json(const DeviceCharacteristic& dev) {
    json table = json::array();
    for (const BiasPoint& row : dev.bias_table)
        table.push_back({row.overbias, row.efficiency, row.dark_prob});
    return json{{"name", dev.name},
                {"temperature_K", dev.temperature_K},
                {"breakdown_voltage", dev.breakdown_voltage},
                {"bias_table", table},
                {"trap",
                 {{"capture", dev.trap.capture_per_avalanche},
                  {"release", dev.trap.release_prob_per_carrier},
                  {"tau_s", dev.trap.detrap_time_constant},
                  {"k_ob", dev.trap.bias_capture_slope},
                  {"dc_sweep", dev.trap.dc_sweep_coefficient}}},
                {"avalanche_gain_slope", dev.avalanche_gain_slope}};
}

DeviceCharacteristic device_from_json(const json& j) {
    try {
        DeviceCharacteristic dev;
        dev.name = j.value("name", std::string("unnamed"));
        dev.temperature_K = get_num(j, "temperature_K", 0.0);
        dev.breakdown_voltage = get_num(j, "breakdown_voltage", 0.0);
        for (const json& row : j.at("bias_table")) {
            if (!row.is_array() || row.size() != 3)
                throw ConfigError("device: bias_table rows are [overbias, eta, pd]");
            dev.bias_table.push_back(
                {row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
        }
        if (j.contains("trap")) {
            const json& t = j.at("trap");
            dev.trap.capture_per_avalanche = get_num(t, "capture", 0.0);
            dev.trap.release_prob_per_carrier = get_num(t, "release", 0.0);
            dev.trap.detrap_time_constant = get_num(t, "tau_s", 1e-6);
            dev.trap.bias_capture_slope = get_num(t, "k_ob", 0.0);
            dev.trap.dc_sweep_coefficient = get_num(t, "dc_sweep", 0.0);
        }
        dev.avalanche_gain_slope = get_num(j, "avalanche_gain_slope", 0.2);
        dev.validate();
        return dev;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("device JSON: ") + e.what());
    }
}

nlohmann::json run_result_summary_json(const RunResult& result) {
    return json{{"n_gates", result.config.n_gates},
                {"seed", result.seed},
                {"counts",
                 {{"apd1", result.counts.apd1},
                  {"apd2", result.counts.apd2},
                  {"none", result.counts.none},
                  {"ambiguous", result.counts.ambiguous}}},
                {"truth",
                 {{"photons_sent", result.truth.photons_sent},
                  {"detections_1", result.truth.detections_1},
                  {"detections_2", result.truth.detections_2},
                  {"dark_1", result.truth.dark_1},
                  {"dark_2", result.truth.dark_2},
                  {"afterpulse_1", result.truth.afterpulse_1},
                  {"afterpulse_2", result.truth.afterpulse_2},
                  {"coincident", result.truth.coincident}}}};
}

nlohmann::json fit_result_to_json(const FitResult& fit) {
    return json{{"eta_hat", fit.eta_hat},     {"eta_se", fit.eta_se},
                {"pd_hat", fit.pd_hat},       {"pd_se", fit.pd_se},
                {"log_likelihood", fit.log_likelihood},
                {"converged", fit.converged}};
}

namespace {

ApdOperatingPoint apd_from_json(const json& j, const ApdOperatingPoint& fallback) {
    ApdOperatingPoint apd = fallback;
    if (j.contains("preset"))
        apd.device = device_preset(j.at("preset").get<std::string>());
    else if (j.contains("device"))
        apd.device = device_from_json(j.at("device"));
    apd.overbias = get_num(j, "overbias", apd.overbias);
    apd.dc_fraction = get_num(j, "dc_fraction", apd.dc_fraction);
    return apd;
}

json apd_to_json(const ApdOperatingPoint& apd) {
    return json{{"device", device_to_json(apd.device)},
                {"overbias", apd.overbias},
                {"dc_fraction", apd.dc_fraction}};
}

ChainParams chain_from_json(const json& j, ChainParams chain) {
    chain.gate_amplitude = get_num(j, "gate_amplitude", chain.gate_amplitude);
    chain.gate_width = get_num(j, "gate_width", chain.gate_width);
    chain.gate_edge_time = get_num(j, "gate_edge_time", chain.gate_edge_time);
    chain.coupling_time_constant =
        get_num(j, "coupling_time_constant", chain.coupling_time_constant);
    chain.avalanche_rise = get_num(j, "avalanche_rise", chain.avalanche_rise);
    chain.avalanche_fall = get_num(j, "avalanche_fall", chain.avalanche_fall);
    chain.gain_mismatch = get_num(j, "gain_mismatch", chain.gain_mismatch);
    chain.passband_low = get_num(j, "passband_low", chain.passband_low);
    chain.passband_high = get_num(j, "passband_high", chain.passband_high);
    chain.threshold = get_num(j, "threshold", chain.threshold);
    chain.sample_dt = get_num(j, "sample_dt", chain.sample_dt);
    return chain;
}

json chain_to_json(const ChainParams& c) {
    return json{{"gate_amplitude", c.gate_amplitude},
                {"gate_width", c.gate_width},
                {"gate_edge_time", c.gate_edge_time},
                {"coupling_time_constant", c.coupling_time_constant},
                {"avalanche_rise", c.avalanche_rise},
                {"avalanche_fall", c.avalanche_fall},
                {"gain_mismatch", c.gain_mismatch},
                {"passband_low", c.passband_low},
                {"passband_high", c.passband_high},
                {"threshold", c.threshold},
                {"sample_dt", c.sample_dt}};
}

LinkParams link_from_json(const json& j, LinkParams link) {
    link.attenuation_db_per_km =
        get_num(j, "attenuation_db_per_km", link.attenuation_db_per_km);
    if (j.contains("source")) {
        const std::string s = j.at("source").get<std::string>();
        if (s == "ideal")
            link.source = SourceModel::IdealSinglePhoton;
        else if (s == "weak_coherent")
            link.source = SourceModel::WeakCoherent;
        else
            throw ConfigError("link: source must be 'ideal' or 'weak_coherent'");
    }
    link.source_mu = get_num(j, "source_mu", link.source_mu);
    if (j.contains("criterion")) {
        const std::string c = j.at("criterion").get<std::string>();
        if (c == "ratio")
            link.criterion = RangeCriterion::DarkSignalRatio;
        else if (c == "qber")
            link.criterion = RangeCriterion::MaxQber;
        else
            throw ConfigError("link: criterion must be 'ratio' or 'qber'");
    }
    link.criterion_value = get_num(j, "criterion_value", link.criterion_value);
    link.eta = get_num(j, "eta", link.eta);
    link.pd = get_num(j, "pd", link.pd);
    return link;
}

json link_to_json(const LinkParams& l) {
    return json{
        {"attenuation_db_per_km", l.attenuation_db_per_km},
        {"source", l.source == SourceModel::WeakCoherent ? "weak_coherent" : "ideal"},
        {"source_mu", l.source_mu},
        {"criterion", l.criterion == RangeCriterion::MaxQber ? "qber" : "ratio"},
        {"criterion_value", l.criterion_value},
        {"eta", l.eta},
        {"pd", l.pd}};
}

}  // namespace

ToolConfig default_tool_config() {
    ToolConfig cfg;
    cfg.run.apd1.device = device_preset("EPM239BA-178K");
    cfg.run.apd1.overbias = 1.5;
    cfg.run.apd2 = cfg.run.apd1;
    cfg.run.n_gates = 1'000'000;
    cfg.run.mean_photons = 0.2;
    cfg.link.eta = 0.11;
    cfg.link.pd = 7e-7;
    return cfg;
}

ToolConfig tool_config_from_json(const json& j) {
    try {
        ToolConfig cfg = default_tool_config();
        if (j.contains("device1")) cfg.run.apd1 = apd_from_json(j.at("device1"), cfg.run.apd1);
        if (j.contains("device2")) cfg.run.apd2 = apd_from_json(j.at("device2"), cfg.run.apd2);
        if (j.contains("chain")) cfg.run.chain = chain_from_json(j.at("chain"), cfg.run.chain);
        if (j.contains("run")) {
            const json& r = j.at("run");
            cfg.run.clock_rate = get_num(r, "clock_rate", cfg.run.clock_rate);
            cfg.run.n_gates = get_u64(r, "n_gates", cfg.run.n_gates);
            cfg.run.mean_photons = get_num(r, "mean_photons", cfg.run.mean_photons);
            cfg.run.splitter_ratio = get_num(r, "splitter_ratio", cfg.run.splitter_ratio);
            cfg.run.seed = get_u64(r, "seed", cfg.run.seed);
            cfg.run.waveform_mode = get_bool(r, "waveform_mode", cfg.run.waveform_mode);
        }
        if (j.contains("link")) cfg.link = link_from_json(j.at("link"), cfg.link);
        if (j.contains("sweep")) {
            const json& s = j.at("sweep");
            cfg.sweep.overbias_grid = get_grid(s, "overbias_grid", cfg.sweep.overbias_grid);
            cfg.sweep.mu_grid = get_grid(s, "mu_grid", cfg.sweep.mu_grid);
            cfg.sweep.gates_per_point =
                get_u64(s, "gates_per_point", cfg.sweep.gates_per_point);
        }
        if (j.contains("afterpulse")) {
            const json& a = j.at("afterpulse");
            cfg.afterpulse.interval_grid_s =
                get_grid(a, "interval_grid_s", cfg.afterpulse.interval_grid_s);
            cfg.afterpulse.n_pairs = get_u64(a, "n_pairs", cfg.afterpulse.n_pairs);
            cfg.afterpulse.pulse_a_mean_photons =
                get_num(a, "pulse_a_mean_photons", cfg.afterpulse.pulse_a_mean_photons);
            cfg.afterpulse.device_baseline =
                get_bool(a, "device_baseline", cfg.afterpulse.device_baseline);
        }
        if (j.contains("whichpath")) {
            const json& w = j.at("whichpath");
            cfg.whichpath.mu_grid = get_grid(w, "mu_grid", cfg.whichpath.mu_grid);
        }
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config JSON: ") + e.what());
    }
}

json tool_config_to_json(const ToolConfig& cfg) {
    return json{{"device1", apd_to_json(cfg.run.apd1)},
                {"device2", apd_to_json(cfg.run.apd2)},
                {"chain", chain_to_json(cfg.run.chain)},
                {"run",
                 {{"clock_rate", cfg.run.clock_rate},
                  {"n_gates", cfg.run.n_gates},
                  {"mean_photons", cfg.run.mean_photons},
                  {"splitter_ratio", cfg.run.splitter_ratio},
                  {"seed", cfg.run.seed},
                  {"waveform_mode", cfg.run.waveform_mode}}},
                {"link", link_to_json(cfg.link)},
                {"sweep",
                 {{"overbias_grid", cfg.sweep.overbias_grid},
                  {"mu_grid", cfg.sweep.mu_grid},
                  {"gates_per_point", cfg.sweep.gates_per_point}}},
                {"afterpulse",
                 {{"interval_grid_s", cfg.afterpulse.interval_grid_s},
                  {"n_pairs", cfg.afterpulse.n_pairs},
                  {"pulse_a_mean_photons", cfg.afterpulse.pulse_a_mean_photons},
                  {"device_baseline", cfg.afterpulse.device_baseline}}},
                {"whichpath", {{"mu_grid", cfg.whichpath.mu_grid}}}};
}

ToolConfig load_tool_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return tool_config_from_json(j);
}

std::string config_hash(const json& canonical) {
    const std::string dump = canonical.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace apdsim
