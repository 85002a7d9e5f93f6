#include "apdsim/montecarlo.hpp"

#include <cmath>
#include <future>
#include <stdexcept>
#include <utility>

namespace apdsim {

void RunConfig::validate() const {
    if (n_gates < 1) throw ConfigError("run: n_gates must be >= 1");
    if (clock_rate <= 0.0) throw ConfigError("run: clock_rate must be positive");
    if (mean_photons < 0.0) throw ConfigError("run: mean_photons must be >= 0");
    if (splitter_ratio < 0.0 || splitter_ratio > 1.0)
        throw ConfigError("run: splitter_ratio must be in [0,1]");
    for (const ApdOperatingPoint* apd : {&apd1, &apd2}) {
        apd->device.validate();
        if (apd->overbias < 0.0)
            throw ConfigError("run: operating overbias must be >= 0");
        if (apd->dc_fraction < 0.0 || apd->dc_fraction > 1.0)
            throw ConfigError("run: dc_fraction must be in [0,1]");
    }
    chain.validate();
}

GateContext::GateContext(RunConfig config) : config_(std::move(config)) {
    config_.validate();
    const ApdOperatingPoint* apds[2] = {&config_.apd1, &config_.apd2};
    for (int k = 0; k < 2; ++k) {
        eta_[k] = efficiency_at(apds[k]->device, apds[k]->overbias);
        dark_[k] = dark_prob_at(apds[k]->device, apds[k]->overbias);
        amplitude_[k] = apds[k]->device.avalanche_gain_slope * apds[k]->overbias;
    }
}

Classification GateContext::classify(bool avalanche_1, bool avalanche_2) const {
    if (!config_.waveform_mode) {
        const double t_center = config_.chain.gate_width / 2.0;
        if (avalanche_1 && avalanche_2) return {Detection::None, std::nullopt};
        if (avalanche_1) return {Detection::Apd1, t_center};
        if (avalanche_2) return {Detection::Apd2, t_center};
        return {Detection::None, std::nullopt};
    }
    auto& slot = memo_[avalanche_1 ? 1 : 0][avalanche_2 ? 1 : 0];
    if (!slot) slot = classify_waveform(avalanche_1, avalanche_2);
    return *slot;
}

Classification GateContext::classify_waveform(bool avalanche_1, bool avalanche_2) const {
    const ChainParams& p = config_.chain;
    const double t_center = p.gate_width / 2.0;
    const Waveform spike = synth_gate_spike(p);
    std::optional<Waveform> pulse1, pulse2;
    if (avalanche_1) pulse1 = synth_avalanche_pulse(p, amplitude_[0], t_center);
    if (avalanche_2) pulse2 = synth_avalanche_pulse(p, amplitude_[1], t_center);
    const Waveform arm1 = compose_arm(p, spike, pulse1, -1, 1.0);
    const Waveform arm2 = compose_arm(p, spike, pulse2, -1, 1.0);
    const Waveform out = hybrid_subtract(p, arm1, arm2);
    return discriminate(p, out, {out.t0, out.end_time()});
}

GateOutcome simulate_gate(RngStream& rng, const GateContext& ctx,
                          TrapState& trap1, TrapState& trap2, bool illuminated) {
    const double mu = ctx.config().mean_photons;
    std::uint32_t n = 0;
    if (illuminated && mu > 0.0)
        n = static_cast<std::uint32_t>(rng.poisson(mu));
    return simulate_gate_with_photons(rng, ctx, n, trap1, trap2);
}

GateOutcome simulate_gate_with_photons(RngStream& rng, const GateContext& ctx,
                                       std::uint32_t n_photons,
                                       TrapState& trap1, TrapState& trap2) {
    const RunConfig& cfg = ctx.config();
    GateOutcome out;
    out.truth.photons_sent = n_photons;

    std::uint32_t routed1 = 0;
    for (std::uint32_t i = 0; i < n_photons; ++i)
        if (rng.uniform() < cfg.splitter_ratio) ++routed1;
    const std::uint32_t routed2 = n_photons - routed1;

    TrapState* traps[2] = {&trap1, &trap2};
    const ApdOperatingPoint* apds[2] = {&cfg.apd1, &cfg.apd2};
    const std::uint32_t routed[2] = {routed1, routed2};
    std::uint32_t detected[2] = {0, 0};
    bool dark[2], after[2], avalanche[2];

    for (int k = 0; k < 2; ++k) {
        for (std::uint32_t i = 0; i < routed[k]; ++i)
            if (rng.uniform() < ctx.efficiency(k)) ++detected[k];
        dark[k] = rng.bernoulli(ctx.dark_prob(k));
        after[k] = rng.bernoulli(afterpulse_prob(*traps[k], apds[k]->device.trap));
        avalanche[k] = detected[k] > 0 || dark[k] || after[k];
        if (avalanche[k])
            *traps[k] = trap_capture(*traps[k], apds[k]->device.trap,
                                     apds[k]->overbias, apds[k]->dc_fraction);
    }

    out.truth.photons_detected_1 = detected[0];
    out.truth.photons_detected_2 = detected[1];
    out.truth.dark_1 = dark[0];
    out.truth.dark_2 = dark[1];
    out.truth.afterpulse_1 = after[0];
    out.truth.afterpulse_2 = after[1];
    out.coincident = avalanche[0] && avalanche[1];
    out.classification = ctx.classify(avalanche[0], avalanche[1]);
    return out;
}

namespace {

void tally(RunResult& result, const GateOutcome& outcome) {
    switch (outcome.classification.detection) {
        case Detection::Apd1: ++result.counts.apd1; break;
        case Detection::Apd2: ++result.counts.apd2; break;
        case Detection::None: ++result.counts.none; break;
        case Detection::Ambiguous: ++result.counts.ambiguous; break;
    }
    result.truth.photons_sent += outcome.truth.photons_sent;
    result.truth.detections_1 += outcome.truth.photons_detected_1;
    result.truth.detections_2 += outcome.truth.photons_detected_2;
    result.truth.dark_1 += outcome.truth.dark_1 ? 1 : 0;
    result.truth.dark_2 += outcome.truth.dark_2 ? 1 : 0;
    result.truth.afterpulse_1 += outcome.truth.afterpulse_1 ? 1 : 0;
    result.truth.afterpulse_2 += outcome.truth.afterpulse_2 ? 1 : 0;
    result.truth.coincident += outcome.coincident ? 1 : 0;
}

}  // namespace

RunResult run_experiment(const RunConfig& config) {
    GateContext ctx(config);
    RngStream rng(config.seed);
    RunResult result;
    result.seed = config.seed;
    result.config = ctx.config();
    if (config.record_outcomes) result.outcomes.reserve(config.n_gates);

    TrapState trap1, trap2;
    const double gate_spacing = 1.0 / config.clock_rate;
    for (std::uint64_t i = 0; i < config.n_gates; ++i) {
        if (i > 0) {
            trap1 = trap_decay(trap1, config.apd1.device.trap, gate_spacing);
            trap2 = trap_decay(trap2, config.apd2.device.trap, gate_spacing);
        }
        GateOutcome outcome = simulate_gate(rng, ctx, trap1, trap2, true);
        outcome.gate_index = i;
        tally(result, outcome);
        if (config.record_outcomes) result.outcomes.push_back(outcome);
    }
    return result;
}

AfterpulseData double_pulse_run(const RunConfig& config, double interval,
                                std::uint64_t n_pairs,
                                double pulse_a_mean_photons) {
    config.validate();
    if (interval < config.chain.gate_width)
        throw std::invalid_argument("double_pulse_run: interval below the gate width");
    if (n_pairs < 1)
        throw std::invalid_argument("double_pulse_run: n_pairs must be >= 1");
    if (pulse_a_mean_photons <= 0.0)
        throw std::invalid_argument("double_pulse_run: gate A flux must be positive");

    // Single-APD characterization: the protocol drives APD 1 alone, as in
    // the per-device measurement it models.
    const ApdOperatingPoint& apd = config.apd1;
    const double eta = efficiency_at(apd.device, apd.overbias);
    const double pd = dark_prob_at(apd.device, apd.overbias);
    const TrapParams& trap_params = apd.device.trap;

    AfterpulseData data;
    data.interval_s = interval;
    data.n_pairs = n_pairs;
    data.seed = config.seed;

    RngStream rng(config.seed);
    for (std::uint64_t pair = 0; pair < n_pairs; ++pair) {
        TrapState trap;  // long dead time between pairs resets the traps

        // Gate A: illuminated. Draws: photon count, per-photon detection,
        // dark, afterpulse (the latter vacuous with fresh traps but kept in
        // the layout so paired-seed runs stay aligned).
        const std::uint64_t n = rng.poisson(pulse_a_mean_photons);
        std::uint64_t detected = 0;
        for (std::uint64_t i = 0; i < n; ++i)
            if (rng.uniform() < eta) ++detected;
        const bool dark_a = rng.bernoulli(pd);
        const bool after_a = rng.bernoulli(afterpulse_prob(trap, trap_params));
        const bool click_a = detected > 0 || dark_a || after_a;
        if (click_a)
            trap = trap_capture(trap, trap_params, apd.overbias, apd.dc_fraction);

        trap = trap_decay(trap, trap_params, interval);

        // Gate B: dark. Draws: dark, afterpulse.
        const bool dark_b = rng.bernoulli(pd);
        const bool after_b = rng.bernoulli(afterpulse_prob(trap, trap_params));
        const bool click_b = dark_b || after_b;

        if (click_a) {
            ++data.click_a;
            if (click_b) ++data.click_b_with_a;
        } else {
            ++data.no_click_a;
            if (click_b) ++data.click_b_without_a;
        }
        if (after_b) ++data.afterpulse_truth_b;
    }
    return data;
}

std::vector<RunResult> batch_replicate(const RunConfig& config,
                                       std::uint32_t n_replicas,
                                       std::uint64_t base_seed) {
    if (n_replicas < 1)
        throw std::invalid_argument("batch_replicate: n_replicas must be >= 1");
    config.validate();

    std::vector<std::future<RunResult>> futures;
    futures.reserve(n_replicas);
    for (std::uint32_t i = 0; i < n_replicas; ++i) {
        RunConfig replica = config;
        replica.seed = base_seed + i;
        futures.push_back(std::async(std::launch::async | std::launch::deferred,
                                     [replica] { return run_experiment(replica); }));
    }
    std::vector<RunResult> results;
    results.reserve(n_replicas);
    for (auto& f : futures) results.push_back(f.get());
    return results;
}

}  // namespace apdsim
