#include "apdsim/signalchain.hpp"

#include "apdsim/device.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace apdsim {

void ChainParams::validate() const {
    if (gate_width <= 0.0 || gate_edge_time <= 0.0 || coupling_time_constant <= 0.0 ||
        avalanche_rise <= 0.0 || avalanche_fall <= 0.0 || sample_dt <= 0.0)
        throw ConfigError("chain: all time constants must be positive");
    if (gain_mismatch < 0.0 || gain_mismatch >= 1.0)
        throw ConfigError("chain: gain mismatch must be in [0,1)");
    if (passband_low <= 0.0 || passband_low >= passband_high)
        throw ConfigError("chain: passband_low must be positive and below passband_high");
    if (threshold <= 0.0)
        throw ConfigError("chain: threshold must be positive");
    if (2.0 * gate_edge_time > gate_width)
        throw ConfigError("chain: gate edges do not fit inside the gate width");
}

const char* to_string(Detection d) {
    switch (d) {
        case Detection::Apd1: return "apd1";
        case Detection::Apd2: return "apd2";
        case Detection::None: return "none";
        case Detection::Ambiguous: return "ambiguous";
    }
    return "none";
}

namespace {

void require_aligned(const Waveform& a, const Waveform& b) {
    if (a.dt != b.dt || a.t0 != b.t0 || a.samples.size() != b.samples.size())
        throw std::invalid_argument("waveforms are not aligned (dt/t0/length mismatch)");
}

// First-order IIR section y[n] = b0 x[n] + b1 x[n-1] - a1 y[n-1].
struct FirstOrderSection {
    double b0, b1, a1;
    double x1 = 0.0, y1 = 0.0;

    double step(double x) {
        const double y = b0 * x + b1 * x1 - a1 * y1;
        x1 = x;
        y1 = y;
        return y;
    }
};

// Bilinear-transform sections for the hybrid's processing band.
FirstOrderSection make_lowpass(double cutoff_hz, double dt) {
    const double k = std::tan(std::numbers::pi * cutoff_hz * dt);
    return {k / (1.0 + k), k / (1.0 + k), (k - 1.0) / (k + 1.0)};
}

FirstOrderSection make_highpass(double cutoff_hz, double dt) {
    const double k = std::tan(std::numbers::pi * cutoff_hz * dt);
    return {1.0 / (1.0 + k), -1.0 / (1.0 + k), (k - 1.0) / (k + 1.0)};
}

double trapezoid_level(const ChainParams& p, double t) {
    if (t <= 0.0 || t >= p.gate_width) return 0.0;
    if (t < p.gate_edge_time) return p.gate_amplitude * (t / p.gate_edge_time);
    if (t > p.gate_width - p.gate_edge_time)
        return p.gate_amplitude * ((p.gate_width - t) / p.gate_edge_time);
    return p.gate_amplitude;
}

}  // namespace

Waveform gate_grid(const ChainParams& p) {
    p.validate();
    // Pre-roll for the leading edge, post-roll long enough for the slowest
    // pulse tail and the coupling differentiator to settle well below the
    // lobe-integral tolerance.
    const double pre = 2.0 * p.gate_edge_time + 10.0 * p.sample_dt;
    const double post = 8.0 * std::max({p.avalanche_fall, p.coupling_time_constant,
                                        p.gate_edge_time});
    const auto n = static_cast<std::size_t>(
        std::ceil((pre + p.gate_width + post) / p.sample_dt)) + 1;
    Waveform w;
    w.dt = p.sample_dt;
    w.t0 = -pre;
    w.samples.assign(n, 0.0);
    return w;
}

Waveform synth_gate_spike(const ChainParams& p) {
    if (p.sample_dt >= p.gate_edge_time)
        throw ConfigError("chain: sample_dt must resolve the gate edges");
    Waveform w = gate_grid(p);
    // RC differentiator: y[n] = a (y[n-1] + x[n] - x[n-1]).
    const double a = p.coupling_time_constant / (p.coupling_time_constant + w.dt);
    double x1 = 0.0, y1 = 0.0;
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const double x = trapezoid_level(p, w.time_at(i));
        y1 = a * (y1 + x - x1);
        x1 = x;
        w.samples[i] = y1;
    }
    return w;
}

Waveform synth_avalanche_pulse(const ChainParams& p, double amplitude, double t_trigger) {
    if (amplitude < 0.0)
        throw std::invalid_argument("avalanche amplitude must be >= 0");
    if (t_trigger < 0.0 || t_trigger > p.gate_width)
        throw std::invalid_argument("avalanche trigger outside the gate window");
    Waveform w = gate_grid(p);
    if (amplitude == 0.0) return w;

    const double rise = p.avalanche_rise;
    const double fall = p.avalanche_fall;
    if (rise == fall) {
        // Degenerate double exponential: (t/tau) e^(1 - t/tau), unit peak at tau.
        for (std::size_t i = 0; i < w.samples.size(); ++i) {
            const double t = w.time_at(i) - t_trigger;
            if (t <= 0.0) continue;
            w.samples[i] = amplitude * (t / rise) * std::exp(1.0 - t / rise);
        }
        return w;
    }
    const double t_peak = (rise * fall / (fall - rise)) * std::log(fall / rise);
    const double peak = std::exp(-t_peak / fall) - std::exp(-t_peak / rise);
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const double t = w.time_at(i) - t_trigger;
        if (t <= 0.0) continue;
        w.samples[i] = amplitude * (std::exp(-t / fall) - std::exp(-t / rise)) / peak;
    }
    return w;
}

Waveform compose_arm(const ChainParams&, const Waveform& spike,
                     const std::optional<Waveform>& avalanche,
                     int polarity, double arm_gain) {
    if (polarity != 1 && polarity != -1)
        throw std::invalid_argument("arm polarity must be +1 or -1");
    Waveform out = spike;
    if (avalanche) {
        require_aligned(spike, *avalanche);
        for (std::size_t i = 0; i < out.samples.size(); ++i)
            out.samples[i] += polarity * avalanche->samples[i];
    }
    for (double& s : out.samples) s *= arm_gain;
    return out;
}

Waveform band_limit(const ChainParams& p, const Waveform& w) {
    // Bilinear prewarp needs the cutoff below Nyquist; a wider passband is
    // indistinguishable on this grid anyway.
    const double nyquist_cap = 0.49 / w.dt;
    FirstOrderSection hp = make_highpass(std::min(p.passband_low, nyquist_cap), w.dt);
    FirstOrderSection lp = make_lowpass(std::min(p.passband_high, nyquist_cap), w.dt);
    Waveform out = w;
    for (double& s : out.samples) s = lp.step(hp.step(s));
    return out;
}

Waveform hybrid_subtract(const ChainParams& p, const Waveform& w1, const Waveform& w2) {
    require_aligned(w1, w2);
    const double g1 = 1.0 + p.gain_mismatch / 2.0;
    const double g2 = 1.0 - p.gain_mismatch / 2.0;
    Waveform diff = w1;
    for (std::size_t i = 0; i < diff.samples.size(); ++i)
        diff.samples[i] = g1 * w1.samples[i] - g2 * w2.samples[i];
    return band_limit(p, diff);
}

Classification discriminate(const ChainParams& p, const Waveform& w,
                            std::pair<double, double> gate_window) {
    std::optional<double> neg_cross, pos_cross;
    for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const double t = w.time_at(i);
        if (t < gate_window.first || t > gate_window.second) continue;
        if (!neg_cross && w.samples[i] < -p.threshold) neg_cross = t;
        if (!pos_cross && w.samples[i] > p.threshold) pos_cross = t;
    }
    if (neg_cross && pos_cross) return {Detection::Ambiguous, std::nullopt};
    if (neg_cross) return {Detection::Apd1, neg_cross};
    if (pos_cross) return {Detection::Apd2, pos_cross};
    return {Detection::None, std::nullopt};
}

}  // namespace apdsim
