#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace apdsim {

/// Uniformly sampled voltage trace covering one gate window plus margins.
struct Waveform {
    double dt = 0.0;              // seconds per sample
    double t0 = 0.0;              // time of first sample
    std::vector<double> samples;  // volts

    double time_at(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
    double end_time() const {
        return samples.empty() ? t0 : time_at(samples.size() - 1);
    }
};

/// Analog chain parameters. Defaults follow the nominal operating point:
/// 2.5 V / 750 ps gate pulses, 51 ohm loads (51 ps coupling time constant
/// with a nominal 1 pF), and a 2-2000 MHz processing band. The threshold
/// default is half the avalanche amplitude at 1.5 V overbias with the
/// default 0.2 V/V gain slope.
struct ChainParams {
    double gate_amplitude = 2.5;          // volts
    double gate_width = 750e-12;          // seconds, edge to edge
    double gate_edge_time = 100e-12;      // seconds per gate edge
    double coupling_time_constant = 51e-12;  // RC of the load differentiator
    double avalanche_rise = 100e-12;
    double avalanche_fall = 300e-12;
    double gain_mismatch = 0.05;          // epsilon, fractional arm imbalance
    double passband_low = 2e6;            // hertz
    double passband_high = 2e9;           // hertz
    double threshold = 0.15;              // volts, discriminator magnitude
    double sample_dt = 10e-12;            // seconds

    void validate() const;
};

enum class Detection { Apd1, Apd2, None, Ambiguous };

/// Discriminator verdict for one gate. crossing_time is present exactly
/// when the verdict is Apd1 or Apd2.
struct Classification {
    Detection detection = Detection::None;
    std::optional<double> crossing_time;
};

const char* to_string(Detection d);

/// Zeroed waveform on the standard grid for these chain parameters: the
/// gate occupies [0, gate_width] with settling margins on both sides. All
/// chain operations share this grid so their outputs combine directly.
Waveform gate_grid(const ChainParams& p);

/// Capacitive feedthrough of the gate pulse: the trapezoidal gate passed
/// through the first-order RC differentiator, producing the bipolar spike
/// pair at the gate edges.
Waveform synth_gate_spike(const ChainParams& p);

/// Double-exponential avalanche pulse (positive by convention; the arm
/// sign is applied in compose_arm), peak-normalized to `amplitude`,
/// starting at t_trigger inside the gate window.
Waveform synth_avalanche_pulse(const ChainParams& p, double amplitude, double t_trigger);

/// One arm as seen by the hybrid junction:
/// arm_gain * (spike + polarity * avalanche). Both physical arms carry
/// negative-going avalanche pulses (polarity -1); the subtraction then
/// renders APD 1 clicks negative and APD 2 clicks positive at the output.
Waveform compose_arm(const ChainParams& p, const Waveform& spike,
                     const std::optional<Waveform>& avalanche,
                     int polarity, double arm_gain);

/// 180-degree hybrid junction with gain mismatch epsilon:
/// band-limited (1 + eps/2) * w1 - (1 - eps/2) * w2.
Waveform hybrid_subtract(const ChainParams& p, const Waveform& w1, const Waveform& w2);

/// The hybrid's band-limiting alone (first-order high-pass at passband_low
/// cascaded with first-order low-pass at passband_high, bilinear form).
Waveform band_limit(const ChainParams& p, const Waveform& w);

/// Sign-resolving discrimination inside [window.first, window.second]:
/// Apd1 when only the negative threshold is crossed, Apd2 when only the
/// positive one, Ambiguous when both, None otherwise.
Classification discriminate(const ChainParams& p, const Waveform& w,
                            std::pair<double, double> gate_window);

}  // namespace apdsim
