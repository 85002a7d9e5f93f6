#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "apdsim/device.hpp"
#include "apdsim/signalchain.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace apdsim;

namespace {

double peak_abs(const Waveform& w) {
    double m = 0.0;
    for (double s : w.samples) m = std::max(m, std::abs(s));
    return m;
}

double peak_min(const Waveform& w) {
    double m = 0.0;
    for (double s : w.samples) m = std::min(m, s);
    return m;
}

// Independent oracle: signed lobe areas by direct sample summation.
std::pair<double, double> lobe_areas(const Waveform& w) {
    double pos = 0.0, neg = 0.0;
    for (double s : w.samples) (s >= 0.0 ? pos : neg) += s * w.dt;
    return {pos, neg};
}

Waveform random_waveform(std::mt19937_64& gen, const Waveform& grid) {
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    Waveform w = grid;
    for (double& s : w.samples) s = amp(gen);
    return w;
}

}  // namespace

TEST_CASE("gate spike synthesis") {
    ChainParams p;

    SUBCASE("zero gate amplitude gives a silent trace") {
        p.gate_amplitude = 0.0;
        const Waveform w = synth_gate_spike(p);
        CHECK(peak_abs(w) == 0.0);
    }

    SUBCASE("peak scales linearly with gate amplitude") {
        const double peak1 = peak_abs(synth_gate_spike(p));
        p.gate_amplitude *= 2.0;
        const double peak2 = peak_abs(synth_gate_spike(p));
        CHECK(peak2 == doctest::Approx(2.0 * peak1).epsilon(1e-12));
        CHECK(peak1 > 0.1);  // strong spikes, comparable to the gate volts
    }

    SUBCASE("bipolar pair: leading lobe positive, trailing negative, areas balance") {
        const Waveform w = synth_gate_spike(p);
        // Leading edge spike is positive, trailing spike negative.
        std::size_t i_max = 0, i_min = 0;
        for (std::size_t i = 0; i < w.samples.size(); ++i) {
            if (w.samples[i] > w.samples[i_max]) i_max = i;
            if (w.samples[i] < w.samples[i_min]) i_min = i;
        }
        CHECK(w.time_at(i_max) < p.gate_width / 2.0);
        CHECK(w.time_at(i_min) > p.gate_width / 2.0);
        const auto [pos, neg] = lobe_areas(w);
        CHECK(pos > 0.0);
        CHECK(std::abs(pos + neg) / pos < 0.01);  // high-pass passes no DC
    }

    SUBCASE("sample step must resolve the gate edge") {
        p.sample_dt = p.gate_edge_time;
        CHECK_THROWS_AS(synth_gate_spike(p), ConfigError);
    }
}

TEST_CASE("avalanche pulse synthesis") {
    ChainParams p;
    const double t_center = p.gate_width / 2.0;

    SUBCASE("zero amplitude gives a silent trace") {
        CHECK(peak_abs(synth_avalanche_pulse(p, 0.0, t_center)) == 0.0);
    }

    SUBCASE("peak sample lands within 5 percent of the requested amplitude") {
        REQUIRE(p.sample_dt <= p.avalanche_rise / 10.0);
        const Waveform w = synth_avalanche_pulse(p, 0.3, t_center);
        CHECK(peak_abs(w) == doctest::Approx(0.3).epsilon(0.05));
        CHECK(peak_abs(w) <= 0.3 + 1e-12);  // normalized, never overshoots
    }

    SUBCASE("pulse area scales linearly with amplitude") {
        const auto [pos1, neg1] = lobe_areas(synth_avalanche_pulse(p, 0.1, t_center));
        const auto [pos3, neg3] = lobe_areas(synth_avalanche_pulse(p, 0.3, t_center));
        CHECK(neg1 == 0.0);
        CHECK(neg3 == 0.0);
        CHECK(pos3 == doctest::Approx(3.0 * pos1).epsilon(1e-12));
    }

    SUBCASE("equal rise and fall constants are handled") {
        p.avalanche_fall = p.avalanche_rise;
        const Waveform w = synth_avalanche_pulse(p, 0.3, t_center);
        CHECK(peak_abs(w) == doctest::Approx(0.3).epsilon(0.05));
    }

    SUBCASE("trigger outside the gate window is rejected") {
        CHECK_THROWS_AS(synth_avalanche_pulse(p, 0.3, -1e-12), std::invalid_argument);
        CHECK_THROWS_AS(synth_avalanche_pulse(p, 0.3, p.gate_width + 1e-12),
                        std::invalid_argument);
    }
}

TEST_CASE("arm composition") {
    ChainParams p;
    const Waveform spike = synth_gate_spike(p);
    const Waveform pulse = synth_avalanche_pulse(p, 0.3, p.gate_width / 2.0);

    SUBCASE("no avalanche: gain-scaled spike") {
        const Waveform arm = compose_arm(p, spike, std::nullopt, -1, 0.7);
        for (std::size_t i = 0; i < arm.samples.size(); ++i)
            CHECK(arm.samples[i] == doctest::Approx(0.7 * spike.samples[i]));
    }

    SUBCASE("negative polarity makes the avalanche contribution negative") {
        const Waveform arm = compose_arm(p, spike, pulse, -1, 1.0);
        double contribution = 0.0;
        for (std::size_t i = 0; i < arm.samples.size(); ++i)
            contribution = std::min(contribution, arm.samples[i] - spike.samples[i]);
        CHECK(contribution < -0.25);  // pulse appears inverted on the arm
    }

    SUBCASE("zero arm gain silences the arm") {
        CHECK(peak_abs(compose_arm(p, spike, pulse, -1, 0.0)) == 0.0);
    }

    SUBCASE("misaligned waveforms are rejected") {
        Waveform shifted = pulse;
        shifted.t0 += 1e-12;
        CHECK_THROWS_AS(compose_arm(p, spike, shifted, -1, 1.0), std::invalid_argument);
    }
}

TEST_CASE("hybrid subtraction") {
    ChainParams p;
    const Waveform spike = synth_gate_spike(p);

    SUBCASE("identical arms cancel exactly at zero mismatch") {
        p.gain_mismatch = 0.0;
        const Waveform out = hybrid_subtract(p, spike, spike);
        CHECK(peak_abs(out) <= 1e-15);
    }

    SUBCASE("single input passes through a wide-open band within 10 percent") {
        p.gain_mismatch = 0.0;
        p.passband_high = 1e12;  // wide open so the pulse spectrum fits
        Waveform zero = gate_grid(p);
        const Waveform pulse = synth_avalanche_pulse(p, 0.3, p.gate_width / 2.0);
        const Waveform out = hybrid_subtract(p, pulse, zero);
        CHECK(peak_abs(out) == doctest::Approx(peak_abs(pulse)).epsilon(0.10));
    }

    SUBCASE("mismatch epsilon sets the residual exactly") {
        p.gain_mismatch = 0.05;
        const Waveform residual = hybrid_subtract(p, spike, spike);
        const Waveform arm_ref = band_limit(p, spike);
        CHECK(peak_abs(residual) / peak_abs(arm_ref) ==
              doctest::Approx(0.05).epsilon(1e-9));
    }

    SUBCASE("antisymmetry and linearity on random waveforms") {
        std::mt19937_64 gen(23);
        const Waveform grid = gate_grid(p);
        for (int trial = 0; trial < 20; ++trial) {
            const Waveform w1 = random_waveform(gen, grid);
            const Waveform w2 = random_waveform(gen, grid);

            ChainParams sym = p;
            sym.gain_mismatch = 0.0;
            const Waveform ab = hybrid_subtract(sym, w1, w2);
            const Waveform ba = hybrid_subtract(sym, w2, w1);
            for (std::size_t i = 0; i < ab.samples.size(); ++i)
                CHECK(ab.samples[i] ==
                      doctest::Approx(-ba.samples[i]).epsilon(1e-12));

            // Additivity in both arguments (with mismatch on).
            const Waveform w3 = random_waveform(gen, grid);
            const Waveform w4 = random_waveform(gen, grid);
            Waveform sum1 = w1, sum2 = w2;
            for (std::size_t i = 0; i < sum1.samples.size(); ++i) {
                sum1.samples[i] += w3.samples[i];
                sum2.samples[i] += w4.samples[i];
            }
            const Waveform lhs = hybrid_subtract(p, sum1, sum2);
            const Waveform rhs1 = hybrid_subtract(p, w1, w2);
            const Waveform rhs2 = hybrid_subtract(p, w3, w4);
            for (std::size_t i = 0; i < lhs.samples.size(); ++i)
                CHECK(lhs.samples[i] ==
                      doctest::Approx(rhs1.samples[i] + rhs2.samples[i])
                          .epsilon(1e-9)
                          .scale(1.0));
        }
    }

    SUBCASE("misaligned inputs are rejected") {
        Waveform shorter = spike;
        shorter.samples.pop_back();
        CHECK_THROWS_AS(hybrid_subtract(p, spike, shorter), std::invalid_argument);
    }
}

TEST_CASE("discrimination") {
    ChainParams p;

    SUBCASE("silent trace classifies as none") {
        const Waveform w = gate_grid(p);
        const Classification c = discriminate(p, w, {w.t0, w.end_time()});
        CHECK(c.detection == Detection::None);
        CHECK_FALSE(c.crossing_time.has_value());
    }

    SUBCASE("negative pulse of twice the threshold is APD 1") {
        Waveform w = gate_grid(p);
        const Waveform pulse = synth_avalanche_pulse(p, 2.0 * p.threshold,
                                                     p.gate_width / 2.0);
        for (std::size_t i = 0; i < w.samples.size(); ++i)
            w.samples[i] = -pulse.samples[i];
        const Classification c = discriminate(p, w, {w.t0, w.end_time()});
        REQUIRE(c.detection == Detection::Apd1);
        REQUIRE(c.crossing_time.has_value());
        // Crossing near the leading edge: after trigger, before the peak.
        std::size_t i_min = 0;
        for (std::size_t i = 0; i < w.samples.size(); ++i)
            if (w.samples[i] < w.samples[i_min]) i_min = i;
        CHECK(*c.crossing_time > p.gate_width / 2.0);
        CHECK(*c.crossing_time <= w.time_at(i_min));
    }

    SUBCASE("coincident equal avalanches cancel to none at zero mismatch") {
        p.gain_mismatch = 0.0;
        const Waveform spike = synth_gate_spike(p);
        const Waveform pulse = synth_avalanche_pulse(p, 0.3, p.gate_width / 2.0);
        const Waveform arm1 = compose_arm(p, spike, pulse, -1, 1.0);
        const Waveform arm2 = compose_arm(p, spike, pulse, -1, 1.0);
        const Waveform out = hybrid_subtract(p, arm1, arm2);
        CHECK(discriminate(p, out, {out.t0, out.end_time()}).detection ==
              Detection::None);
    }

    SUBCASE("both thresholds crossed is ambiguous") {
        Waveform w = gate_grid(p);
        const std::size_t n = w.samples.size();
        w.samples[n / 3] = -2.0 * p.threshold;
        w.samples[2 * n / 3] = 2.0 * p.threshold;
        const Classification c = discriminate(p, w, {w.t0, w.end_time()});
        CHECK(c.detection == Detection::Ambiguous);
        CHECK_FALSE(c.crossing_time.has_value());
    }

    SUBCASE("window limits which crossings count") {
        Waveform w = gate_grid(p);
        const std::size_t n = w.samples.size();
        w.samples[n / 3] = -2.0 * p.threshold;
        w.samples[2 * n / 3] = 2.0 * p.threshold;
        const double split = 0.5 * (w.time_at(n / 3) + w.time_at(2 * n / 3));
        CHECK(discriminate(p, w, {w.t0, split}).detection == Detection::Apd1);
        CHECK(discriminate(p, w, {split, w.end_time()}).detection == Detection::Apd2);
    }
}

TEST_CASE("classification is stable as the threshold is lowered") {
    // The balanced chain's point: a single avalanche stays classifiable all
    // the way down to just above the residual spike floor.
    ChainParams p;
    const Waveform spike = synth_gate_spike(p);
    const Waveform pulse = synth_avalanche_pulse(p, 0.3, p.gate_width / 2.0);
    const Waveform arm1 = compose_arm(p, spike, pulse, -1, 1.0);
    const Waveform arm2 = compose_arm(p, spike, std::nullopt, -1, 1.0);
    const Waveform out = hybrid_subtract(p, arm1, arm2);

    const double residual_floor =
        peak_abs(hybrid_subtract(p, spike, spike));  // common-mode leftovers
    REQUIRE(discriminate(p, out, {out.t0, out.end_time()}).detection ==
            Detection::Apd1);
    for (double vth = p.threshold; vth > 1.1 * residual_floor; vth *= 0.8) {
        ChainParams lower = p;
        lower.threshold = vth;
        CHECK(discriminate(lower, out, {out.t0, out.end_time()}).detection ==
              Detection::Apd1);
    }
}

TEST_CASE("sign correctness with spikes disabled") {
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> vth(0.02, 0.2);
    std::uniform_real_distribution<double> extra(1.01, 4.0);
    for (int trial = 0; trial < 50; ++trial) {
        ChainParams p;
        p.gate_amplitude = 0.0;  // spikes off
        p.threshold = vth(gen);
        const double g1 = 1.0 + p.gain_mismatch / 2.0;
        const double amplitude = extra(gen) * p.threshold / g1 / 0.8;
        // The 0.8 margin covers the band-limit's peak attenuation.

        const Waveform spike = synth_gate_spike(p);
        const Waveform pulse = synth_avalanche_pulse(p, amplitude, p.gate_width / 2.0);
        const Waveform quiet = compose_arm(p, spike, std::nullopt, -1, 1.0);

        const Waveform arm1 = compose_arm(p, spike, pulse, -1, 1.0);
        const Waveform out1 = hybrid_subtract(p, arm1, quiet);
        CHECK(discriminate(p, out1, {out1.t0, out1.end_time()}).detection ==
              Detection::Apd1);

        const Waveform arm2 = compose_arm(p, spike, pulse, -1, 1.0);
        const Waveform out2 = hybrid_subtract(p, quiet, arm2);
        CHECK(discriminate(p, out2, {out2.t0, out2.end_time()}).detection ==
              Detection::Apd2);
    }
}

TEST_CASE("chain parameter validation") {
    ChainParams p;
    p.gain_mismatch = 1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = ChainParams{};
    p.passband_low = p.passband_high;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = ChainParams{};
    p.threshold = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = ChainParams{};
    p.gate_edge_time = p.gate_width;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}
