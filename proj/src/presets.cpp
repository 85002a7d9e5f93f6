#include "apdsim/device.hpp"

#include <cmath>

namespace apdsim {

namespace {

// Release probability per carrier chosen so that a single avalanche
// followed by `anchor_interval` of detrapping yields exactly
// `anchor_prob` afterpulse probability.
double calibrated_release(double anchor_prob, double anchor_interval,
                          double tau, double capture) {
    return -std::log1p(-anchor_prob) * std::exp(anchor_interval / tau) / capture;
}

TrapParams make_trap(double capture, double tau, double anchor_prob) {
    TrapParams trap;
    trap.capture_per_avalanche = capture;
    trap.detrap_time_constant = tau;
    trap.release_prob_per_carrier = calibrated_release(anchor_prob, 1e-6, tau, capture);
    return trap;
}

DeviceCharacteristic make_preset(std::string name, double temperature_K,
                                 double v_br, std::vector<BiasPoint> table,
                                 TrapParams trap) {
    DeviceCharacteristic dev;
    dev.name = std::move(name);
    dev.temperature_K = temperature_K;
    dev.breakdown_voltage = v_br;
    dev.bias_table = std::move(table);
    dev.trap = trap;
    dev.avalanche_gain_slope = 0.2;
    dev.validate();
    return dev;
}

}  // namespace

DeviceCharacteristic device_preset(const std::string& name) {
    // Anchor rows (178 K: 11 % / 7e-7 at 1.5 V overbias; 213 K: 20 % / 3e-5
    // at the maximum row) are the published operating points. All other rows
    // are monotone interpolation scaffolding. Breakdown voltages are nominal
    // placeholders; only overbias enters the model. Afterpulse parameters are
    // calibrated so one avalanche plus 1 us of detrapping gives the anchor
    // probability (1e-4 at 178 K and 213 K).
    if (name == "EPM239BA-140K")
        return make_preset("EPM239BA-140K", 140.0, 46.0,
                           {{0.5, 0.030, 1.0e-8},
                            {1.0, 0.070, 5.0e-8},
                            {1.5, 0.100, 1.5e-7},
                            {2.0, 0.120, 4.0e-7},
                            {2.5, 0.140, 1.0e-6}},
                           make_trap(0.20, 3e-6, 2e-3));
    if (name == "EPM239BA-160K")
        return make_preset("EPM239BA-160K", 160.0, 47.5,
                           {{0.5, 0.025, 2.0e-8},
                            {1.0, 0.065, 1.0e-7},
                            {1.5, 0.100, 3.0e-7},
                            {2.0, 0.120, 8.0e-7},
                            {2.5, 0.140, 2.5e-6}},
                           make_trap(0.10, 2e-6, 5e-4));
    if (name == "EPM239BA-178K")
        return make_preset("EPM239BA-178K", 178.0, 49.0,
                           {{0.5, 0.020, 5.0e-8},
                            {1.0, 0.060, 2.0e-7},
                            {1.5, 0.110, 7.0e-7},
                            {2.0, 0.130, 3.0e-6},
                            {2.5, 0.150, 1.2e-5}},
                           make_trap(0.05, 1e-6, 1e-4));
    if (name == "EPM239BA-213K")
        return make_preset("EPM239BA-213K", 213.0, 52.0,
                           {{0.5, 0.040, 1.0e-6},
                            {1.0, 0.090, 4.0e-6},
                            {1.5, 0.140, 9.0e-6},
                            {2.0, 0.170, 1.8e-5},
                            {2.5, 0.200, 3.0e-5}},
                           make_trap(0.02, 5e-7, 1e-4));
    throw ConfigError("unknown device preset '" + name +
                      "' (temperatures between presets are not interpolated)");
}

std::vector<std::string> device_preset_names() {
    return {"EPM239BA-140K", "EPM239BA-160K", "EPM239BA-178K", "EPM239BA-213K"};
}

}  // namespace apdsim
