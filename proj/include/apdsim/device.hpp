#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace apdsim {

/// Raised when a device table, preset, or run configuration is invalid.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Trap-mediated afterpulse model parameters for one APD.
///
/// One avalanche deposits `capture_per_avalanche` expected carriers into
/// traps; the population decays exponentially with `detrap_time_constant`,
/// and each surviving carrier triggers a click in a later gate with
/// probability `release_prob_per_carrier` (Poisson release, so the click
/// probability is 1 - exp(-release * population)).
struct TrapParams {
    double capture_per_avalanche = 0.0;  // expected trapped carriers per avalanche
    double release_prob_per_carrier = 0.0;
    double detrap_time_constant = 1e-6;  // seconds
    double bias_capture_slope = 0.0;     // k_ob: extra capture per volt of overbias
    double dc_sweep_coefficient = 0.0;   // capture reduction vs DC fraction of total bias
};

/// One row of the bias characteristic: overbias and the resulting
/// per-gate detection efficiency and dark count probability.
struct BiasPoint {
    double overbias = 0.0;  // volts above breakdown during the gate
    double efficiency = 0.0;
    double dark_prob = 0.0;
};

/// Temperature/bias-indexed characteristic of one InGaAs/InP APD in gated
/// Geiger mode. The bias table is strictly increasing in overbias with
/// non-decreasing efficiency and dark probability columns; below the first
/// row values interpolate toward (0, 0, 0) since there is no Geiger
/// operation below breakdown.
struct DeviceCharacteristic {
    std::string name;
    double temperature_K = 0.0;
    double breakdown_voltage = 0.0;      // V_br at this temperature
    std::vector<BiasPoint> bias_table;   // ordered by overbias
    TrapParams trap;
    double avalanche_gain_slope = 0.2;   // output volts per volt of overbias

    /// Throws ConfigError if any table/parameter invariant is violated.
    void validate() const;
};

/// Expected trapped-carrier population of one APD, carrying afterpulse
/// memory between gates. Pure value type; owned by one engine at a time.
struct TrapState {
    double population = 0.0;
    double last_update_time = 0.0;  // seconds
};

/// Overbias during the gate: max(0, v_dc + v_gate - V_br).
double overbias(const DeviceCharacteristic& device, double v_dc, double v_gate);

/// Detection efficiency at the given overbias (piecewise-linear in the
/// bias table, clamped above the last row, zero at zero overbias).
double efficiency_at(const DeviceCharacteristic& device, double ob);

/// Dark count probability per gate at the given overbias; interpolation
/// rules as efficiency_at.
double dark_prob_at(const DeviceCharacteristic& device, double ob);

/// Exponential detrapping over dt seconds. dt < 0 is an error.
TrapState trap_decay(const TrapState& state, const TrapParams& params, double dt);

/// Adds the capture from one avalanche at overbias `ob` with the given DC
/// fraction of total bias. The increment is floored at zero, so capture
/// never reduces the population.
TrapState trap_capture(const TrapState& state, const TrapParams& params,
                       double ob, double dc_fraction);

/// Probability that the trapped population triggers a click in this gate:
/// 1 - exp(-release_prob_per_carrier * population).
double afterpulse_prob(const TrapState& state, const TrapParams& params);

/// Built-in presets: "EPM239BA-140K", "EPM239BA-160K", "EPM239BA-178K",
/// "EPM239BA-213K". The 178 K and 213 K anchor rows carry the published
/// operating points; the remaining rows are monotone interpolation
/// scaffolding, not measured data. Throws ConfigError for unknown names.
DeviceCharacteristic device_preset(const std::string& name);

/// Names of all built-in presets.
std::vector<std::string> device_preset_names();

}  // namespace apdsim
