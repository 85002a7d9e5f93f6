#include "apdsim/device.hpp"

#include <cmath>

namespace apdsim {

void DeviceCharacteristic::validate() const {
    if (bias_table.empty())
        throw ConfigError("device '" + name + "': bias table is empty");
    if (breakdown_voltage <= 0.0)
        throw ConfigError("device '" + name + "': breakdown voltage must be positive");
    if (avalanche_gain_slope < 0.0)
        throw ConfigError("device '" + name + "': avalanche gain slope must be >= 0");

    double prev_ob = -1.0, prev_eta = 0.0, prev_pd = 0.0;
    for (const BiasPoint& row : bias_table) {
        if (row.overbias < 0.0)
            throw ConfigError("device '" + name + "': overbias must be >= 0");
        if (row.overbias <= prev_ob)
            throw ConfigError("device '" + name + "': bias table overbias not strictly increasing");
        if (row.efficiency < 0.0 || row.efficiency > 1.0 ||
            row.dark_prob < 0.0 || row.dark_prob > 1.0)
            throw ConfigError("device '" + name + "': efficiency/dark probability outside [0,1]");
        if (row.efficiency < prev_eta || row.dark_prob < prev_pd)
            throw ConfigError("device '" + name + "': efficiency/dark columns must be non-decreasing");
        if (row.overbias == 0.0 && (row.efficiency != 0.0 || row.dark_prob != 0.0))
            throw ConfigError("device '" + name + "': no Geiger operation at zero overbias");
        prev_ob = row.overbias;
        prev_eta = row.efficiency;
        prev_pd = row.dark_prob;
    }

    if (trap.capture_per_avalanche < 0.0 || trap.release_prob_per_carrier < 0.0 ||
        trap.release_prob_per_carrier > 1.0 || trap.detrap_time_constant < 0.0 ||
        trap.bias_capture_slope < 0.0 || trap.dc_sweep_coefficient < 0.0)
        throw ConfigError("device '" + name + "': invalid trap parameters");
}

double overbias(const DeviceCharacteristic& device, double v_dc, double v_gate) {
    if (v_dc < 0.0 || v_gate < 0.0)
        throw std::invalid_argument("overbias: bias voltages must be >= 0");
    return std::max(0.0, v_dc + v_gate - device.breakdown_voltage);
}

namespace {

// Piecewise-linear interpolation of one table column, anchored at (0, 0)
// below the first row and clamped to the last value above the table.
double interpolate_column(const DeviceCharacteristic& device, double ob,
                          double (*column)(const BiasPoint&)) {
    if (device.bias_table.empty())
        throw ConfigError("device '" + device.name + "': bias table is empty");
    if (ob < 0.0)
        throw std::invalid_argument("overbias must be >= 0");
    if (ob == 0.0) return 0.0;

    double x0 = 0.0, y0 = 0.0;
    for (const BiasPoint& row : device.bias_table) {
        if (ob <= row.overbias) {
            const double span = row.overbias - x0;
            if (span <= 0.0) return column(row);
            const double t = (ob - x0) / span;
            return y0 + t * (column(row) - y0);
        }
        x0 = row.overbias;
        y0 = column(row);
    }
    return column(device.bias_table.back());
}

}  // namespace

double efficiency_at(const DeviceCharacteristic& device, double ob) {
    return interpolate_column(device, ob, [](const BiasPoint& r) { return r.efficiency; });
}

double dark_prob_at(const DeviceCharacteristic& device, double ob) {
    return interpolate_column(device, ob, [](const BiasPoint& r) { return r.dark_prob; });
}

TrapState trap_decay(const TrapState& state, const TrapParams& params, double dt) {
    if (dt < 0.0)
        throw std::invalid_argument("trap_decay: dt must be >= 0");
    TrapState next = state;
    next.last_update_time = state.last_update_time + dt;
    if (dt == 0.0 || state.population == 0.0) return next;
    if (params.detrap_time_constant <= 0.0) {
        next.population = 0.0;  // instantaneous detrapping
        return next;
    }
    next.population = state.population * std::exp(-dt / params.detrap_time_constant);
    return next;
}

TrapState trap_capture(const TrapState& state, const TrapParams& params,
                       double ob, double dc_fraction) {
    if (dc_fraction < 0.0 || dc_fraction > 1.0)
        throw std::invalid_argument("trap_capture: dc_fraction must be in [0,1]");
    const double increment = params.capture_per_avalanche *
                             (1.0 + params.bias_capture_slope * ob) *
                             (1.0 - params.dc_sweep_coefficient * dc_fraction);
    TrapState next = state;
    next.population = state.population + std::max(0.0, increment);
    return next;
}

double afterpulse_prob(const TrapState& state, const TrapParams& params) {
    if (state.population <= 0.0) return 0.0;
    return -std::expm1(-params.release_prob_per_carrier * state.population);
}

}  // namespace apdsim
