#pragma once

#include "apdsim/device.hpp"
#include "apdsim/montecarlo.hpp"

#include <random>

namespace apdsim::test {

/// Random valid device table: strictly increasing overbias with
/// non-decreasing efficiency/dark columns.
inline DeviceCharacteristic random_device(std::mt19937_64& gen, int rows = 5) {
    std::uniform_real_distribution<double> step(0.1, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    DeviceCharacteristic dev;
    dev.name = "random";
    dev.temperature_K = 178.0;
    dev.breakdown_voltage = 50.0;
    double ob = 0.0, eta = 0.0, pd = 0.0;
    const double eta_cap = 0.9 / rows, pd_cap = 0.01 / rows;
    for (int i = 0; i < rows; ++i) {
        ob += step(gen);
        eta += unit(gen) * eta_cap;
        pd += unit(gen) * pd_cap;
        dev.bias_table.push_back({ob, eta, pd});
    }
    dev.validate();
    return dev;
}

/// Single-row device with exact (eta, pd) at overbias >= 1 and inert traps.
inline DeviceCharacteristic flat_device(double eta, double pd) {
    DeviceCharacteristic dev;
    dev.name = "flat";
    dev.temperature_K = 178.0;
    dev.breakdown_voltage = 50.0;
    dev.bias_table = {{1.0, eta, pd}};
    dev.validate();
    return dev;
}

/// Two identical flat APDs at their table point, fast mode.
inline RunConfig flat_config(double eta, double pd, double mu, std::uint64_t n_gates,
                             std::uint64_t seed) {
    RunConfig cfg;
    cfg.apd1.device = flat_device(eta, pd);
    cfg.apd1.overbias = 1.0;
    cfg.apd2 = cfg.apd1;
    cfg.mean_photons = mu;
    cfg.n_gates = n_gates;
    cfg.seed = seed;
    return cfg;
}

}  // namespace apdsim::test
