#pragma once

#include "apdsim/montecarlo.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace apdsim {

/// One photon-counting measurement: `clicks` detector clicks observed in
/// `gates` gates at mean photon number `mean_photons` per gate.
struct CountSample {
    double mean_photons = 0.0;
    std::uint64_t clicks = 0;
    std::uint64_t gates = 0;
};

/// Joint maximum-likelihood estimates of detection efficiency and dark
/// count probability, with standard errors from the observed information.
struct FitResult {
    double eta_hat = 0.0;
    double pd_hat = 0.0;
    double eta_se = 0.0;
    double pd_se = 0.0;
    double log_likelihood = 0.0;
    bool converged = false;
};

struct AfterpulseEstimate {
    double p_after = 0.0;
    double stderr_ = 0.0;
};

struct ExponentialDecayFit {
    double amplitude = 0.0;  // extrapolated probability at zero interval
    double tau = 0.0;        // seconds
    bool valid = false;
};

/// Click probability per gate for Poisson-distributed incident photons:
/// 1 - (1 - pd) * exp(-eta * mu). The module's defining equation.
double click_probability(double eta, double pd, double mu);

/// Fits (eta, pd) by maximizing the binomial likelihood of the samples
/// under click_probability. Requires at least two distinct mean photon
/// numbers, one of them positive. All-zero click data yields a boundary
/// result with converged = false. When fixed_pd is given (e.g. pinned from
/// a dedicated dark run) only eta is free and a single illuminated sample
/// suffices.
FitResult fit_poisson_model(const std::vector<CountSample>& samples,
                            std::optional<double> fixed_pd = std::nullopt);

/// Background-subtracted conditional afterpulse probability from a
/// double-pulse run: P(click B | click A) minus the configured baseline
/// (or, when none is configured, the empirical P(click B | no click A)),
/// clamped at zero, with the binomial error propagated.
AfterpulseEstimate estimate_afterpulse(const AfterpulseData& data);

/// Weighted log-linear fit of afterpulse probability versus pulse
/// interval; recovers the detrap time constant from an interval sweep.
ExponentialDecayFit fit_exponential_decay(
    const std::vector<std::pair<double, AfterpulseEstimate>>& points);

}  // namespace apdsim
