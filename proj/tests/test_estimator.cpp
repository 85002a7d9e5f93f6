#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "apdsim/estimator.hpp"
#include "helpers.hpp"

#include <cmath>
#include <random>

using namespace apdsim;

namespace {

// Noise-free synthetic samples from the analytic model.
std::vector<CountSample> synthetic_samples(double eta, double pd,
                                           const std::vector<double>& mus,
                                           std::uint64_t gates) {
    std::vector<CountSample> samples;
    for (double mu : mus) {
        const double p = click_probability(eta, pd, mu);
        samples.push_back(
            {mu, static_cast<std::uint64_t>(std::llround(p * static_cast<double>(gates))),
             gates});
    }
    return samples;
}

// Monte Carlo samples from the gate engine with inert traps.
std::vector<CountSample> simulated_samples(double eta, double pd,
                                           const std::vector<double>& mus,
                                           std::uint64_t gates, std::uint64_t seed) {
    std::vector<CountSample> samples;
    for (double mu : mus) {
        RunConfig cfg = test::flat_config(eta, pd, mu, gates, seed++);
        cfg.splitter_ratio = 1.0;
        cfg.apd2.device = test::flat_device(eta, 0.0);
        const RunResult r = run_experiment(cfg);
        samples.push_back({mu, r.counts.apd1, gates});
    }
    return samples;
}

}  // namespace

TEST_CASE("click probability closed form") {
    CHECK(click_probability(0.11, 3e-4, 0.0) == doctest::Approx(3e-4));
    CHECK(click_probability(0.11, 0.0, 0.2) == doctest::Approx(0.0217598).epsilon(1e-4));
    CHECK(click_probability(1.0, 0.0, 1e6) == doctest::Approx(1.0));
    CHECK_THROWS_AS(click_probability(-0.1, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(click_probability(0.1, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("click probability is monotone in every argument") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> flux(0.0, 5.0);
    for (int trial = 0; trial < 300; ++trial) {
        const double eta = unit(gen), pd = unit(gen), mu = flux(gen);
        const double p = click_probability(eta, pd, mu);
        CHECK(p >= pd - 1e-15);
        CHECK(p <= 1.0);
        CHECK(click_probability(std::min(1.0, eta + 0.05), pd, mu) >= p - 1e-15);
        CHECK(click_probability(eta, std::min(1.0, pd + 0.05), mu) >= p - 1e-15);
        CHECK(click_probability(eta, pd, mu + 0.5) >= p - 1e-15);
    }
}

TEST_CASE("fit recovers the generating parameters from noise-free data") {
    const std::vector<double> mus{0.0, 0.1, 0.5, 1.0, 2.0};
    const auto samples = synthetic_samples(0.11, 7e-7, mus, 100'000'000);
    const FitResult fit = fit_poisson_model(samples);
    REQUIRE(fit.converged);
    CHECK(fit.eta_hat == doctest::Approx(0.11).epsilon(0.01));
    CHECK(fit.pd_hat == doctest::Approx(7e-7).epsilon(0.10));
    CHECK(fit.eta_se > 0.0);
    CHECK(fit.pd_se > 0.0);
}

TEST_CASE("fit recovers the truth from Monte Carlo data within 3 standard errors") {
    const std::vector<double> mus{0.0, 0.5, 2.0};
    const auto samples = simulated_samples(0.11, 1e-5, mus, 1'000'000, 555);
    const FitResult fit = fit_poisson_model(samples);
    REQUIRE(fit.converged);
    CHECK(std::abs(fit.eta_hat - 0.11) < 3.0 * fit.eta_se);
    CHECK(std::abs(fit.pd_hat - 1e-5) < 3.0 * fit.pd_se);
}

TEST_CASE("fit precision improves with sample size") {
    const std::vector<double> mus{0.0, 2.0};
    const FitResult small =
        fit_poisson_model(simulated_samples(0.11, 1e-5, mus, 1'000'000, 9));
    const FitResult large =
        fit_poisson_model(simulated_samples(0.11, 1e-5, mus, 100'000'000, 10));
    REQUIRE(small.converged);
    REQUIRE(large.converged);
    CHECK(large.eta_se < small.eta_se / 3.0);  // roughly sqrt(100) tighter
    CHECK(large.pd_se < small.pd_se);
    CHECK(std::abs(large.eta_hat - 0.11) < std::abs(small.eta_hat - 0.11) + 3.0 * small.eta_se);
}

TEST_CASE("fit edge cases") {
    SUBCASE("all-zero clicks: boundary result, not converged") {
        std::vector<CountSample> samples{{0.0, 0, 1000}, {1.0, 0, 1000}};
        const FitResult fit = fit_poisson_model(samples);
        CHECK_FALSE(fit.converged);
        CHECK(fit.eta_hat == 0.0);
        CHECK(fit.pd_hat == 0.0);
    }

    SUBCASE("zero-dark truth lands on the boundary with a CI containing zero") {
        const std::vector<double> mus{0.0, 1.0, 2.0};
        const auto samples = synthetic_samples(0.11, 0.0, mus, 10'000'000);
        const FitResult fit = fit_poisson_model(samples);
        CHECK(fit.eta_hat == doctest::Approx(0.11).epsilon(0.01));
        CHECK(fit.pd_hat <= 1e-9);
        CHECK(fit.pd_hat - 2.0 * fit.pd_se <= 0.0);
    }

    SUBCASE("identical mean photon numbers are rejected") {
        std::vector<CountSample> samples{{1.0, 10, 1000}, {1.0, 12, 1000}};
        CHECK_THROWS_AS(fit_poisson_model(samples), std::invalid_argument);
    }

    SUBCASE("all-dark grids are rejected") {
        std::vector<CountSample> samples{{0.0, 1, 1000}};
        CHECK_THROWS_AS(fit_poisson_model(samples), std::invalid_argument);
    }

    SUBCASE("malformed samples are rejected") {
        std::vector<CountSample> samples{{0.0, 10, 5}, {1.0, 1, 10}};
        CHECK_THROWS_AS(fit_poisson_model(samples), std::invalid_argument);
    }
}

TEST_CASE("eta-only fit with the dark probability pinned from a dark run") {
    const std::vector<double> mus{0.5, 2.0};
    const auto samples = simulated_samples(0.11, 1e-5, mus, 2'000'000, 808);
    const FitResult fit = fit_poisson_model(samples, 1e-5);
    REQUIRE(fit.converged);
    CHECK(fit.pd_hat == 1e-5);
    CHECK(fit.pd_se == 0.0);
    CHECK(std::abs(fit.eta_hat - 0.11) < 3.0 * fit.eta_se);

    // A single illuminated sample suffices in this mode.
    const FitResult single = fit_poisson_model({samples.back()}, 1e-5);
    CHECK(single.converged);
    CHECK(std::abs(single.eta_hat - 0.11) < 4.0 * single.eta_se);

    CHECK_THROWS_AS(fit_poisson_model({{0.0, 5, 1000}}, 1e-5), std::invalid_argument);
    CHECK_THROWS_AS(fit_poisson_model(samples, 1.5), std::invalid_argument);
}

TEST_CASE("refitting data generated at the fitted point reproduces it") {
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> eta_dist(0.05, 0.3);
    std::uniform_real_distribution<double> pd_dist(1e-6, 1e-4);
    const std::vector<double> mus{0.0, 0.2, 1.0, 3.0};
    for (int trial = 0; trial < 10; ++trial) {
        const auto first = fit_poisson_model(
            simulated_samples(eta_dist(gen), pd_dist(gen), mus, 2'000'000,
                              1000 + static_cast<std::uint64_t>(trial)));
        REQUIRE(first.converged);
        const auto refit = fit_poisson_model(
            synthetic_samples(first.eta_hat, first.pd_hat, mus, 2'000'000));
        REQUIRE(refit.converged);
        CHECK(std::abs(refit.eta_hat - first.eta_hat) <=
              2.0 * std::max(refit.eta_se, 1e-12));
        CHECK(std::abs(refit.pd_hat - first.pd_hat) <=
              2.0 * std::max(refit.pd_se, 1e-12));
    }
}

TEST_CASE("afterpulse estimation") {
    RunConfig cfg;
    cfg.apd1.device = device_preset("EPM239BA-178K");
    cfg.apd1.overbias = 1.5;
    cfg.apd2 = cfg.apd1;
    cfg.seed = 12;

    SUBCASE("no gate-A clicks is an estimation error") {
        AfterpulseData empty;
        empty.n_pairs = 10;
        empty.no_click_a = 10;
        CHECK_THROWS_AS(estimate_afterpulse(empty), std::runtime_error);
    }

    SUBCASE("trap-free run estimates zero within two sigma") {
        RunConfig inert = test::flat_config(0.11, 1e-3, 0.0, 1, 12);
        AfterpulseData data = double_pulse_run(inert, 1e-6, 300'000);
        data.baseline = 1e-3;
        const AfterpulseEstimate est = estimate_afterpulse(data);
        CHECK(est.p_after <= 2.0 * est.stderr_);
    }

    SUBCASE("178 K preset at 1 us with a configured baseline") {
        AfterpulseData data = double_pulse_run(cfg, 1e-6, 2'000'000);
        data.baseline = dark_prob_at(cfg.apd1.device, cfg.apd1.overbias);
        const AfterpulseEstimate est = estimate_afterpulse(data);
        CHECK(std::abs(est.p_after - 1e-4) < 3.0 * est.stderr_);
        CHECK(est.stderr_ < 1e-5);
    }

    SUBCASE("empirical baseline path uses the no-click-A pairs") {
        // A dim gate A leaves plenty of baseline pairs.
        AfterpulseData data = double_pulse_run(cfg, 1e-6, 500'000, 10.0);
        REQUIRE(data.no_click_a > 100'000);
        const AfterpulseEstimate est = estimate_afterpulse(data);
        CHECK(std::abs(est.p_after - 1e-4) < 4.0 * est.stderr_);
    }
}

TEST_CASE("interval sweep recovers the detrap time constant within 20 percent") {
    RunConfig cfg;
    cfg.apd1.device = device_preset("EPM239BA-160K");  // strong afterpulser
    cfg.apd1.overbias = 1.5;
    cfg.apd2 = cfg.apd1;

    const double tau_true = cfg.apd1.device.trap.detrap_time_constant;
    const double baseline = dark_prob_at(cfg.apd1.device, cfg.apd1.overbias);
    std::vector<std::pair<double, AfterpulseEstimate>> curve;
    std::uint64_t seed = 40;
    for (double interval : {0.5e-6, 1e-6, 2e-6, 4e-6}) {
        RunConfig point = cfg;
        point.seed = seed++;
        AfterpulseData data = double_pulse_run(point, interval, 1'500'000, 20.0);
        data.baseline = baseline;
        curve.emplace_back(interval, estimate_afterpulse(data));
    }
    const ExponentialDecayFit fit = fit_exponential_decay(curve);
    REQUIRE(fit.valid);
    CHECK(fit.tau == doctest::Approx(tau_true).epsilon(0.20));
}
