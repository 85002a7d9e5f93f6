#include "apdsim/estimator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace apdsim {

double click_probability(double eta, double pd, double mu) {
    if (eta < 0.0 || eta > 1.0 || pd < 0.0 || pd > 1.0 || mu < 0.0)
        throw std::invalid_argument("click_probability: arguments out of range");
    return 1.0 - (1.0 - pd) * std::exp(-eta * mu);
}

namespace {

constexpr double kLogitFloor = -60.0;  // probability ~ 1e-26, effectively boundary
constexpr double kLogitCeil = 60.0;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) {
    const double lo = logistic(kLogitFloor), hi = logistic(kLogitCeil);
    p = std::clamp(p, lo, hi);
    return std::log(p / (1.0 - p));
}

struct Model {
    const std::vector<CountSample>& samples;

    double log_likelihood(double eta, double pd) const {
        double ll = 0.0;
        for (const CountSample& s : samples) {
            const double p = click_probability(eta, pd, s.mean_photons);
            const double k = static_cast<double>(s.clicks);
            const double n = static_cast<double>(s.gates);
            if (k > 0.0) {
                if (p <= 0.0) return -std::numeric_limits<double>::infinity();
                ll += k * std::log(p);
            }
            if (n - k > 0.0) {
                if (p >= 1.0) return -std::numeric_limits<double>::infinity();
                ll += (n - k) * std::log1p(-p);
            }
        }
        return ll;
    }

    // Gradient and expected (Fisher) information in (eta, pd).
    void gradient_and_fisher(double eta, double pd, std::array<double, 2>& grad,
                             std::array<double, 3>& info) const {
        grad = {0.0, 0.0};
        info = {0.0, 0.0, 0.0};  // [I_ee, I_ep, I_pp]
        for (const CountSample& s : samples) {
            const double e = std::exp(-eta * s.mean_photons);
            const double p = 1.0 - (1.0 - pd) * e;
            const double q = std::clamp(p, 1e-300, 1.0 - 1e-16);
            const double w = static_cast<double>(s.gates) / (q * (1.0 - q));
            const double dp_deta = (1.0 - pd) * s.mean_photons * e;
            const double dp_dpd = e;
            const double resid = static_cast<double>(s.clicks) -
                                 static_cast<double>(s.gates) * p;
            const double score = resid / (q * (1.0 - q));
            grad[0] += score * dp_deta;
            grad[1] += score * dp_dpd;
            info[0] += w * dp_deta * dp_deta;
            info[1] += w * dp_deta * dp_dpd;
            info[2] += w * dp_dpd * dp_dpd;
        }
    }

    // Observed information (negative Hessian) in (eta, pd).
    std::array<double, 3> observed_information(double eta, double pd) const {
        std::array<double, 3> obs{0.0, 0.0, 0.0};
        for (const CountSample& s : samples) {
            const double mu = s.mean_photons;
            const double e = std::exp(-eta * mu);
            const double p = 1.0 - (1.0 - pd) * e;
            const double q = std::clamp(p, 1e-300, 1.0 - 1e-16);
            const double k = static_cast<double>(s.clicks);
            const double n = static_cast<double>(s.gates);
            const double dll_dp = k / q - (n - k) / (1.0 - q);
            const double d2ll_dp2 = -k / (q * q) - (n - k) / ((1.0 - q) * (1.0 - q));
            const double dp_de = (1.0 - pd) * mu * e;
            const double dp_dp = e;
            // Second derivatives of p(eta, pd).
            const double d2p_ee = -(1.0 - pd) * mu * mu * e;
            const double d2p_ep = -mu * e;
            obs[0] -= d2ll_dp2 * dp_de * dp_de + dll_dp * d2p_ee;
            obs[1] -= d2ll_dp2 * dp_de * dp_dp + dll_dp * d2p_ep;
            obs[2] -= d2ll_dp2 * dp_dp * dp_dp;
        }
        return obs;
    }
};

bool solve_2x2(const std::array<double, 3>& m, const std::array<double, 2>& rhs,
               std::array<double, 2>& x) {
    const double det = m[0] * m[2] - m[1] * m[1];
    if (!(det > 0.0) || !std::isfinite(det)) return false;
    x[0] = (m[2] * rhs[0] - m[1] * rhs[1]) / det;
    x[1] = (m[0] * rhs[1] - m[1] * rhs[0]) / det;
    return true;
}

}  // namespace

namespace {

// One-parameter fit with pd pinned (typically from a dedicated dark run).
FitResult fit_eta_only(const Model& model, double pd) {
    FitResult result;
    result.pd_hat = pd;
    result.pd_se = 0.0;

    const CountSample* hi = &model.samples.front();
    for (const CountSample& s : model.samples)
        if (s.mean_photons > hi->mean_photons) hi = &s;
    const double hi_rate = std::clamp(static_cast<double>(hi->clicks) /
                                          static_cast<double>(hi->gates),
                                      1e-12, 1.0 - 1e-12);
    double x = logit(std::clamp(-std::log1p(-hi_rate) / hi->mean_photons,
                                1e-9, 1.0 - 1e-9));
    double ll = model.log_likelihood(logistic(x), pd);
    bool converged = false;
    for (int iter = 0; iter < 500 && !converged; ++iter) {
        const double eta = logistic(x);
        std::array<double, 2> grad;
        std::array<double, 3> fisher;
        model.gradient_and_fisher(eta, pd, grad, fisher);
        const double je = eta * (1.0 - eta);
        const double g = grad[0] * je;
        const double f = fisher[0] * je * je;
        double step = f > 0.0 ? g / f : g / (1.0 + std::abs(g));
        double damping = 1.0;
        bool improved = false;
        for (int halving = 0; halving < 60; ++halving) {
            const double cx = std::clamp(x + damping * step, kLogitFloor, kLogitCeil);
            const double cll = model.log_likelihood(logistic(cx), pd);
            if (cll >= ll) {
                if (cll - ll < 1e-10) converged = true;
                x = cx;
                ll = cll;
                improved = true;
                break;
            }
            damping *= 0.5;
        }
        if (!improved) converged = true;
    }
    result.eta_hat = logistic(x);
    result.log_likelihood = ll;
    result.converged = converged;
    const auto obs = model.observed_information(result.eta_hat, pd);
    result.eta_se = obs[0] > 0.0 ? 1.0 / std::sqrt(obs[0])
                                 : std::numeric_limits<double>::infinity();
    return result;
}

}  // namespace

FitResult fit_poisson_model(const std::vector<CountSample>& samples,
                            std::optional<double> fixed_pd) {
    if (samples.empty())
        throw std::invalid_argument("fit_poisson_model: no samples");
    std::set<double> mus;
    bool any_positive_mu = false;
    std::uint64_t total_clicks = 0;
    for (const CountSample& s : samples) {
        if (s.mean_photons < 0.0 || s.gates < 1 || s.clicks > s.gates)
            throw std::invalid_argument("fit_poisson_model: invalid sample");
        mus.insert(s.mean_photons);
        any_positive_mu = any_positive_mu || s.mean_photons > 0.0;
        total_clicks += s.clicks;
    }
    if (fixed_pd) {
        if (*fixed_pd < 0.0 || *fixed_pd > 1.0)
            throw std::invalid_argument("fit_poisson_model: fixed pd outside [0,1]");
        if (!any_positive_mu)
            throw std::invalid_argument(
                "fit_poisson_model: need an illuminated sample to fit eta");
        Model model{samples};
        return fit_eta_only(model, *fixed_pd);
    }
    if (samples.size() < 2 || mus.size() < 2 || !any_positive_mu)
        throw std::invalid_argument(
            "fit_poisson_model: need two distinct mean photon numbers, one positive");

    FitResult result;
    if (total_clicks == 0) {
        result.converged = false;  // boundary: no information on eta
        result.log_likelihood = 0.0;
        return result;
    }

    Model model{samples};

    // Start from the lowest-flux sample for pd and the highest-flux one for eta.
    const CountSample* lo = &samples.front();
    const CountSample* hi = &samples.front();
    for (const CountSample& s : samples) {
        if (s.mean_photons < lo->mean_photons) lo = &s;
        if (s.mean_photons > hi->mean_photons) hi = &s;
    }
    double pd0 = std::clamp(static_cast<double>(lo->clicks) /
                                static_cast<double>(lo->gates),
                            1e-12, 0.5);
    const double hi_rate = std::clamp(static_cast<double>(hi->clicks) /
                                          static_cast<double>(hi->gates),
                                      1e-12, 1.0 - 1e-12);
    double eta0 = std::clamp(-std::log1p(-hi_rate) / hi->mean_photons, 1e-9, 1.0 - 1e-9);

    double x_eta = logit(eta0), x_pd = logit(pd0);
    double ll = model.log_likelihood(logistic(x_eta), logistic(x_pd));

    bool converged = false;
    for (int iter = 0; iter < 500 && !converged; ++iter) {
        const double eta = logistic(x_eta), pd = logistic(x_pd);
        std::array<double, 2> grad;
        std::array<double, 3> fisher;
        model.gradient_and_fisher(eta, pd, grad, fisher);

        // Chain rule to the unconstrained logit scale.
        const double je = eta * (1.0 - eta), jp = pd * (1.0 - pd);
        const std::array<double, 2> g{grad[0] * je, grad[1] * jp};
        const std::array<double, 3> f{fisher[0] * je * je, fisher[1] * je * jp,
                                      fisher[2] * jp * jp};
        std::array<double, 2> step;
        if (!solve_2x2(f, g, step)) {
            const double scale = 1.0 / (1.0 + std::abs(g[0]) + std::abs(g[1]));
            step = {g[0] * scale, g[1] * scale};
        }

        double damping = 1.0;
        bool improved = false;
        for (int halving = 0; halving < 60; ++halving) {
            const double cx_eta = std::clamp(x_eta + damping * step[0], kLogitFloor, kLogitCeil);
            const double cx_pd = std::clamp(x_pd + damping * step[1], kLogitFloor, kLogitCeil);
            const double cll = model.log_likelihood(logistic(cx_eta), logistic(cx_pd));
            if (cll >= ll) {
                if (cll - ll < 1e-10) converged = true;
                x_eta = cx_eta;
                x_pd = cx_pd;
                ll = cll;
                improved = true;
                break;
            }
            damping *= 0.5;
        }
        if (!improved) converged = true;  // no uphill move left at this scale
    }

    result.eta_hat = logistic(x_eta);
    result.pd_hat = logistic(x_pd);
    result.log_likelihood = ll;
    result.converged = converged;
    if (result.pd_hat <= logistic(kLogitFloor) * 2.0) result.pd_hat = 0.0;

    const auto obs = model.observed_information(result.eta_hat, result.pd_hat);
    const double det = obs[0] * obs[2] - obs[1] * obs[1];
    if (det > 0.0 && std::isfinite(det)) {
        result.eta_se = std::sqrt(obs[2] / det);
        result.pd_se = std::sqrt(obs[0] / det);
    } else {
        // Degenerate information: no finite error bar to report.
        result.eta_se = std::numeric_limits<double>::infinity();
        result.pd_se = std::numeric_limits<double>::infinity();
    }
    return result;
}

AfterpulseEstimate estimate_afterpulse(const AfterpulseData& data) {
    if (data.click_a == 0)
        throw std::runtime_error("estimate_afterpulse: no gate-A clicks to condition on");
    const double n_a = static_cast<double>(data.click_a);
    const double p_b_a = static_cast<double>(data.click_b_with_a) / n_a;
    double variance = p_b_a * (1.0 - p_b_a) / n_a;

    double baseline;
    if (data.baseline) {
        baseline = *data.baseline;
    } else {
        if (data.no_click_a == 0)
            throw std::runtime_error(
                "estimate_afterpulse: no baseline configured and no gate-A misses");
        const double n_0 = static_cast<double>(data.no_click_a);
        baseline = static_cast<double>(data.click_b_without_a) / n_0;
        variance += baseline * (1.0 - baseline) / n_0;
    }

    AfterpulseEstimate est;
    est.p_after = std::max(0.0, p_b_a - baseline);
    est.stderr_ = std::sqrt(variance);
    return est;
}

ExponentialDecayFit fit_exponential_decay(
    const std::vector<std::pair<double, AfterpulseEstimate>>& points) {
    // Weighted least squares on ln(p): weight (p / se)^2, the delta-method
    // variance of ln(p). Non-positive estimates carry no log information.
    double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
    int used = 0;
    for (const auto& [interval, est] : points) {
        if (est.p_after <= 0.0) continue;
        const double w = est.stderr_ > 0.0
                             ? (est.p_after / est.stderr_) * (est.p_after / est.stderr_)
                             : 1.0;
        const double y = std::log(est.p_after);
        sw += w;
        swx += w * interval;
        swy += w * y;
        swxx += w * interval * interval;
        swxy += w * interval * y;
        ++used;
    }
    ExponentialDecayFit fit;
    if (used < 2) return fit;
    const double det = sw * swxx - swx * swx;
    if (det <= 0.0) return fit;
    const double slope = (sw * swxy - swx * swy) / det;
    const double intercept = (swxx * swy - swx * swxy) / det;
    if (slope >= 0.0) return fit;  // not a decay
    fit.tau = -1.0 / slope;
    fit.amplitude = std::exp(intercept);
    fit.valid = true;
    return fit;
}

}  // namespace apdsim
