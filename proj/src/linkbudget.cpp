#include "apdsim/linkbudget.hpp"

#include "apdsim/device.hpp"

#include <cmath>
#include <stdexcept>

namespace apdsim {

void LinkParams::validate() const {
    if (attenuation_db_per_km <= 0.0)
        throw ConfigError("link: attenuation must be positive");
    if (eta <= 0.0 || eta > 1.0)
        throw ConfigError("link: efficiency must be in (0,1]");
    if (pd < 0.0 || pd > 1.0)
        throw ConfigError("link: dark probability must be in [0,1]");
    if (criterion == RangeCriterion::DarkSignalRatio &&
        (criterion_value <= 0.0 || criterion_value >= 1.0))
        throw ConfigError("link: ratio criterion must be in (0,1)");
    if (criterion == RangeCriterion::MaxQber &&
        (criterion_value <= 0.0 || criterion_value >= 0.5))
        throw ConfigError("link: QBER criterion must be in (0,0.5)");
    if (source == SourceModel::WeakCoherent && source_mu <= 0.0)
        throw ConfigError("link: weak coherent source needs mu > 0");
}

double transmittance(double alpha_db_per_km, double length_km) {
    if (length_km < 0.0)
        throw std::invalid_argument("transmittance: length must be >= 0");
    return std::pow(10.0, -alpha_db_per_km * length_km / 10.0);
}

namespace {

double signal_rate(const LinkParams& p, double length_km) {
    const double t = transmittance(p.attenuation_db_per_km, length_km);
    const double mu = p.source == SourceModel::WeakCoherent ? p.source_mu : 1.0;
    return p.eta * mu * t;
}

}  // namespace

double dark_signal_ratio(const LinkParams& p, double length_km) {
    p.validate();
    return p.pd / signal_rate(p, length_km);
}

double qber(const LinkParams& p, double length_km) {
    p.validate();
    if (p.pd == 0.0) return 0.0;
    return (p.pd / 2.0) / (signal_rate(p, length_km) + p.pd);
}

RangeResult max_range(const LinkParams& p) {
    p.validate();
    if (p.pd == 0.0) return {RangeResult::Status::Unbounded, 0.0};

    if (p.criterion == RangeCriterion::DarkSignalRatio) {
        // ratio(L) = r  =>  L = (10 / alpha) log10(r eta mu / pd)
        const double mu = p.source == SourceModel::WeakCoherent ? p.source_mu : 1.0;
        const double length =
            (10.0 / p.attenuation_db_per_km) *
            std::log10(p.criterion_value * p.eta * mu / p.pd);
        if (length < 0.0) return {RangeResult::Status::UnsatisfiableAtZero, 0.0};
        return {RangeResult::Status::Bounded, length};
    }

    // QBER criterion: qber is strictly increasing in L toward 1/2, so the
    // boundary is a simple bisection target.
    if (qber(p, 0.0) > p.criterion_value)
        return {RangeResult::Status::UnsatisfiableAtZero, 0.0};
    double lo = 0.0, hi = 1.0;
    while (qber(p, hi) <= p.criterion_value) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e7) return {RangeResult::Status::Unbounded, 0.0};
    }
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        (qber(p, mid) <= p.criterion_value ? lo : hi) = mid;
    }
    return {RangeResult::Status::Bounded, lo};
}

const char* to_string(RangeResult::Status s) {
    switch (s) {
        case RangeResult::Status::Bounded: return "bounded";
        case RangeResult::Status::Unbounded: return "unbounded";
        case RangeResult::Status::UnsatisfiableAtZero: return "unsatisfiable_at_zero";
    }
    return "bounded";
}

}  // namespace apdsim
