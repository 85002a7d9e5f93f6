#pragma once

#include <string>

namespace apdsim {

enum class SourceModel { IdealSinglePhoton, WeakCoherent };

enum class RangeCriterion { DarkSignalRatio, MaxQber };

/// Fiber link and detector figures of merit for the transmission-range
/// arithmetic. The default criterion (dark-to-signal ratio 0.1 at
/// 0.2 dB/km) reproduces the canonical anchors: 100 km at pd/eta = 1e-3
/// and 211 km at 6e-6.
struct LinkParams {
    double attenuation_db_per_km = 0.2;
    SourceModel source = SourceModel::IdealSinglePhoton;
    double source_mu = 0.1;  // photons per pulse for the weak coherent source
    RangeCriterion criterion = RangeCriterion::DarkSignalRatio;
    double criterion_value = 0.1;  // max ratio, or max QBER fraction
    double eta = 0.1;              // detection efficiency
    double pd = 0.0;               // dark count probability per gate

    void validate() const;
};

struct RangeResult {
    enum class Status { Bounded, Unbounded, UnsatisfiableAtZero };
    Status status = Status::Bounded;
    double km = 0.0;
};

/// Fiber transmittance 10^(-alpha L / 10).
double transmittance(double alpha_db_per_km, double length_km);

/// Dark-count-to-signal ratio at distance L: pd / (eta * T(L)) for the
/// ideal source, pd / (eta * mu * T(L)) for the weak coherent one.
double dark_signal_ratio(const LinkParams& p, double length_km);

/// Dark-count-induced error fraction (pd/2) / (signal + pd); dark counts
/// land in a random basis, so half of them produce errors.
double qber(const LinkParams& p, double length_km);

/// Largest distance satisfying the configured criterion: closed form for
/// the ratio criterion, bisection (1e-6 km) for the QBER criterion.
/// pd = 0 gives Unbounded; a criterion already violated at L = 0 gives
/// UnsatisfiableAtZero with km = 0.
RangeResult max_range(const LinkParams& p);

const char* to_string(RangeResult::Status s);

}  // namespace apdsim
