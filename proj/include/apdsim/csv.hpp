#pragma once

#include "apdsim/estimator.hpp"
#include "apdsim/montecarlo.hpp"
#include "apdsim/signalchain.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace apdsim {

/// Two-column waveform trace: header "time_s,volts", doubles written
/// round-trip exact, so a rerun with the same config is byte-identical.
void write_waveform_csv(const std::filesystem::path& path, const Waveform& w);

/// Parses a waveform CSV back; t0 and dt are recovered from the time
/// column. Traces written from the same grid parse back aligned.
Waveform read_waveform_csv(const std::filesystem::path& path);

/// Count samples: header "mu,clicks,gates".
void write_count_samples_csv(const std::filesystem::path& path,
                             const std::vector<CountSample>& samples);
std::vector<CountSample> read_count_samples_csv(const std::filesystem::path& path);

/// Per-gate outcome stream: header
/// "gate_index,class,photons_sent,det1,det2,dark1,dark2,ap1,ap2,coincident".
void write_outcomes_csv(const std::filesystem::path& path,
                        const std::vector<GateOutcome>& outcomes);

/// Formats a double with enough digits to round-trip exactly.
std::string format_double(double v);

}  // namespace apdsim
