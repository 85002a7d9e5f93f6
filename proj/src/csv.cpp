#include "apdsim/csv.hpp"

#include "apdsim/device.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace apdsim {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);  // binary: byte-stable line endings
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    return in;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

void write_waveform_csv(const std::filesystem::path& path, const Waveform& w) {
    std::ofstream out = open_out(path);
    out << "time_s,volts\n";
    for (std::size_t i = 0; i < w.samples.size(); ++i)
        out << format_double(w.time_at(i)) << ',' << format_double(w.samples[i]) << '\n';
}

Waveform read_waveform_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("time_s,", 0) != 0)
        throw std::runtime_error("waveform CSV missing header: " + path.string());
    std::vector<double> times, volts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 2)
            throw std::runtime_error("malformed waveform row in " + path.string());
        times.push_back(std::stod(fields[0]));
        volts.push_back(std::stod(fields[1]));
    }
    if (times.size() < 2)
        throw std::runtime_error("waveform CSV needs at least two rows: " + path.string());
    Waveform w;
    w.t0 = times.front();
    w.dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    w.samples = std::move(volts);
    return w;
}

void write_count_samples_csv(const std::filesystem::path& path,
                             const std::vector<CountSample>& samples) {
    std::ofstream out = open_out(path);
    out << "mu,clicks,gates\n";
    for (const CountSample& s : samples)
        out << format_double(s.mean_photons) << ',' << s.clicks << ',' << s.gates << '\n';
}

std::vector<CountSample> read_count_samples_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("mu,", 0) != 0)
        throw std::runtime_error("count CSV missing header: " + path.string());
    std::vector<CountSample> samples;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 3)
            throw std::runtime_error("malformed count row in " + path.string());
        CountSample s;
        s.mean_photons = std::stod(fields[0]);
        s.clicks = std::stoull(fields[1]);
        s.gates = std::stoull(fields[2]);
        samples.push_back(s);
    }
    return samples;
}

void write_outcomes_csv(const std::filesystem::path& path,
                        const std::vector<GateOutcome>& outcomes) {
    std::ofstream out = open_out(path);
    out << "gate_index,class,photons_sent,det1,det2,dark1,dark2,ap1,ap2,coincident\n";
    for (const GateOutcome& o : outcomes) {
        out << o.gate_index << ',' << to_string(o.classification.detection) << ','
            << o.truth.photons_sent << ',' << o.truth.photons_detected_1 << ','
            << o.truth.photons_detected_2 << ',' << (o.truth.dark_1 ? 1 : 0) << ','
            << (o.truth.dark_2 ? 1 : 0) << ',' << (o.truth.afterpulse_1 ? 1 : 0) << ','
            << (o.truth.afterpulse_2 ? 1 : 0) << ',' << (o.coincident ? 1 : 0) << '\n';
    }
}

}  // namespace apdsim
