#pragma once

#include <filesystem>
#include <vector>

#include "mrf/fingerprint_sim.hpp"

namespace mrf::sim {

struct DictionaryEntry {
    TissueParams params;    // simulated at pd = 1
    Fingerprint fingerprint; // windowed, unit Euclidean norm over real/imag parts
    double norm_factor = 1.0; // norm before normalization, used to recover PD
};

struct Dictionary {
    std::vector<DictionaryEntry> entries;
    std::vector<double> t1_grid_ms;
    std::vector<double> t2_grid_ms;

    std::size_t size() const { return entries.size(); }
    // Fingerprint length T (0 for an empty dictionary).
    std::size_t length() const { return entries.empty() ? 0 : entries.front().fingerprint.size(); }
};

// Inclusive arithmetic grid start, start + step, ... <= stop (with a small tolerance on stop).
std::vector<double> make_grid(double start, double stop, double step);

// One entry per (t1, t2) with t2 <= t1, in t1-major grid order.
Dictionary build_dictionary(const std::vector<double>& t1_grid_ms, const std::vector<double>& t2_grid_ms,
                            const SequenceSchedule& schedule, std::size_t window);

// MRFD: header "MRFD <n_entries> <T>\n", then per entry t1, t2, norm (f64) and
// 2T f32 values (real parts, then imaginary parts). Grids are rebuilt from the entries.
void write_dictionary(const std::filesystem::path& path, const Dictionary& dict);
Dictionary read_dictionary(const std::filesystem::path& path);

} // namespace mrf::sim
