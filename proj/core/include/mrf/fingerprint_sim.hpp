#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mrf/volume.hpp"

namespace mrf::sim {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Per-pulse acquisition parameters of a pseudo-random MRF train.
struct SequenceSchedule {
    std::vector<double> flip_angles_deg;
    std::vector<double> repetition_times_ms;
    std::vector<double> echo_times_ms;
    bool inversion_at_start = false;

    std::size_t size() const { return flip_angles_deg.size(); }
    // Throws ConfigError if lengths disagree or any pulse is out of physical bounds.
    void validate() const;
    bool operator==(const SequenceSchedule&) const = default;
};

struct ScheduleConfig {
    std::uint64_t seed = 7;
    std::size_t t_raw = 720;
    Interval fa_range_deg{0.0, 70.0};
    Interval tr_range_ms{10.0, 14.0};
    bool inversion_at_start = true;
};

// Smooth flip-angle train built from half-sine lobes (period 200-300 pulses,
// random peak per lobe) with uniformly jittered TR and TE = TR / 2.
SequenceSchedule build_schedule(const ScheduleConfig& cfg);

struct TissueParams {
    double pd = 1.0;
    double t1_ms = 1000.0;
    double t2_ms = 100.0;

    TissueParams() = default;
    // Throws ConfigError unless pd >= 0, t1 > 0, t2 > 0 and t2 <= t1.
    TissueParams(double pd, double t1_ms, double t2_ms);
    bool operator==(const TissueParams&) const = default;
};

struct Fingerprint {
    std::vector<cplx> samples;

    std::size_t size() const { return samples.size(); }
};

// Single-isochromat Bloch recursion: rotation about x by the flip angle,
// read at TE, then T2 decay / T1 recovery over TR. Output scales linearly in pd;
// imaginary parts are zero.
Fingerprint simulate_fingerprint(const TissueParams& params, const SequenceSchedule& schedule);

// Moving average: out[i] = mean(samples[i .. i + window - 1]).
Fingerprint sliding_window(const Fingerprint& fp, std::size_t window);

// Real inner-product space view: [re_0..re_{T-1}, im_0..im_{T-1}].
std::vector<double> split_real_imag(std::span<const cplx> samples);
double euclidean_norm(std::span<const cplx> samples);

} // namespace mrf::sim
