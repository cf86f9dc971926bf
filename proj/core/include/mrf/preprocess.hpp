#pragma once

#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mrf/volume.hpp"

namespace mrf::prep {

// Per-map (lo, hi) range used for [0, 1] scaling, in map units.
struct NormStats {
    std::vector<std::string> names;
    std::vector<std::pair<double, double>> ranges;

    std::size_t size() const { return ranges.size(); }
    void validate() const; // hi > lo for every map
    bool operator==(const NormStats&) const = default;
};

// One line per map: "<name> <lo> <hi>", full double precision.
void write_norm_stats(std::ostream& os, const NormStats& stats);
NormStats read_norm_stats(std::istream& is, std::size_t count);

std::pair<MrfImage, ParametricMaps> apply_brain_mask(const MrfImage& image, const ParametricMaps& maps,
                                                     const Mask& mask);

// Linear-interpolation percentile (rank = pct / 100 * (n - 1)) of unsorted values.
double percentile(std::vector<double> values, double pct);

// Clamps each map's masked values to its [lo_pct, hi_pct] masked percentiles.
ParametricMaps clip_percentiles(const ParametricMaps& maps, const Mask& mask, double lo_pct = 0.1,
                                double hi_pct = 99.9);

inline constexpr double kTemporalEpsilon = 1e-8;

// Zero mean / unit population std per masked voxel over its 2T real+imag scalars.
MrfImage normalize_temporal(const MrfImage& image, const Mask& mask, double epsilon = kTemporalEpsilon);

// Masked min/max per map, pooled over every (maps, mask) pair.
NormStats compute_norm_stats(std::span<const ParametricMaps* const> maps, std::span<const Mask* const> masks);

std::pair<ParametricMaps, NormStats> normalize_maps(const ParametricMaps& maps, const Mask& mask);
// Masked voxels mapped by (q - lo) / (hi - lo); others untouched.
ParametricMaps normalize_maps(const ParametricMaps& maps, const Mask& mask, const NormStats& stats);
ParametricMaps denormalize_maps(const ParametricMaps& maps_norm, const NormStats& stats);

// (size, size, 2T) patch centred on v in the slice of v; out-of-volume
// positions are zero. Channels: T real parts, then T imaginary parts.
std::vector<double> extract_patch(const MrfImage& image, const Voxel& v, std::size_t size = 5);
void extract_patch_into(const MrfImage& image, const Voxel& v, std::size_t size, std::span<double> out);

// One acquired (here: simulated) scan with its reference maps and brain mask.
struct Scan {
    std::string id;
    MrfImage image;
    ParametricMaps maps;
    Mask mask;
};

struct PreprocessConfig {
    double clip_lo_pct = 0.1;
    double clip_hi_pct = 99.9;
    double epsilon = kTemporalEpsilon;
};

// Preprocessed scan ready for sampling: temporally normalized image, maps in [0, 1].
struct PreparedScan {
    MrfImage image;
    ParametricMaps maps;
    Mask mask;
};

struct PatchCenter {
    std::size_t scan = 0;
    Voxel voxel;
    bool operator==(const PatchCenter&) const = default;
};

struct PatchBatch {
    std::size_t count = 0;
    std::size_t patch_size = 0;
    std::size_t channels = 0; // 2T
    std::size_t maps = 0;     // M
    std::vector<double> inputs;  // (N, size, size, 2T)
    std::vector<double> targets; // (N, M)
    std::vector<PatchCenter> centers;
};

// Draws centres uniformly with replacement from the union of masked voxels.
class PatchSampler {
public:
    PatchSampler(std::span<const PreparedScan> scans, std::size_t patch_size = 5);

    PatchBatch sample(std::size_t batch_size, std::mt19937_64& rng) const;
    std::size_t population() const { return pool_.size(); }
    // Batch with explicitly chosen centres, in order.
    PatchBatch gather(std::span<const PatchCenter> centers) const;

private:
    std::span<const PreparedScan> scans_;
    std::size_t patch_size_;
    std::vector<PatchCenter> pool_;
};

// Training-side pipeline: mask, clip each scan's maps, normalize fingerprints,
// then scale maps with statistics pooled over these scans only.
struct PreparedSet {
    std::vector<PreparedScan> scans;
    NormStats stats;
};
PreparedSet prepare_training_set(std::span<const Scan> scans, const PreprocessConfig& cfg);

// Inference-side pipeline: mask and temporally normalize.
MrfImage prepare_input(const MrfImage& image, const Mask& mask, const PreprocessConfig& cfg);

PatchBatch sample_training_batch(std::span<const PreparedScan> scans, std::size_t batch_size,
                                 std::mt19937_64& rng, std::size_t patch_size = 5);

} // namespace mrf::prep
