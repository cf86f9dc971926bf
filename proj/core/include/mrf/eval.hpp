#pragma once

#include <array>
#include <span>
#include <string>

#include "mrf/phantom.hpp"
#include "mrf/volume.hpp"

namespace mrf::eval {

// Half-open T1 range [lo, hi) in ms.
struct T1Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double t1) const { return t1 >= lo && t1 < hi; }
};

struct TissueThresholds {
    T1Interval wm{400.0, 800.0};
    T1Interval gm{800.0, 1500.0};
    T1Interval csf{1500.0, 5000.0};

    // Throws ConfigError unless every interval is non-empty and wm < gm < csf without overlap.
    void validate() const;
};

inline constexpr std::array<phantom::Label, 3> kTissues{phantom::Label::kWhiteMatter, phantom::Label::kGrayMatter,
                                                         phantom::Label::kCsf};
const char* tissue_name(phantom::Label label);

// Labels masked voxels by the interval holding their T1 (channel `channel`
// of `t1`); voxels outside every interval and outside the mask get 0.
LabelVolume segment_tissues(const Volume<double>& t1, const Mask& mask, const TissueThresholds& thr,
                            std::size_t channel = 0);
LabelVolume segment_tissues(const ParametricMaps& maps, const Mask& mask, const TissueThresholds& thr);

double mae(std::span<const double> est, std::span<const double> ref);
double rmse(std::span<const double> est, std::span<const double> ref);

struct ErrorPair {
    double mae = 0.0;
    double rmse = 0.0;
    std::size_t count = 0; // 0 when the tissue is absent
};

// Metrics of channel `channel` over voxels whose label equals `label`.
ErrorPair tissue_error(const ParametricMaps& est, const ParametricMaps& ref, const LabelVolume& labels,
                       std::int32_t label, std::size_t channel);
// Same, over every voxel with a nonzero label.
ErrorPair segmented_error(const ParametricMaps& est, const ParametricMaps& ref, const LabelVolume& labels,
                          std::size_t channel);

// est - ref inside the mask, zero elsewhere.
ParametricMaps error_map(const ParametricMaps& est, const ParametricMaps& ref, const Mask& mask);

} // namespace mrf::eval
