#include "mrf/eval.hpp"

#include <cmath>

namespace mrf::eval {

void TissueThresholds::validate() const {
    const T1Interval* order[] = {&wm, &gm, &csf};
    const char* names[] = {"wm", "gm", "csf"};
    for (int i = 0; i < 3; ++i)
        if (!(order[i]->lo < order[i]->hi))
            throw ConfigError(std::string("eval.") + names[i] + ": interval must satisfy lo < hi");
    for (int i = 0; i < 2; ++i)
        if (order[i]->hi > order[i + 1]->lo)
            throw ConfigError(std::string("eval.") + names[i] + " overlaps eval." + names[i + 1] +
                              " (intervals must be disjoint and ascending)");
}

const char* tissue_name(phantom::Label label) {
    switch (label) {
    case phantom::Label::kWhiteMatter: return "WM";
    case phantom::Label::kGrayMatter: return "GM";
    case phantom::Label::kCsf: return "CSF";
    default: return "BG";
    }
}

LabelVolume segment_tissues(const Volume<double>& t1, const Mask& mask, const TissueThresholds& thr,
                            std::size_t channel) {
    thr.validate();
    if (!t1.same_grid(mask)) throw ArgumentError("segment_tissues: T1 map and mask shapes disagree");
    if (channel >= t1.channels()) throw ArgumentError("segment_tissues: channel out of range");
    if (count_masked(mask) == 0) throw ArgumentError("segment_tissues: empty mask");

    LabelVolume labels(t1.dims(), 1, 0);
    for (std::size_t v = 0; v < labels.data().size(); ++v) {
        if (!mask.data()[v]) continue;
        const double value = t1.at(v)[channel];
        if (thr.wm.contains(value)) labels.data()[v] = static_cast<std::int32_t>(phantom::Label::kWhiteMatter);
        else if (thr.gm.contains(value)) labels.data()[v] = static_cast<std::int32_t>(phantom::Label::kGrayMatter);
        else if (thr.csf.contains(value)) labels.data()[v] = static_cast<std::int32_t>(phantom::Label::kCsf);
    }
    return labels;
}

LabelVolume segment_tissues(const ParametricMaps& maps, const Mask& mask, const TissueThresholds& thr) {
    for (std::size_t c = 0; c < maps.names.size(); ++c)
        if (maps.names[c] == "T1") return segment_tissues(maps.values, mask, thr, c);
    throw ArgumentError("segment_tissues: maps carry no T1 channel");
}

namespace {

void check_pair(std::span<const double> est, std::span<const double> ref) {
    if (est.size() != ref.size()) throw ArgumentError("metrics: estimate and reference lengths differ");
    if (est.empty()) throw ArgumentError("metrics: empty voxel subset");
}

template <typename Pred>
ErrorPair subset_error(const ParametricMaps& est, const ParametricMaps& ref, const LabelVolume& labels,
                       std::size_t channel, Pred pred) {
    if (!est.values.same_shape(ref.values) || !est.values.same_grid(labels))
        throw ArgumentError("metrics: map shapes disagree");
    if (channel >= est.count()) throw ArgumentError("metrics: channel out of range");
    ErrorPair e;
    double abs_sum = 0.0, sq_sum = 0.0;
    for (std::size_t v = 0; v < labels.data().size(); ++v) {
        if (!pred(labels.data()[v])) continue;
        const double d = est.values.at(v)[channel] - ref.values.at(v)[channel];
        abs_sum += std::abs(d);
        sq_sum += d * d;
        ++e.count;
    }
    if (e.count > 0) {
        e.mae = abs_sum / static_cast<double>(e.count);
        e.rmse = std::sqrt(sq_sum / static_cast<double>(e.count));
    }
    return e;
}

} // namespace

double mae(std::span<const double> est, std::span<const double> ref) {
    check_pair(est, ref);
    double s = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) s += std::abs(est[i] - ref[i]);
    return s / static_cast<double>(est.size());
}

double rmse(std::span<const double> est, std::span<const double> ref) {
    check_pair(est, ref);
    double s = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) s += (est[i] - ref[i]) * (est[i] - ref[i]);
    return std::sqrt(s / static_cast<double>(est.size()));
}

ErrorPair tissue_error(const ParametricMaps& est, const ParametricMaps& ref, const LabelVolume& labels,
                       std::int32_t label, std::size_t channel) {
    return subset_error(est, ref, labels, channel, [label](std::int32_t l) { return l == label; });
}

ErrorPair segmented_error(const ParametricMaps& est, const ParametricMaps& ref, const LabelVolume& labels,
                          std::size_t channel) {
    return subset_error(est, ref, labels, channel, [](std::int32_t l) { return l != 0; });
}

ParametricMaps error_map(const ParametricMaps& est, const ParametricMaps& ref, const Mask& mask) {
    if (!est.values.same_shape(ref.values) || !est.values.same_grid(mask))
        throw ArgumentError("error_map: shapes disagree");
    ParametricMaps out = make_maps(est.dims(), est.names);
    const std::size_t m = est.count();
    for (std::size_t v = 0; v < mask.data().size(); ++v) {
        if (!mask.data()[v]) continue;
        for (std::size_t k = 0; k < m; ++k) out.values.at(v)[k] = est.values.at(v)[k] - ref.values.at(v)[k];
    }
    return out;
}

} // namespace mrf::eval
