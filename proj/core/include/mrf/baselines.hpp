#pragma once

#include <span>
#include <vector>

#include "mrf/dictionary.hpp"
#include "mrf/preprocess.hpp"
#include "mrf/training.hpp"

namespace mrf::baselines {

struct MatchResult {
    std::size_t entry_index = 0;
    double pd_scale = 0.0; // |<fp, entry>| / entry norm factor
    double score = 0.0;    // |<fp, entry>| / ||fp||, in [0, 1]
};

// Score is the absolute real inner product over concatenated real/imag parts.
// Ties resolve to the lowest entry index.
MatchResult match_fingerprint(const sim::Dictionary& dict, std::span<const cplx> fp);
inline MatchResult match_fingerprint(const sim::Dictionary& dict, const sim::Fingerprint& fp) {
    return match_fingerprint(dict, std::span<const cplx>(fp.samples));
}

// Packed dictionary for repeated matching.
class DictionaryMatcher {
public:
    explicit DictionaryMatcher(const sim::Dictionary& dict);

    MatchResult match(std::span<const cplx> fp) const;
    // Matches many fingerprints at once; result i belongs to fps[i].
    std::vector<MatchResult> match_many(const std::vector<std::span<const cplx>>& fps) const;
    std::size_t length() const { return length_; }

private:
    const sim::Dictionary& dict_;
    std::size_t length_;
    std::vector<double> packed_; // (entries, 2T) row-major
};

// Dictionary matching on a raw (not temporally normalized) image: T1/T2 from
// the matched entry, PD from the match scale. Unmasked voxels are zero.
ParametricMaps reconstruct_dict(const MrfImage& image, const sim::Dictionary& dict, const Mask& mask);

struct StDictConfig {
    std::size_t window = 11;    // in-plane search extent (third extent fixed to 1: slice-wise data)
    std::size_t patch = 3;      // in-plane patch extent
    std::size_t candidates = 5; // top-C averaged
    double alpha = 0.5;         // blend weight of each iteration
    std::size_t iterations = 2;

    void validate() const;
};

struct StDictStats {
    std::size_t fallbacks = 0;        // voxels with no candidate inside the window
    std::size_t candidate_pool = 0;   // masked training voxels across all scans
    std::size_t scored_pairs = 0;     // patch comparisons performed
};

// Spatiotemporal dictionary matching against training scans that share the
// test scan's frame. Initial estimate: top-C average using single
// fingerprints; each iteration blends alpha * (top-C average by patch score)
// with (1 - alpha) * previous estimate.
ParametricMaps reconstruct_stdict(const MrfImage& image, std::span<const prep::Scan> training,
                                  const StDictConfig& cfg, const Mask& mask, StDictStats* stats = nullptr);

// Fingerprint-wise MLP regressor trained exactly like the CNN but on the centre fingerprint only.
inline nn::TrainedMlp train_mlp_baseline(std::span<const prep::Scan> scans, const std::vector<std::size_t>& hidden,
                                         const nn::TrainConfig& cfg, const prep::PreprocessConfig& prep_cfg = {}) {
    return nn::train_mlp(scans, hidden, cfg, prep_cfg);
}

} // namespace mrf::baselines
