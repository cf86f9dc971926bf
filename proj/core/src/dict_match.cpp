#include "mrf/baselines.hpp"

#include <Eigen/Core>
#include <cmath>

#include "mrf/parallel.hpp"

namespace mrf::baselines {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr std::size_t kMatchBlock = 64;

void check_query(std::span<const cplx> fp, std::size_t length) {
    if (fp.size() != length)
        throw ArgumentError("dictionary match: fingerprint length " + std::to_string(fp.size()) +
                            " != dictionary length " + std::to_string(length));
}

MatchResult pick_best(const double* scores, std::size_t n, std::size_t stride, double fp_norm,
                      const sim::Dictionary& dict) {
    std::size_t best = 0;
    double best_abs = -1.0;
    for (std::size_t e = 0; e < n; ++e) {
        const double a = std::abs(scores[e * stride]);
        if (a > best_abs) {
            best_abs = a;
            best = e;
        }
    }
    return {best, best_abs / dict.entries[best].norm_factor, best_abs / fp_norm};
}

} // namespace

MatchResult match_fingerprint(const sim::Dictionary& dict, std::span<const cplx> fp) {
    return DictionaryMatcher(dict).match(fp);
}

DictionaryMatcher::DictionaryMatcher(const sim::Dictionary& dict) : dict_(dict), length_(dict.length()) {
    if (dict.size() == 0) throw ArgumentError("dictionary match: empty dictionary");
    packed_.resize(dict.size() * 2 * length_);
    for (std::size_t e = 0; e < dict.size(); ++e) {
        const auto v = sim::split_real_imag(dict.entries[e].fingerprint.samples);
        std::copy(v.begin(), v.end(), packed_.begin() + static_cast<long>(e * 2 * length_));
    }
}

MatchResult DictionaryMatcher::match(std::span<const cplx> fp) const {
    return match_many({fp}).front();
}

std::vector<MatchResult> DictionaryMatcher::match_many(const std::vector<std::span<const cplx>>& fps) const {
    const std::size_t n_entries = dict_.size();
    const std::size_t width = 2 * length_;
    Eigen::Map<const RowMat> d(packed_.data(), static_cast<long>(n_entries), static_cast<long>(width));
    std::vector<MatchResult> out(fps.size());
    const std::size_t blocks = (fps.size() + kMatchBlock - 1) / kMatchBlock;

    parallel_for(blocks, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
            const std::size_t start = b * kMatchBlock;
            const std::size_t count = std::min(kMatchBlock, fps.size() - start);
            RowMat q(static_cast<long>(width), static_cast<long>(count));
            std::vector<double> norms(count);
            for (std::size_t j = 0; j < count; ++j) {
                const auto fp = fps[start + j];
                check_query(fp, length_);
                norms[j] = sim::euclidean_norm(fp);
                if (!(norms[j] > 0.0)) throw DataError("dictionary match: all-zero fingerprint");
                for (std::size_t t = 0; t < length_; ++t) {
                    q(static_cast<long>(t), static_cast<long>(j)) = fp[t].real();
                    q(static_cast<long>(length_ + t), static_cast<long>(j)) = fp[t].imag();
                }
            }
            const RowMat scores = d * q; // (entries, count)
            for (std::size_t j = 0; j < count; ++j)
                out[start + j] = pick_best(scores.data() + j, n_entries, count, norms[j], dict_);
        }
    });
    return out;
}

ParametricMaps reconstruct_dict(const MrfImage& image, const sim::Dictionary& dict, const Mask& mask) {
    if (!image.same_grid(mask)) throw ArgumentError("reconstruct_dict: image and mask shapes disagree");
    if (image.channels() != dict.length())
        throw ArgumentError("reconstruct_dict: image T=" + std::to_string(image.channels()) +
                            " but dictionary T=" + std::to_string(dict.length()));
    ParametricMaps maps = make_maps(image.dims());
    const auto voxels = masked_voxels(mask);
    if (voxels.empty()) return maps;

    const DictionaryMatcher matcher(dict);
    std::vector<std::span<const cplx>> fps;
    std::vector<std::size_t> matched;
    fps.reserve(voxels.size());
    for (std::size_t v : voxels) {
        // Signal-free voxels have nothing to match and keep zero maps.
        if (sim::euclidean_norm(image.at(v)) == 0.0) continue;
        fps.push_back(image.at(v));
        matched.push_back(v);
    }
    const auto& voxels_out = matched;
    const auto results = matcher.match_many(fps);
    for (std::size_t i = 0; i < voxels_out.size(); ++i) {
        const auto& e = dict.entries[results[i].entry_index];
        auto q = maps.values.at(voxels_out[i]);
        q[0] = results[i].pd_scale;
        q[1] = e.params.t1_ms;
        q[2] = e.params.t2_ms;
    }
    return maps;
}

} // namespace mrf::baselines
