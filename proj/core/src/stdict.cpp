#include "mrf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "mrf/parallel.hpp"

namespace mrf::baselines {

namespace {

struct Candidate {
    double score;
    std::size_t scan;
    std::size_t voxel;
};

// Higher score first; ties by scan, then voxel index.
bool better(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.scan != b.scan) return a.scan < b.scan;
    return a.voxel < b.voxel;
}

class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) {}
    void offer(const Candidate& c) {
        if (items_.size() == k_ && !better(c, items_.back())) return;
        auto pos = std::upper_bound(items_.begin(), items_.end(), c, better);
        items_.insert(pos, c);
        if (items_.size() > k_) items_.pop_back();
    }
    const std::vector<Candidate>& items() const { return items_; }
    bool empty() const { return items_.empty(); }

private:
    std::size_t k_;
    std::vector<Candidate> items_;
};

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

// Masked fingerprints as real vectors (2T per voxel), zero outside the mask.
struct FlatImage {
    Dims dims;
    std::size_t width = 0;
    std::vector<double> values;
    std::vector<double> sq_norm;

    FlatImage(const MrfImage& image, const Mask& mask) : dims(image.dims()), width(2 * image.channels()) {
        const std::size_t n = dims.voxels();
        const std::size_t t = image.channels();
        values.assign(n * width, 0.0);
        sq_norm.assign(n, 0.0);
        for (std::size_t v = 0; v < n; ++v) {
            if (!mask.data()[v]) continue;
            const auto fp = image.at(v);
            double* dst = values.data() + v * width;
            for (std::size_t k = 0; k < t; ++k) {
                dst[k] = fp[k].real();
                dst[t + k] = fp[k].imag();
            }
            // Same arithmetic as the patch inner product so a self-match scores exactly 1.
            sq_norm[v] = dot(dst, dst, width);
        }
    }
    const double* at(std::size_t v) const { return values.data() + v * width; }
};

std::size_t index_of(const Dims& d, long x, long y, std::size_t z) {
    return (static_cast<std::size_t>(x) * d.y + static_cast<std::size_t>(y)) * d.z + z;
}

bool inside(const Dims& d, long x, long y) {
    return x >= 0 && y >= 0 && x < static_cast<long>(d.x) && y < static_cast<long>(d.y);
}

// Sum of squared norms over the in-bounds part of each voxel's patch.
std::vector<double> patch_sq_norms(const FlatImage& img, long half) {
    const Dims& d = img.dims;
    std::vector<double> out(d.voxels(), 0.0);
    for (std::size_t x = 0; x < d.x; ++x)
        for (std::size_t y = 0; y < d.y; ++y)
            for (std::size_t z = 0; z < d.z; ++z) {
                double s = 0.0;
                for (long dx = -half; dx <= half; ++dx)
                    for (long dy = -half; dy <= half; ++dy) {
                        const long px = static_cast<long>(x) + dx, py = static_cast<long>(y) + dy;
                        if (inside(d, px, py)) s += img.sq_norm[index_of(d, px, py, z)];
                    }
                out[index_of(d, static_cast<long>(x), static_cast<long>(y), z)] = s;
            }
    return out;
}

// Patch inner product between the test patch at v and the training patch at v + (ox, oy).
double patch_dot(const FlatImage& test, const FlatImage& train, long x, long y, std::size_t z, long ox, long oy,
                 long half) {
    const Dims& d = test.dims;
    double s = 0.0;
    for (long dx = -half; dx <= half; ++dx)
        for (long dy = -half; dy <= half; ++dy) {
            const long tx = x + dx, ty = y + dy;
            const long cx = tx + ox, cy = ty + oy;
            if (!inside(d, tx, ty) || !inside(d, cx, cy)) continue;
            const std::size_t ti = index_of(d, tx, ty, z);
            const std::size_t ci = index_of(d, cx, cy, z);
            if (test.sq_norm[ti] == 0.0 || train.sq_norm[ci] == 0.0) continue;
            s += dot(test.at(ti), train.at(ci), test.width);
        }
    return s;
}

struct Pass {
    std::vector<std::vector<Candidate>> top; // per masked test voxel
    std::size_t scored = 0;
    std::size_t fallbacks = 0;
};

Pass score_pass(const FlatImage& test, const std::vector<FlatImage>& train, std::span<const prep::Scan> scans,
                const std::vector<std::size_t>& voxels, long window_half, long patch_half, std::size_t k) {
    const Dims& d = test.dims;
    const std::vector<double> test_norm = patch_sq_norms(test, patch_half);
    std::vector<std::vector<double>> train_norm;
    for (const auto& f : train) train_norm.push_back(patch_sq_norms(f, patch_half));

    Pass pass;
    pass.top.resize(voxels.size());
    std::vector<std::size_t> scored(voxels.size(), 0);
    std::vector<std::uint8_t> fell_back(voxels.size(), 0);

    auto score_of = [&](double dp, double tn, double cn) {
        const double denom = std::sqrt(tn * cn);
        return denom > 0.0 ? std::abs(dp) / denom : 0.0;
    };

    parallel_for(voxels.size(), [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            const std::size_t v = voxels[i];
            const std::size_t vz = v % d.z;
            const long vy = static_cast<long>((v / d.z) % d.y);
            const long vx = static_cast<long>(v / (d.z * d.y));
            TopK top(k);
            for (std::size_t s = 0; s < train.size(); ++s) {
                const Mask& m = scans[s].mask;
                for (long ox = -window_half; ox <= window_half; ++ox)
                    for (long oy = -window_half; oy <= window_half; ++oy) {
                        const long cx = vx + ox, cy = vy + oy;
                        if (!inside(d, cx, cy)) continue;
                        const std::size_t c = index_of(d, cx, cy, vz);
                        if (!m.data()[c]) continue;
                        const double dp = patch_dot(test, train[s], vx, vy, vz, ox, oy, patch_half);
                        top.offer({score_of(dp, test_norm[v], train_norm[s][c]), s, c});
                        ++scored[i];
                    }
            }
            if (top.empty()) {
                // Nothing masked inside the window: search every training voxel instead.
                fell_back[i] = 1;
                for (std::size_t s = 0; s < train.size(); ++s)
                    for (std::size_t c : masked_voxels(scans[s].mask)) {
                        const std::size_t cz = c % d.z;
                        const long cy = static_cast<long>((c / d.z) % d.y);
                        const long cx = static_cast<long>(c / (d.z * d.y));
                        if (cz != vz) continue;
                        const double dp = patch_dot(test, train[s], vx, vy, vz, cx - vx, cy - vy, patch_half);
                        top.offer({score_of(dp, test_norm[v], train_norm[s][c]), s, c});
                        ++scored[i];
                    }
            }
            pass.top[i] = top.items();
        }
    });
    for (std::size_t i = 0; i < voxels.size(); ++i) {
        pass.scored += scored[i];
        pass.fallbacks += fell_back[i];
    }
    return pass;
}

std::vector<double> candidate_average(const std::vector<Candidate>& top, std::span<const prep::Scan> scans,
                                      std::size_t m) {
    std::vector<double> avg(m, 0.0);
    if (top.empty()) return avg;
    for (const Candidate& c : top) {
        const auto q = scans[c.scan].maps.values.at(c.voxel);
        for (std::size_t k = 0; k < m; ++k) avg[k] += q[k];
    }
    for (double& a : avg) a /= static_cast<double>(top.size());
    return avg;
}

} // namespace

void StDictConfig::validate() const {
    if (window % 2 == 0 || patch % 2 == 0) throw ConfigError("stdict: window and patch extents must be odd");
    if (candidates < 1) throw ConfigError("stdict.candidates: must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("stdict.alpha: must lie in [0, 1]");
}

ParametricMaps reconstruct_stdict(const MrfImage& image, std::span<const prep::Scan> training,
                                  const StDictConfig& cfg, const Mask& mask, StDictStats* stats) {
    cfg.validate();
    if (training.empty()) throw ArgumentError("stdict: no training scans");
    if (!image.same_grid(mask)) throw ArgumentError("stdict: image and mask shapes disagree");
    const std::size_t m = training.front().maps.count();
    for (const auto& sc : training) {
        if (!(sc.image.dims() == image.dims()) || sc.image.channels() != image.channels() ||
            !(sc.mask.dims() == image.dims()) || !(sc.maps.dims() == image.dims()))
            throw ArgumentError("stdict: training scan '" + sc.id + "' does not share the test frame");
        if (sc.maps.count() != m) throw ArgumentError("stdict: training scans differ in map count");
    }

    const FlatImage test(image, mask);
    std::vector<FlatImage> train;
    std::size_t pool = 0;
    for (const auto& sc : training) {
        train.emplace_back(sc.image, sc.mask);
        pool += count_masked(sc.mask);
    }
    if (pool == 0) throw DataError("stdict: training scans have no masked voxels");

    const std::vector<std::size_t> voxels = masked_voxels(mask);
    const long window_half = static_cast<long>(cfg.window / 2);
    const Pass init = score_pass(test, train, training, voxels, window_half, 0, cfg.candidates);
    const Pass patch = cfg.iterations > 0
                           ? score_pass(test, train, training, voxels, window_half,
                                        static_cast<long>(cfg.patch / 2), cfg.candidates)
                           : Pass{};

    std::vector<std::string> names = training.front().maps.names;
    ParametricMaps out = make_maps(image.dims(), names);
    for (std::size_t i = 0; i < voxels.size(); ++i) {
        std::vector<double> est = candidate_average(init.top[i], training, m);
        if (cfg.iterations > 0) {
            const std::vector<double> target = candidate_average(patch.top[i], training, m);
            for (std::size_t it = 0; it < cfg.iterations; ++it)
                for (std::size_t k = 0; k < m; ++k) est[k] = cfg.alpha * target[k] + (1.0 - cfg.alpha) * est[k];
        }
        std::copy(est.begin(), est.end(), out.values.at(voxels[i]).begin());
    }

    const std::size_t fallbacks = init.fallbacks + patch.fallbacks;
    if (fallbacks > 0)
        std::clog << "stdict: " << fallbacks << " voxel searches found no in-window candidate; used global search\n";
    if (stats) {
        stats->fallbacks = fallbacks;
        stats->candidate_pool = pool;
        stats->scored_pairs = init.scored + patch.scored;
    }
    return out;
}

} // namespace mrf::baselines
