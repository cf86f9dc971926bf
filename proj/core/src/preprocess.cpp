#include "mrf/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace mrf::prep {

namespace {

void require_same_grid(const Dims& a, const Dims& b, const char* what) {
    if (!(a == b)) throw ArgumentError(std::string(what) + ": volume shapes disagree");
}

} // namespace

void NormStats::validate() const {
    if (names.size() != ranges.size()) throw DataError("norm stats: name/range count mismatch");
    for (std::size_t m = 0; m < ranges.size(); ++m)
        if (!(ranges[m].second > ranges[m].first))
            throw DataError("norm stats: degenerate range for map " + names[m]);
}

void write_norm_stats(std::ostream& os, const NormStats& stats) {
    const auto old = os.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t m = 0; m < stats.size(); ++m)
        os << stats.names[m] << ' ' << stats.ranges[m].first << ' ' << stats.ranges[m].second << '\n';
    os.precision(old);
}

NormStats read_norm_stats(std::istream& is, std::size_t count) {
    NormStats stats;
    for (std::size_t m = 0; m < count; ++m) {
        std::string line;
        if (!std::getline(is, line)) throw IoError("norm stats: expected " + std::to_string(count) + " lines");
        std::istringstream ss(line);
        std::string name;
        double lo = 0.0, hi = 0.0;
        if (!(ss >> name >> lo >> hi)) throw IoError("norm stats: malformed line '" + line + "'");
        stats.names.push_back(name);
        stats.ranges.emplace_back(lo, hi);
    }
    stats.validate();
    return stats;
}

std::pair<MrfImage, ParametricMaps> apply_brain_mask(const MrfImage& image, const ParametricMaps& maps,
                                                     const Mask& mask) {
    require_same_grid(image.dims(), mask.dims(), "apply_brain_mask");
    require_same_grid(maps.dims(), mask.dims(), "apply_brain_mask");
    MrfImage img = image;
    ParametricMaps out = maps;
    for (std::size_t v = 0; v < mask.size(); ++v) {
        if (mask.data()[v]) continue;
        for (cplx& c : img.at(v)) c = {0.0, 0.0};
        for (double& q : out.values.at(v)) q = 0.0;
    }
    return {std::move(img), std::move(out)};
}

double percentile(std::vector<double> values, double pct) {
    if (values.empty()) throw ArgumentError("percentile: no values");
    std::sort(values.begin(), values.end());
    const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
    const auto below = static_cast<std::size_t>(std::floor(rank));
    const std::size_t above = std::min(below + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(below);
    return values[below] + frac * (values[above] - values[below]);
}

ParametricMaps clip_percentiles(const ParametricMaps& maps, const Mask& mask, double lo_pct, double hi_pct) {
    require_same_grid(maps.dims(), mask.dims(), "clip_percentiles");
    const auto voxels = masked_voxels(mask);
    if (voxels.empty()) throw ArgumentError("clip_percentiles: empty mask");
    if (!(0.0 <= lo_pct && lo_pct <= hi_pct && hi_pct <= 100.0))
        throw ArgumentError("clip_percentiles: need 0 <= lo <= hi <= 100");

    ParametricMaps out = maps;
    std::vector<double> values(voxels.size());
    for (std::size_t m = 0; m < maps.count(); ++m) {
        for (std::size_t i = 0; i < voxels.size(); ++i) values[i] = maps.values.at(voxels[i])[m];
        const double lo = percentile(values, lo_pct);
        const double hi = percentile(values, hi_pct);
        for (std::size_t v : voxels) {
            double& q = out.values.at(v)[m];
            q = std::clamp(q, lo, hi);
        }
    }
    return out;
}

MrfImage normalize_temporal(const MrfImage& image, const Mask& mask, double epsilon) {
    require_same_grid(image.dims(), mask.dims(), "normalize_temporal");
    if (image.channels() < 2) throw ArgumentError("normalize_temporal: need T >= 2");
    MrfImage out = image;
    const double n = 2.0 * static_cast<double>(image.channels());
    for (std::size_t v = 0; v < mask.size(); ++v) {
        if (!mask.data()[v]) continue;
        auto fp = out.at(v);
        double sum = 0.0;
        for (const cplx& c : fp) sum += c.real() + c.imag();
        const double mean = sum / n;
        double ss = 0.0;
        for (const cplx& c : fp) {
            const double dr = c.real() - mean;
            const double di = c.imag() - mean;
            ss += dr * dr + di * di;
        }
        const double scale = 1.0 / (std::sqrt(ss / n) + epsilon);
        // A constant voxel with epsilon == 0 has nothing to normalize; leave it centred.
        const double safe = std::isfinite(scale) ? scale : 0.0;
        for (cplx& c : fp) c = {(c.real() - mean) * safe, (c.imag() - mean) * safe};
    }
    return out;
}

NormStats compute_norm_stats(std::span<const ParametricMaps* const> maps, std::span<const Mask* const> masks) {
    if (maps.empty() || maps.size() != masks.size()) throw ArgumentError("compute_norm_stats: need matching maps/masks");
    const std::size_t m_count = maps.front()->count();
    NormStats stats;
    stats.names = maps.front()->names;
    stats.ranges.assign(m_count, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    std::size_t seen = 0;
    for (std::size_t s = 0; s < maps.size(); ++s) {
        require_same_grid(maps[s]->dims(), masks[s]->dims(), "compute_norm_stats");
        if (maps[s]->count() != m_count) throw ArgumentError("compute_norm_stats: map count differs between scans");
        for (std::size_t v : masked_voxels(*masks[s])) {
            ++seen;
            const auto q = maps[s]->values.at(v);
            for (std::size_t m = 0; m < m_count; ++m) {
                stats.ranges[m].first = std::min(stats.ranges[m].first, q[m]);
                stats.ranges[m].second = std::max(stats.ranges[m].second, q[m]);
            }
        }
    }
    if (seen == 0) throw DataError("compute_norm_stats: no masked voxels");
    stats.validate();
    return stats;
}

std::pair<ParametricMaps, NormStats> normalize_maps(const ParametricMaps& maps, const Mask& mask) {
    const ParametricMaps* mp = &maps;
    const Mask* mk = &mask;
    NormStats stats = compute_norm_stats(std::span(&mp, 1), std::span(&mk, 1));
    return {normalize_maps(maps, mask, stats), stats};
}

ParametricMaps normalize_maps(const ParametricMaps& maps, const Mask& mask, const NormStats& stats) {
    require_same_grid(maps.dims(), mask.dims(), "normalize_maps");
    stats.validate();
    if (stats.size() != maps.count()) throw ArgumentError("normalize_maps: stats cover a different map count");
    ParametricMaps out = maps;
    for (std::size_t v : masked_voxels(mask)) {
        auto q = out.values.at(v);
        for (std::size_t m = 0; m < q.size(); ++m) {
            const auto [lo, hi] = stats.ranges[m];
            q[m] = (q[m] - lo) / (hi - lo);
        }
    }
    return out;
}

ParametricMaps denormalize_maps(const ParametricMaps& maps_norm, const NormStats& stats) {
    stats.validate();
    if (stats.size() != maps_norm.count()) throw ArgumentError("denormalize_maps: stats cover a different map count");
    ParametricMaps out = maps_norm;
    out.names = stats.names;
    const std::size_t n = out.dims().voxels();
    for (std::size_t v = 0; v < n; ++v) {
        auto q = out.values.at(v);
        for (std::size_t m = 0; m < q.size(); ++m) {
            const auto [lo, hi] = stats.ranges[m];
            q[m] = q[m] * (hi - lo) + lo;
        }
    }
    return out;
}

void extract_patch_into(const MrfImage& image, const Voxel& v, std::size_t size, std::span<double> out) {
    const Dims d = image.dims();
    if (v.x >= d.x || v.y >= d.y || v.z >= d.z) throw ArgumentError("extract_patch: voxel outside volume");
    if (size % 2 == 0) throw ArgumentError("extract_patch: patch size must be odd");
    const std::size_t t = image.channels();
    if (out.size() != size * size * 2 * t) throw ArgumentError("extract_patch: output buffer has wrong size");
    const long half = static_cast<long>(size / 2);
    std::size_t k = 0;
    for (long dx = -half; dx <= half; ++dx) {
        for (long dy = -half; dy <= half; ++dy) {
            const long x = static_cast<long>(v.x) + dx;
            const long y = static_cast<long>(v.y) + dy;
            double* dst = out.data() + k * 2 * t;
            ++k;
            if (x < 0 || y < 0 || x >= static_cast<long>(d.x) || y >= static_cast<long>(d.y)) {
                std::fill(dst, dst + 2 * t, 0.0);
                continue;
            }
            const auto fp = image.at(image.voxel_index(static_cast<std::size_t>(x), static_cast<std::size_t>(y), v.z));
            for (std::size_t c = 0; c < t; ++c) {
                dst[c] = fp[c].real();
                dst[t + c] = fp[c].imag();
            }
        }
    }
}

std::vector<double> extract_patch(const MrfImage& image, const Voxel& v, std::size_t size) {
    std::vector<double> patch(size * size * 2 * image.channels());
    extract_patch_into(image, v, size, patch);
    return patch;
}

PatchSampler::PatchSampler(std::span<const PreparedScan> scans, std::size_t patch_size)
    : scans_(scans), patch_size_(patch_size) {
    if (scans.empty()) throw ArgumentError("patch sampler: no scans");
    const std::size_t t = scans.front().image.channels();
    const std::size_t m = scans.front().maps.count();
    for (std::size_t s = 0; s < scans.size(); ++s) {
        const auto& sc = scans[s];
        if (sc.image.channels() != t || sc.maps.count() != m)
            throw ArgumentError("patch sampler: scans differ in T or map count");
        require_same_grid(sc.image.dims(), sc.mask.dims(), "patch sampler");
        require_same_grid(sc.maps.dims(), sc.mask.dims(), "patch sampler");
        for (std::size_t v : masked_voxels(sc.mask)) pool_.push_back({s, sc.mask.voxel_at(v)});
    }
    if (pool_.empty()) throw DataError("patch sampler: no masked voxels in the training scans");
}

PatchBatch PatchSampler::gather(std::span<const PatchCenter> centers) const {
    PatchBatch b;
    b.count = centers.size();
    b.patch_size = patch_size_;
    b.channels = 2 * scans_.front().image.channels();
    b.maps = scans_.front().maps.count();
    const std::size_t stride = patch_size_ * patch_size_ * b.channels;
    b.inputs.resize(b.count * stride);
    b.targets.resize(b.count * b.maps);
    b.centers.assign(centers.begin(), centers.end());
    for (std::size_t i = 0; i < b.count; ++i) {
        const auto& c = centers[i];
        const auto& sc = scans_[c.scan];
        extract_patch_into(sc.image, c.voxel, patch_size_, std::span(b.inputs).subspan(i * stride, stride));
        const auto q = sc.maps.values.at(c.voxel);
        std::copy(q.begin(), q.end(), b.targets.begin() + static_cast<long>(i * b.maps));
    }
    return b;
}

PatchBatch PatchSampler::sample(std::size_t batch_size, std::mt19937_64& rng) const {
    if (batch_size == 0) throw ArgumentError("patch sampler: batch size must be positive");
    std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
    std::vector<PatchCenter> centers(batch_size);
    for (auto& c : centers) c = pool_[pick(rng)];
    return gather(centers);
}

PreparedSet prepare_training_set(std::span<const Scan> scans, const PreprocessConfig& cfg) {
    if (scans.empty()) throw ArgumentError("prepare_training_set: no scans");
    PreparedSet set;
    for (const Scan& sc : scans) {
        auto [image, maps] = apply_brain_mask(sc.image, sc.maps, sc.mask);
        PreparedScan p;
        p.image = normalize_temporal(image, sc.mask, cfg.epsilon);
        p.maps = clip_percentiles(maps, sc.mask, cfg.clip_lo_pct, cfg.clip_hi_pct);
        p.mask = sc.mask;
        set.scans.push_back(std::move(p));
    }
    std::vector<const ParametricMaps*> maps;
    std::vector<const Mask*> masks;
    for (const auto& p : set.scans) {
        maps.push_back(&p.maps);
        masks.push_back(&p.mask);
    }
    set.stats = compute_norm_stats(maps, masks);
    for (auto& p : set.scans) p.maps = normalize_maps(p.maps, p.mask, set.stats);
    return set;
}

MrfImage prepare_input(const MrfImage& image, const Mask& mask, const PreprocessConfig& cfg) {
    if (!image.same_grid(mask)) throw ArgumentError("prepare_input: image and mask shapes disagree");
    MrfImage masked = image;
    for (std::size_t v = 0; v < mask.size(); ++v)
        if (!mask.data()[v])
            for (cplx& c : masked.at(v)) c = {0.0, 0.0};
    return normalize_temporal(masked, mask, cfg.epsilon);
}

PatchBatch sample_training_batch(std::span<const PreparedScan> scans, std::size_t batch_size,
                                 std::mt19937_64& rng, std::size_t patch_size) {
    return PatchSampler(scans, patch_size).sample(batch_size, rng);
}

} // namespace mrf::prep
