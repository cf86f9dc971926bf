#include "mrf/phantom.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mrf/parallel.hpp"

namespace mrf::phantom {

namespace {

constexpr double kPi = std::numbers::pi;

struct Geometry {
    double cx, cy;          // center offset, normalized units
    double a, b;            // brain semi-axes
    double boundary_amp[3]; // harmonics 2..4 of the outer contour
    double boundary_phase[3];
    double rim;             // inner edge of the outer CSF rim (normalized radius)
    double ribbon;          // mean inner edge of the GM ribbon
    double gyri_amp;
    int gyri_count;
    double gyri_phase;
    double vent_dx, vent_ax, vent_ay, vent_tilt;
};

Geometry draw_geometry(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
    Geometry g{};
    g.cx = uni(-0.03, 0.03);
    g.cy = uni(-0.03, 0.03);
    g.a = uni(0.78, 0.86);
    g.b = uni(0.86, 0.94);
    for (int k = 0; k < 3; ++k) {
        g.boundary_amp[k] = uni(0.0, 0.03);
        g.boundary_phase[k] = uni(0.0, 2.0 * kPi);
    }
    g.rim = uni(0.91, 0.94);
    g.ribbon = uni(0.70, 0.76);
    g.gyri_amp = uni(0.04, 0.07);
    g.gyri_count = 6 + static_cast<int>(u01(rng) * 4.0);
    g.gyri_phase = uni(0.0, 2.0 * kPi);
    g.vent_dx = uni(0.10, 0.15);
    g.vent_ax = uni(0.07, 0.10);
    g.vent_ay = uni(0.20, 0.28);
    g.vent_tilt = uni(-0.2, 0.2);
    return g;
}

std::int32_t classify(const Geometry& g, double u, double w, double slice_scale) {
    const double du = (u - g.cx) / (g.a * slice_scale);
    const double dw = (w - g.cy) / (g.b * slice_scale);
    const double theta = std::atan2(dw, du);
    double contour = 1.0;
    for (int k = 0; k < 3; ++k) contour += g.boundary_amp[k] * std::cos((k + 2) * theta + g.boundary_phase[k]);
    const double rho = std::hypot(du, dw) / contour;
    if (rho > 1.0) return kBackground;
    if (rho > g.rim) return kCsf;
    const double inner = g.ribbon + g.gyri_amp * std::cos(g.gyri_count * theta + g.gyri_phase);
    if (rho > inner) return kGrayMatter;
    for (int side : {-1, 1}) {
        const double vx = u - g.cx - side * g.vent_dx * slice_scale;
        const double vy = w - g.cy;
        const double ct = std::cos(side * g.vent_tilt);
        const double st = std::sin(side * g.vent_tilt);
        const double rx = (ct * vx + st * vy) / (g.vent_ax * slice_scale);
        const double ry = (-st * vx + ct * vy) / (g.vent_ay * slice_scale);
        if (rx * rx + ry * ry <= 1.0) return kCsf;
    }
    return kWhiteMatter;
}

} // namespace

const TissueSpec& TissueTable::operator[](std::int32_t label) const {
    switch (label) {
    case kWhiteMatter: return wm;
    case kGrayMatter: return gm;
    case kCsf: return csf;
    default: throw ArgumentError("tissue table: no entry for label " + std::to_string(label));
    }
}

void TissueTable::validate() const {
    for (std::int32_t label : {kWhiteMatter, kGrayMatter, kCsf}) {
        const TissueSpec& t = (*this)[label];
        sim::TissueParams(t.pd, t.t1_ms, t.t2_ms);
        if (!(t.jitter >= 0.0 && t.jitter < 1.0))
            throw ConfigError("tissue table: jitter must lie in [0, 1) for label " + std::to_string(label));
        if (t.t2_ms * (1.0 + t.jitter) > t.t1_ms * (1.0 - t.jitter))
            throw ConfigError("tissue table: jitter allows T2 > T1 for label " + std::to_string(label));
    }
}

Phantom generate_phantom(std::uint64_t seed, Dims shape, const TissueTable& table) {
    if (shape.x < 32 || shape.y < 32 || shape.z < 1)
        throw ConfigError("phantom.shape: minimum is 32 x 32 x 1");
    table.validate();

    std::mt19937_64 rng(seed);
    const Geometry geo = draw_geometry(rng);

    Phantom ph;
    ph.maps = make_maps(shape);
    ph.labels = LabelVolume(shape, 1, kBackground);
    ph.brain_mask = make_mask(shape, false);

    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (std::size_t x = 0; x < shape.x; ++x) {
        for (std::size_t y = 0; y < shape.y; ++y) {
            for (std::size_t z = 0; z < shape.z; ++z) {
                const double u = (static_cast<double>(x) + 0.5) / (0.5 * static_cast<double>(shape.x)) - 1.0;
                const double w = (static_cast<double>(y) + 0.5) / (0.5 * static_cast<double>(shape.y)) - 1.0;
                const double slice_scale = 1.0 - 0.03 * static_cast<double>(z);
                const std::int32_t label = classify(geo, u, w, slice_scale);
                ph.labels(x, y, z) = label;
                if (label == kBackground) continue;
                ph.brain_mask(x, y, z) = 1;
                const TissueSpec& t = table[label];
                const double pd = t.pd * (1.0 + t.jitter * unit(rng));
                const double t1 = t.t1_ms * (1.0 + t.jitter * unit(rng));
                const double t2 = std::min(t.t2_ms * (1.0 + t.jitter * unit(rng)), t1);
                ph.maps.values(x, y, z, 0) = pd;
                ph.maps.values(x, y, z, 1) = t1;
                ph.maps.values(x, y, z, 2) = t2;
            }
        }
    }
    return ph;
}

Volume<double> phase_field(Dims shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    struct Wave {
        double amp, fx, fy, phase;
    };
    std::vector<Wave> waves;
    for (int k = 0; k < 3; ++k) {
        const double angle = 2.0 * kPi * u01(rng);
        const double freq = 0.2 + 0.6 * u01(rng); // cycles across the field of view
        waves.push_back({kPi / 3.0 * (0.5 + u01(rng)), freq * std::cos(angle), freq * std::sin(angle),
                         2.0 * kPi * u01(rng)});
    }
    const double offset = 2.0 * kPi * u01(rng);
    Volume<double> phi(shape, 1);
    for (std::size_t x = 0; x < shape.x; ++x)
        for (std::size_t y = 0; y < shape.y; ++y)
            for (std::size_t z = 0; z < shape.z; ++z) {
                const double u = static_cast<double>(x) / static_cast<double>(shape.x);
                const double w = static_cast<double>(y) / static_cast<double>(shape.y);
                double p = offset;
                for (const Wave& wv : waves) p += wv.amp * std::sin(2.0 * kPi * (wv.fx * u + wv.fy * w) + wv.phase);
                phi(x, y, z) = p;
            }
    return phi;
}

MrfImage render_mrf_image(const Phantom& phantom, const sim::SequenceSchedule& schedule, std::size_t window,
                          std::optional<std::uint64_t> phase_seed) {
    schedule.validate();
    if (window < 1 || window > schedule.size()) throw ArgumentError("render: window outside pulse train length");
    const Dims dims = phantom.maps.dims();
    const std::size_t frames = schedule.size() - window + 1;
    MrfImage image(dims, frames, cplx{0.0, 0.0});
    const Volume<double> phi = phase_seed ? phase_field(dims, *phase_seed) : Volume<double>(dims, 1, 0.0);

    parallel_for(dims.voxels(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t v = begin; v < end; ++v) {
            if (!phantom.brain_mask.data()[v]) continue;
            const auto q = phantom.maps.values.at(v);
            sim::Fingerprint fp = sim::simulate_fingerprint(sim::TissueParams(q[0], q[1], q[2]), schedule);
            if (phase_seed) {
                const cplx rot = std::polar(1.0, phi.data()[v]);
                for (cplx& s : fp.samples) s *= rot;
            }
            const sim::Fingerprint windowed = sim::sliding_window(fp, window);
            std::copy(windowed.samples.begin(), windowed.samples.end(), image.at(v).begin());
        }
    });
    return image;
}

void ArtifactConfig::validate() const {
    if (!(noise_sigma >= 0.0)) throw ConfigError("artifacts.noise_sigma: must be >= 0");
    if (!(ghost_amplitude >= 0.0 && ghost_amplitude < 1.0))
        throw ConfigError("artifacts.ghost_amplitude: must lie in [0, 1)");
    if (ghost_shift_px.size() < alias_ghosts)
        throw ConfigError("artifacts.ghost_shift_px: need one shift per ghost");
    for (std::size_t g = 0; g < alias_ghosts; ++g)
        if (ghost_shift_px[g][0] == 0 && ghost_shift_px[g][1] == 0)
            throw ConfigError("artifacts.ghost_shift_px: ghost " + std::to_string(g) + " has zero shift");
}

double mean_signal_magnitude(const MrfImage& image) {
    double total = 0.0;
    std::size_t count = 0;
    const std::size_t n = image.dims().voxels();
    for (std::size_t v = 0; v < n; ++v) {
        const auto fp = image.at(v);
        double s = 0.0;
        bool nonzero = false;
        for (const cplx& c : fp) {
            s += std::abs(c);
            nonzero |= c != cplx{0.0, 0.0};
        }
        if (nonzero) {
            total += s;
            count += fp.size();
        }
    }
    return count ? total / static_cast<double>(count) : 0.0;
}

MrfImage apply_artifacts(const MrfImage& image, const ArtifactConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    const bool ghosts = cfg.alias_ghosts > 0 && cfg.ghost_amplitude > 0.0;
    if (!ghosts && cfg.noise_sigma == 0.0) return image;

    const Dims d = image.dims();
    const std::size_t frames = image.channels();
    std::mt19937_64 rng(seed);
    MrfImage out = image;

    if (ghosts) {
        std::bernoulli_distribution coin(0.5);
        for (std::size_t g = 0; g < cfg.alias_ghosts; ++g) {
            std::vector<double> sign(frames);
            for (double& s : sign) s = coin(rng) ? 1.0 : -1.0;
            const auto mod = [](long a, long n) { return static_cast<std::size_t>(((a % n) + n) % n); };
            const long sx = cfg.ghost_shift_px[g][0];
            const long sy = cfg.ghost_shift_px[g][1];
            for (std::size_t x = 0; x < d.x; ++x)
                for (std::size_t y = 0; y < d.y; ++y)
                    for (std::size_t z = 0; z < d.z; ++z) {
                        const std::size_t src = image.voxel_index(mod(static_cast<long>(x) - sx, static_cast<long>(d.x)),
                                                                  mod(static_cast<long>(y) - sy, static_cast<long>(d.y)), z);
                        const auto in = image.at(src);
                        auto o = out.at(image.voxel_index(x, y, z));
                        for (std::size_t t = 0; t < frames; ++t) o[t] += cfg.ghost_amplitude * sign[t] * in[t];
                    }
        }
    }

    if (cfg.noise_sigma > 0.0) {
        const double sigma = cfg.noise_sigma * mean_signal_magnitude(image);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (cplx& c : out.data()) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            c += sigma * cplx(re, im);
        }
    }
    return out;
}

} // namespace mrf::phantom
