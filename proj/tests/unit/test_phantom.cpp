#include <gtest/gtest.h>

#include <cmath>

#include <mrf/phantom.hpp>

using namespace mrf;
using namespace mrf::phantom;

namespace {

sim::SequenceSchedule short_schedule() { return sim::build_schedule({7, 120, {0.0, 70.0}, {10.0, 14.0}, true}); }

} // namespace

TEST(Phantom, MaskMatchesLabelsAndMapsSupport) {
    const Phantom ph = generate_phantom(3, {64, 64, 2});
    for (std::size_t v = 0; v < ph.labels.data().size(); ++v) {
        const bool brain = ph.labels.data()[v] != kBackground;
        EXPECT_EQ(ph.brain_mask.data()[v] != 0, brain);
        const auto q = ph.maps.values.at(v);
        if (!brain) {
            EXPECT_EQ(q[0], 0.0);
            EXPECT_EQ(q[1], 0.0);
            EXPECT_EQ(q[2], 0.0);
        } else {
            EXPECT_GT(q[0], 0.0);
            EXPECT_GT(q[2], 0.0);
            EXPECT_LE(q[2], q[1]);
        }
    }
}

TEST(Phantom, AllLabelsPresent) {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        const Phantom ph = generate_phantom(seed, {64, 64, 1});
        std::size_t hist[4] = {};
        for (auto l : ph.labels.data()) ++hist[l];
        for (int l = 0; l < 4; ++l) EXPECT_GT(hist[l], 0u) << "seed " << seed << " label " << l;
    }
}

TEST(Phantom, RegressionLabelHistogram) {
    const Phantom ph = generate_phantom(11, {64, 64, 1});
    std::size_t hist[4] = {};
    for (auto l : ph.labels.data()) ++hist[l];
    // Frozen from the construction on first run; guards against silent geometry changes.
    EXPECT_EQ(hist[0] + hist[1] + hist[2] + hist[3], 64u * 64u);
    EXPECT_EQ(hist[0], 1712u);
    EXPECT_EQ(hist[1], 1086u);
    EXPECT_EQ(hist[2], 818u);
    EXPECT_EQ(hist[3], 480u);
}

TEST(Phantom, TissueOrderingSurvivesJitter) {
    const Phantom ph = generate_phantom(9, {64, 64, 1});
    double max_wm = 0.0, min_csf = 1e9, max_gm = 0.0, min_gm = 1e9;
    for (std::size_t v = 0; v < ph.labels.data().size(); ++v) {
        const double t1 = ph.maps.values.at(v)[1];
        switch (ph.labels.data()[v]) {
        case kWhiteMatter: max_wm = std::max(max_wm, t1); break;
        case kGrayMatter:
            max_gm = std::max(max_gm, t1);
            min_gm = std::min(min_gm, t1);
            break;
        case kCsf: min_csf = std::min(min_csf, t1); break;
        default: break;
        }
    }
    EXPECT_LT(max_wm, min_gm);
    EXPECT_LT(max_gm, min_csf);
}

TEST(Phantom, JitterBounds) {
    const TissueTable table;
    const Phantom ph = generate_phantom(4, {48, 48, 1}, table);
    for (std::size_t v = 0; v < ph.labels.data().size(); ++v) {
        const auto l = ph.labels.data()[v];
        if (l == kBackground) continue;
        const TissueSpec& t = table[l];
        const auto q = ph.maps.values.at(v);
        EXPECT_LE(std::abs(q[0] / t.pd - 1.0), t.jitter + 1e-12);
        EXPECT_LE(std::abs(q[1] / t.t1_ms - 1.0), t.jitter + 1e-12);
        EXPECT_LE(std::abs(q[2] / t.t2_ms - 1.0), t.jitter + 1e-12);
    }
}

TEST(Phantom, ZeroJitterGivesTableValues) {
    TissueTable table;
    table.wm.jitter = table.gm.jitter = table.csf.jitter = 0.0;
    const Phantom ph = generate_phantom(4, {40, 40, 1}, table);
    for (std::size_t v = 0; v < ph.labels.data().size(); ++v) {
        const auto l = ph.labels.data()[v];
        if (l == kBackground) continue;
        EXPECT_EQ(ph.maps.values.at(v)[1], table[l].t1_ms);
        EXPECT_EQ(ph.maps.values.at(v)[2], table[l].t2_ms);
    }
}

TEST(Phantom, Deterministic) {
    const Phantom a = generate_phantom(21, {64, 64, 1});
    const Phantom b = generate_phantom(21, {64, 64, 1});
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.maps.values, b.maps.values);
    const Phantom c = generate_phantom(22, {64, 64, 1});
    EXPECT_NE(a.maps.values, c.maps.values);
}

TEST(Phantom, MinimumShape) {
    EXPECT_THROW(generate_phantom(1, {31, 64, 1}), ConfigError);
    EXPECT_THROW(generate_phantom(1, {64, 64, 0}), ConfigError);
    EXPECT_NO_THROW(generate_phantom(1, {32, 32, 1}));
}

TEST(Phantom, InvalidTissueTable) {
    TissueTable table;
    table.wm.t2_ms = 700.0;
    EXPECT_THROW(generate_phantom(1, {32, 32, 1}, table), ConfigError);
}

TEST(Render, FrameCountAfterWindow) {
    const Phantom ph = generate_phantom(1, {32, 32, 1});
    const auto s = sim::build_schedule({7, 720, {0.0, 70.0}, {10.0, 14.0}, true});
    EXPECT_EQ(render_mrf_image(ph, s, 48, std::nullopt).channels(), 673u);
}

TEST(Render, ZeroOutsideMaskAndPurity) {
    const Phantom ph = generate_phantom(2, {40, 40, 1});
    const MrfImage img = render_mrf_image(ph, short_schedule(), 20, 5);
    for (std::size_t v = 0; v < ph.brain_mask.data().size(); ++v) {
        if (ph.brain_mask.data()[v]) continue;
        for (const cplx& c : img.at(v)) EXPECT_EQ(c, cplx(0.0, 0.0));
    }
    EXPECT_EQ(img, render_mrf_image(ph, short_schedule(), 20, 5));
}

TEST(Render, PhaseRotatesSignal) {
    const Phantom ph = generate_phantom(2, {40, 40, 1});
    const MrfImage plain = render_mrf_image(ph, short_schedule(), 20, std::nullopt);
    const MrfImage rotated = render_mrf_image(ph, short_schedule(), 20, 5);
    const Volume<double> phi = phase_field(ph.maps.dims(), 5);
    for (std::size_t v = 0; v < plain.dims().voxels(); ++v) {
        if (!ph.brain_mask.data()[v]) continue;
        const cplx rot = std::polar(1.0, phi.data()[v]);
        for (std::size_t t = 0; t < plain.channels(); ++t) {
            EXPECT_EQ(plain.at(v)[t].imag(), 0.0);
            EXPECT_NEAR(std::abs(rotated.at(v)[t] - plain.at(v)[t] * rot), 0.0, 1e-12);
        }
    }
}

TEST(Render, ZeroPdAndIdenticalVoxels) {
    Phantom ph = generate_phantom(2, {32, 32, 1});
    // Two brain voxels forced to identical parameters, one to zero PD.
    const std::size_t a = ph.maps.values.voxel_index(16, 16, 0), b = ph.maps.values.voxel_index(16, 17, 0),
                      c = ph.maps.values.voxel_index(15, 16, 0);
    ASSERT_TRUE(ph.brain_mask.data()[a] && ph.brain_mask.data()[b] && ph.brain_mask.data()[c]);
    for (std::size_t k = 0; k < 3; ++k) ph.maps.values.at(b)[k] = ph.maps.values.at(a)[k];
    ph.maps.values.at(c)[0] = 0.0;
    const MrfImage img = render_mrf_image(ph, short_schedule(), 10, std::nullopt);
    for (std::size_t t = 0; t < img.channels(); ++t) {
        EXPECT_EQ(img.at(a)[t], img.at(b)[t]);
        EXPECT_EQ(img.at(c)[t], cplx(0.0, 0.0));
    }
}

TEST(Artifacts, ZeroConfigIsIdentity) {
    const Phantom ph = generate_phantom(2, {32, 32, 1});
    const MrfImage img = render_mrf_image(ph, short_schedule(), 10, 3);
    EXPECT_EQ(apply_artifacts(img, {}, 99), img);
}

TEST(Artifacts, GhostFormula) {
    const Phantom ph = generate_phantom(2, {48, 48, 1});
    const MrfImage img = render_mrf_image(ph, short_schedule(), 10, 3);
    ArtifactConfig cfg;
    cfg.alias_ghosts = 1;
    cfg.ghost_amplitude = 0.1;
    cfg.ghost_shift_px = {{8, 0}};
    const MrfImage out = apply_artifacts(img, cfg, 5);
    const Dims d = img.dims();
    // Recover the per-frame sign from one voxel with a nonzero source, then check everywhere.
    std::vector<double> sign(img.channels(), 0.0);
    for (std::size_t t = 0; t < img.channels(); ++t) {
        for (std::size_t x = 0; x < d.x && sign[t] == 0.0; ++x)
            for (std::size_t y = 0; y < d.y && sign[t] == 0.0; ++y) {
                const cplx src = img(static_cast<std::size_t>((x + d.x - 8) % d.x), y, 0, t);
                if (std::abs(src) > 1e-3) sign[t] = std::real((out(x, y, 0, t) - img(x, y, 0, t)) / (0.1 * src)) > 0 ? 1.0 : -1.0;
            }
        ASSERT_NE(sign[t], 0.0);
    }
    for (std::size_t x = 0; x < d.x; ++x)
        for (std::size_t y = 0; y < d.y; ++y)
            for (std::size_t t = 0; t < img.channels(); ++t) {
                const cplx expect = img(x, y, 0, t) + 0.1 * sign[t] * img((x + d.x - 8) % d.x, y, 0, t);
                EXPECT_NEAR(std::abs(out(x, y, 0, t) - expect), 0.0, 1e-12);
            }
}

TEST(Artifacts, GhostCorruptionIsSpatiallyCorrelated) {
    const Phantom ph = generate_phantom(6, {64, 64, 1});
    const MrfImage img = render_mrf_image(ph, short_schedule(), 10, 3);
    ArtifactConfig cfg;
    cfg.alias_ghosts = 1;
    cfg.ghost_amplitude = 0.1;
    cfg.ghost_shift_px = {{8, 0}};
    const MrfImage out = apply_artifacts(img, cfg, 5);
    const Dims d = img.dims();
    // Correlation of |corruption(v)| with |image(v - shift)| over all voxels and frames.
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0, n = 0;
    for (std::size_t x = 0; x < d.x; ++x)
        for (std::size_t y = 0; y < d.y; ++y)
            for (std::size_t t = 0; t < img.channels(); ++t) {
                const double a = std::abs(out(x, y, 0, t) - img(x, y, 0, t));
                const double b = std::abs(img((x + d.x - 8) % d.x, y, 0, t));
                sa += a, sb += b, saa += a * a, sbb += b * b, sab += a * b, n += 1;
            }
    const double corr = (sab / n - sa / n * sb / n) /
                        std::sqrt((saa / n - sa / n * sa / n) * (sbb / n - sb / n * sb / n));
    EXPECT_GT(corr, 0.9);
}

TEST(Artifacts, NoiseVarianceMonteCarlo) {
    // Unit-magnitude image so sigma is absolute: E|n|^2 = 2 sigma^2.
    MrfImage img({64, 64, 1}, 100, cplx(0.6, 0.8));
    ArtifactConfig cfg;
    cfg.noise_sigma = 0.05;
    const MrfImage out = apply_artifacts(img, cfg, 17);
    double acc = 0.0;
    for (std::size_t i = 0; i < img.data().size(); ++i) acc += std::norm(out.data()[i] - img.data()[i]);
    const double mean_sq = acc / static_cast<double>(img.data().size());
    EXPECT_NEAR(mean_sq, 2.0 * 0.05 * 0.05, 0.05 * 2.0 * 0.05 * 0.05);
}

TEST(Artifacts, DeterministicInSeed) {
    const Phantom ph = generate_phantom(2, {32, 32, 1});
    const MrfImage img = render_mrf_image(ph, short_schedule(), 10, 3);
    ArtifactConfig cfg;
    cfg.noise_sigma = 0.03;
    cfg.alias_ghosts = 1;
    cfg.ghost_amplitude = 0.1;
    cfg.ghost_shift_px = {{0, 8}};
    EXPECT_EQ(apply_artifacts(img, cfg, 4), apply_artifacts(img, cfg, 4));
    EXPECT_NE(apply_artifacts(img, cfg, 4), apply_artifacts(img, cfg, 5));
}

TEST(Artifacts, InvalidConfig) {
    MrfImage img({32, 32, 1}, 4, cplx(1.0, 0.0));
    ArtifactConfig cfg;
    cfg.alias_ghosts = 1;
    cfg.ghost_amplitude = 0.1;
    EXPECT_THROW(apply_artifacts(img, cfg, 1), ConfigError); // no shift given
    cfg.ghost_shift_px = {{0, 0}};
    EXPECT_THROW(apply_artifacts(img, cfg, 1), ConfigError);
    cfg.ghost_shift_px = {{1, 0}};
    cfg.ghost_amplitude = 1.0;
    EXPECT_THROW(apply_artifacts(img, cfg, 1), ConfigError);
}

TEST(Artifacts, MeanSignalIgnoresBackground) {
    MrfImage img({32, 32, 1}, 4, cplx(0.0, 0.0));
    for (std::size_t t = 0; t < 4; ++t) img(3, 3, 0, t) = cplx(0.0, 2.0);
    EXPECT_DOUBLE_EQ(mean_signal_magnitude(img), 2.0);
}
