#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <mrf/fingerprint_sim.hpp>

#include "oracles.hpp"

using namespace mrf;
using namespace mrf::sim;

namespace {

SequenceSchedule constant_schedule(std::size_t n, double fa, double tr, double te, bool inversion) {
    SequenceSchedule s;
    s.flip_angles_deg.assign(n, fa);
    s.repetition_times_ms.assign(n, tr);
    s.echo_times_ms.assign(n, te);
    s.inversion_at_start = inversion;
    return s;
}

void expect_matches_oracle(const TissueParams& p, const SequenceSchedule& s, double tol) {
    const Fingerprint fp = simulate_fingerprint(p, s);
    const auto ref = oracle::bloch(p.pd, p.t1_ms, p.t2_ms, s.flip_angles_deg, s.repetition_times_ms,
                                   s.echo_times_ms, s.inversion_at_start);
    ASSERT_EQ(fp.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        EXPECT_NEAR(fp.samples[i].real(), ref[i].real(), tol) << "sample " << i;
        EXPECT_EQ(fp.samples[i].imag(), 0.0);
    }
}

} // namespace

TEST(Schedule, DefaultLengthAndFlipRange) {
    const SequenceSchedule s = build_schedule({7, 720, {0.0, 70.0}, {10.0, 14.0}, true});
    ASSERT_EQ(s.size(), 720u);
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_GE(s.flip_angles_deg[i], 0.0);
        EXPECT_LE(s.flip_angles_deg[i], 70.0);
        EXPECT_GE(s.repetition_times_ms[i], 10.0);
        EXPECT_LE(s.repetition_times_ms[i], 14.0);
        EXPECT_DOUBLE_EQ(s.echo_times_ms[i], s.repetition_times_ms[i] / 2.0);
    }
    EXPECT_NO_THROW(s.validate());
}

TEST(Schedule, SameSeedSameSchedule) {
    const ScheduleConfig cfg{7, 720, {0.0, 70.0}, {10.0, 14.0}, true};
    EXPECT_EQ(build_schedule(cfg), build_schedule(cfg));
    ScheduleConfig other = cfg;
    other.seed = 8;
    EXPECT_NE(build_schedule(cfg).flip_angles_deg, build_schedule(other).flip_angles_deg);
}

TEST(Schedule, DegenerateIntervalsGiveConstantTrain) {
    const SequenceSchedule s = build_schedule({7, 300, {30.0, 30.0}, {12.0, 12.0}, false});
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(s.flip_angles_deg[i], 30.0);
        EXPECT_EQ(s.repetition_times_ms[i], 12.0);
    }
}

TEST(Schedule, FlipTrainIsSmooth) {
    const SequenceSchedule s = build_schedule({3, 720, {0.0, 70.0}, {10.0, 14.0}, true});
    // A half-sine lobe of period >= 200 changes by at most peak * pi / 200 per pulse,
    // except where a new lobe starts from zero.
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LE(std::abs(s.flip_angles_deg[i] - s.flip_angles_deg[i - 1]), 1.2);
}

TEST(Schedule, InvalidRangesRejected) {
    EXPECT_THROW(build_schedule({7, 10, {50.0, 40.0}, {10.0, 14.0}, true}), ConfigError);
    EXPECT_THROW(build_schedule({7, 10, {0.0, 190.0}, {10.0, 14.0}, true}), ConfigError);
    EXPECT_THROW(build_schedule({7, 10, {0.0, 70.0}, {0.0, 14.0}, true}), ConfigError);
    EXPECT_THROW(build_schedule({7, 0, {0.0, 70.0}, {10.0, 14.0}, true}), ConfigError);
}

TEST(Schedule, ValidateChecksInvariants) {
    SequenceSchedule s = constant_schedule(3, 30.0, 10.0, 5.0, false);
    s.echo_times_ms[1] = 10.0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = constant_schedule(3, 30.0, 10.0, 5.0, false);
    s.flip_angles_deg.pop_back();
    EXPECT_THROW(s.validate(), ConfigError);
    s = constant_schedule(3, 181.0, 10.0, 5.0, false);
    EXPECT_THROW(s.validate(), ConfigError);
}

TEST(TissueParams, PhysicalConstraints) {
    EXPECT_NO_THROW(TissueParams(1.0, 100.0, 100.0));
    EXPECT_THROW(TissueParams(1.0, 80.0, 100.0), ConfigError);
    EXPECT_THROW(TissueParams(-0.1, 800.0, 80.0), ConfigError);
    EXPECT_THROW(TissueParams(1.0, 0.0, 0.0), ConfigError);
}

TEST(Simulate, ZeroPdGivesZeroFingerprint) {
    const auto s = build_schedule({7, 200, {0.0, 70.0}, {10.0, 14.0}, true});
    for (const cplx& v : simulate_fingerprint({0.0, 800.0, 80.0}, s).samples) EXPECT_EQ(v, cplx(0.0, 0.0));
}

TEST(Simulate, LinearInPd) {
    const auto s = build_schedule({7, 720, {0.0, 70.0}, {10.0, 14.0}, true});
    const auto a = simulate_fingerprint({1.0, 1000.0, 100.0}, s);
    const auto b = simulate_fingerprint({2.0, 1000.0, 100.0}, s);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b.samples[i].real(), 2.0 * a.samples[i].real(), 1e-12 * std::abs(b.samples[i]) + 1e-300);
}

TEST(Simulate, FullRecoverySteadyState) {
    // FA 90, TE 0: the first pulse reads the full equilibrium magnetization and every later pulse
    // reads the longitudinal recovery 1 - exp(-TR / T1) left after the previous saturation.
    const auto s = constant_schedule(50, 90.0, 5000.0, 0.0, false);
    const auto fp = simulate_fingerprint({0.9, 800.0, 80.0}, s);
    EXPECT_NEAR(fp.samples[0].real(), 0.9, 1e-12);
    const double recovery = 1.0 - std::exp(-5000.0 / 800.0);
    for (std::size_t i = 1; i < fp.size(); ++i) {
        EXPECT_NEAR(fp.samples[i].real(), 0.9 * recovery, 1e-12);
        EXPECT_NEAR(std::abs(fp.samples[i]), 0.9, 0.9 * 2e-3);
    }
}

TEST(Simulate, MatchesStraightLineOracleOnDefaultSchedule) {
    const auto s = build_schedule({7, 720, {0.0, 70.0}, {10.0, 14.0}, true});
    expect_matches_oracle({1.0, 1000.0, 100.0}, s, 1e-10);
}

TEST(Simulate, MatchesOracleOnRandomDraws) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> pd(0.0, 2.0), t1(50.0, 4000.0), frac(0.01, 1.0), fa(0.0, 180.0),
        tr(3.0, 20.0);
    std::bernoulli_distribution coin(0.5);
    for (int draw = 0; draw < 100; ++draw) {
        const double t1v = t1(rng);
        const TissueParams p(pd(rng), t1v, t1v * frac(rng));
        ScheduleConfig cfg;
        cfg.seed = rng();
        cfg.t_raw = 50 + rng() % 200;
        const double a = fa(rng), b = fa(rng);
        cfg.fa_range_deg = {std::min(a, b), std::max(a, b)};
        const double c = tr(rng), d = tr(rng);
        cfg.tr_range_ms = {std::min(c, d), std::max(c, d)};
        cfg.inversion_at_start = coin(rng);
        expect_matches_oracle(p, build_schedule(cfg), 1e-10);
    }
}

TEST(Simulate, TerminalMagnitudeNonDecreasingInT2) {
    const auto s = constant_schedule(400, 30.0, 12.0, 6.0, false);
    double previous = -1.0;
    for (int k = 1; k <= 10; ++k) {
        const double t2 = 20.0 * k;
        const double mag = std::abs(simulate_fingerprint({1.0, 1000.0, t2}, s).samples.back());
        EXPECT_GE(mag, previous) << "T2 = " << t2;
        previous = mag;
    }
}

TEST(SlidingWindow, LengthFor720And48) {
    Fingerprint fp;
    fp.samples.assign(720, cplx(1.0, -1.0));
    EXPECT_EQ(sliding_window(fp, 48).size(), 673u);
}

TEST(SlidingWindow, WindowOneIsIdentity) {
    const auto s = build_schedule({7, 100, {0.0, 70.0}, {10.0, 14.0}, true});
    const auto fp = simulate_fingerprint({1.0, 900.0, 90.0}, s);
    EXPECT_EQ(sliding_window(fp, 1).samples, fp.samples);
}

TEST(SlidingWindow, RampMean) {
    Fingerprint fp;
    fp.samples = {1.0, 2.0, 3.0, 4.0};
    const auto out = sliding_window(fp, 2);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_DOUBLE_EQ(out.samples[0].real(), 1.5);
    EXPECT_DOUBLE_EQ(out.samples[1].real(), 2.5);
    EXPECT_DOUBLE_EQ(out.samples[2].real(), 3.5);
}

TEST(SlidingWindow, ConstantSignalExact) {
    Fingerprint fp;
    fp.samples.assign(500, cplx(0.1, 0.7));
    for (const cplx& v : sliding_window(fp, 48).samples) EXPECT_EQ(v, cplx(0.1, 0.7));
}

TEST(SlidingWindow, CommutesWithScaling) {
    const auto s = build_schedule({9, 300, {0.0, 70.0}, {10.0, 14.0}, true});
    Fingerprint fp = simulate_fingerprint({1.0, 700.0, 60.0}, s);
    Fingerprint scaled = fp;
    for (cplx& v : scaled.samples) v *= 3.0;
    const auto a = sliding_window(fp, 48), b = sliding_window(scaled, 48);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b.samples[i].real(), 3.0 * a.samples[i].real(), 1e-12);
}

TEST(SlidingWindow, RejectsBadWindow) {
    Fingerprint fp;
    fp.samples.assign(10, 1.0);
    EXPECT_THROW(sliding_window(fp, 0), ArgumentError);
    EXPECT_THROW(sliding_window(fp, 11), ArgumentError);
    EXPECT_NO_THROW(sliding_window(fp, 10));
}

TEST(Helpers, SplitRealImagAndNorm) {
    const std::vector<cplx> v{{1.0, 2.0}, {3.0, -4.0}};
    EXPECT_EQ(split_real_imag(v), (std::vector<double>{1.0, 3.0, 2.0, -4.0}));
    EXPECT_DOUBLE_EQ(euclidean_norm(v), std::sqrt(30.0));
}
