#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <mrf/dictionary.hpp>

using namespace mrf;
using namespace mrf::sim;

namespace {

SequenceSchedule schedule() { return build_schedule({7, 150, {0.0, 70.0}, {10.0, 14.0}, true}); }

} // namespace

TEST(Grid, InclusiveArithmeticGrid) {
    EXPECT_EQ(make_grid(100.0, 300.0, 50.0), (std::vector<double>{100.0, 150.0, 200.0, 250.0, 300.0}));
    EXPECT_EQ(make_grid(10.0, 10.0, 5.0), (std::vector<double>{10.0}));
    // Values come from start + i * step, so no drift accumulates.
    const auto g = make_grid(100.0, 3000.0, 20.0);
    EXPECT_EQ(g.size(), 146u);
    EXPECT_EQ(g.back(), 3000.0);
}

TEST(Dictionary, AllPairsValid) {
    const auto d = build_dictionary({500.0, 1000.0}, {50.0, 100.0}, schedule(), 48);
    EXPECT_EQ(d.size(), 4u);
    EXPECT_EQ(d.length(), 103u);
}

TEST(Dictionary, NoValidPairIsConfigError) {
    EXPECT_THROW(build_dictionary({80.0}, {100.0}, schedule(), 48), ConfigError);
}

TEST(Dictionary, SkipsPairsWithT2AboveT1) {
    const auto d = build_dictionary({100.0, 200.0, 300.0}, {100.0, 250.0}, schedule(), 48);
    // Valid: (100,100), (200,100), (300,100), (300,250).
    ASSERT_EQ(d.size(), 4u);
    for (const auto& e : d.entries) EXPECT_LE(e.params.t2_ms, e.params.t1_ms);
    EXPECT_EQ(d.entries[3].params.t1_ms, 300.0);
    EXPECT_EQ(d.entries[3].params.t2_ms, 250.0);
}

TEST(Dictionary, UnitNormAndRetainedScale) {
    const auto s = schedule();
    const auto d = build_dictionary(make_grid(200.0, 2000.0, 300.0), make_grid(20.0, 200.0, 60.0), s, 48);
    for (const auto& e : d.entries) {
        EXPECT_NEAR(euclidean_norm(e.fingerprint.samples), 1.0, 1e-12);
        EXPECT_EQ(e.params.pd, 1.0);
        const auto raw = sliding_window(simulate_fingerprint(e.params, s), 48);
        EXPECT_NEAR(e.norm_factor, euclidean_norm(raw.samples), 1e-12 * e.norm_factor);
        for (std::size_t i = 0; i < raw.size(); ++i)
            EXPECT_NEAR(e.fingerprint.samples[i].real() * e.norm_factor, raw.samples[i].real(), 1e-12);
    }
}

TEST(Dictionary, Deterministic) {
    const auto a = build_dictionary(make_grid(100.0, 3000.0, 100.0), make_grid(10.0, 500.0, 20.0), schedule(), 48);
    const auto b = build_dictionary(make_grid(100.0, 3000.0, 100.0), make_grid(10.0, 500.0, 20.0), schedule(), 48);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.entries[i].params, b.entries[i].params);
        EXPECT_EQ(a.entries[i].norm_factor, b.entries[i].norm_factor);
        EXPECT_EQ(a.entries[i].fingerprint.samples, b.entries[i].fingerprint.samples);
    }
}

TEST(Dictionary, FileRoundTrip) {
    const auto d = build_dictionary({500.0, 1000.0, 1500.0}, {50.0, 100.0}, schedule(), 48);
    const auto path = std::filesystem::temp_directory_path() / "mrf_test_dict.mrfd";
    write_dictionary(path, d);
    const auto r = read_dictionary(path);
    std::filesystem::remove(path);
    ASSERT_EQ(r.size(), d.size());
    ASSERT_EQ(r.length(), d.length());
    EXPECT_EQ(r.t1_grid_ms, (std::vector<double>{500.0, 1000.0, 1500.0}));
    EXPECT_EQ(r.t2_grid_ms, (std::vector<double>{50.0, 100.0}));
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_EQ(r.entries[i].params, d.entries[i].params);
        EXPECT_EQ(r.entries[i].norm_factor, d.entries[i].norm_factor);
        for (std::size_t k = 0; k < d.length(); ++k) {
            const cplx& got = r.entries[i].fingerprint.samples[k];
            const cplx& want = d.entries[i].fingerprint.samples[k];
            EXPECT_EQ(got.real(), static_cast<double>(static_cast<float>(want.real())));
            EXPECT_EQ(got.imag(), static_cast<double>(static_cast<float>(want.imag())));
        }
    }
}

TEST(Dictionary, CorruptFileRejected) {
    const auto path = std::filesystem::temp_directory_path() / "mrf_test_bad.mrfd";
    {
        std::ofstream os(path, std::ios::binary);
        os << "MRFD 3 10\n" << "short";
    }
    EXPECT_THROW(read_dictionary(path), IoError);
    std::filesystem::remove(path);
    EXPECT_THROW(read_dictionary(path), IoError);
}
