#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <mrf/crossval.hpp>
#include <mrf/phantom.hpp>
#include <mrf/report.hpp>

using namespace mrf;
using namespace mrf::eval;
namespace fs = std::filesystem;

namespace {

Volume<double> t1_volume(std::vector<double> t1) {
    Volume<double> v({t1.size(), 1, 1}, 1);
    v.data() = std::move(t1);
    return v;
}

prep::Scan phantom_scan(const std::string& id, std::uint64_t seed) {
    const phantom::Phantom ph = phantom::generate_phantom(seed, {32, 32, 1});
    return {id, MrfImage(ph.maps.dims(), 2), ph.maps, ph.brain_mask};
}

// Ground truth plus a per-scan offset, so metrics differ between scans.
ParametricMaps offset_maps(const prep::Scan& test, double offset) {
    ParametricMaps est = test.maps;
    for (std::size_t v = 0; v < test.mask.size(); ++v)
        if (test.mask.data()[v])
            for (double& q : est.values.at(v)) q += offset;
    return est;
}

struct TempDir {
    fs::path path = fs::temp_directory_path() /
                    ("mrf_eval_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    TempDir() { fs::create_directories(path); }
    ~TempDir() { fs::remove_all(path); }
};

struct Pgm {
    std::string comment;
    std::size_t width = 0, height = 0;
    std::vector<unsigned char> pixels;
};

Pgm read_pgm(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    Pgm out;
    std::string magic;
    std::getline(is, magic);
    EXPECT_EQ(magic, "P5");
    std::getline(is, out.comment);
    int maxval = 0;
    is >> out.width >> out.height >> maxval;
    EXPECT_EQ(maxval, 255);
    is.get();
    out.pixels.resize(out.width * out.height);
    is.read(reinterpret_cast<char*>(out.pixels.data()), static_cast<std::streamsize>(out.pixels.size()));
    EXPECT_TRUE(is);
    return out;
}

} // namespace

TEST(Segment, IntervalMembership) {
    const auto labels = segment_tissues(t1_volume({600, 1000, 2000, 400, 800, 1500, 300, 6000}), make_mask({8, 1, 1}, true),
                                        TissueThresholds{});
    const std::vector<std::int32_t> expect{1, 2, 3, 1, 2, 3, 0, 0};
    EXPECT_EQ(labels.data(), expect);
}

TEST(Segment, MaskAndValidation) {
    Mask mask = make_mask({3, 1, 1}, true);
    mask.data()[1] = 0;
    const auto labels = segment_tissues(t1_volume({600, 600, 600}), mask, {});
    EXPECT_EQ(labels.data(), (std::vector<std::int32_t>{1, 0, 1}));
    TissueThresholds bad;
    bad.gm = {700, 1500};
    EXPECT_THROW(bad.validate(), ConfigError);
    EXPECT_THROW(segment_tissues(t1_volume({600}), make_mask({1, 1, 1}, true), bad), ConfigError);
    bad = {};
    bad.csf = {2000, 2000};
    EXPECT_THROW(bad.validate(), ConfigError);
    EXPECT_NO_THROW(TissueThresholds{}.validate());
}

TEST(Segment, PhantomGroundTruthReproducesLabels) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const phantom::Phantom ph = phantom::generate_phantom(seed, {64, 64, 1});
        const LabelVolume labels = segment_tissues(ph.maps, ph.brain_mask, {});
        EXPECT_EQ(labels.data(), ph.labels.data());
    }
}

TEST(Metrics, HandValues) {
    const std::vector<double> est{1, 3}, ref{2, 5};
    EXPECT_DOUBLE_EQ(mae(est, ref), 1.5);
    EXPECT_DOUBLE_EQ(rmse(est, ref), std::sqrt(2.5));
    EXPECT_EQ(mae(ref, ref), 0.0);
    EXPECT_EQ(rmse(ref, ref), 0.0);
    EXPECT_THROW(mae(std::vector<double>{}, std::vector<double>{}), ArgumentError);
    EXPECT_THROW(rmse(est, std::vector<double>{1.0}), ArgumentError);
}

TEST(Metrics, RmseNeverBelowMae) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(1 + trial % 17), b(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = g(rng), b[i] = g(rng);
        EXPECT_GE(rmse(a, b), mae(a, b) - 1e-12);
    }
}

TEST(Metrics, TissueAndSegmentedError) {
    const prep::Scan s = phantom_scan("a", 3);
    const LabelVolume labels = segment_tissues(s.maps, s.mask, {});
    const ParametricMaps est = offset_maps(s, 2.0);
    for (phantom::Label t : kTissues) {
        const ErrorPair e = tissue_error(est, s.maps, labels, t, 1);
        EXPECT_GT(e.count, 0u);
        EXPECT_NEAR(e.mae, 2.0, 1e-9);
        EXPECT_NEAR(e.rmse, 2.0, 1e-9);
    }
    const ErrorPair all = segmented_error(est, s.maps, labels, 2);
    EXPECT_EQ(all.count, count_masked(s.mask));
    EXPECT_NEAR(all.mae, 2.0, 1e-9);
    EXPECT_EQ(tissue_error(est, s.maps, labels, 7, 1).count, 0u);
}

TEST(ErrorMap, Properties) {
    const prep::Scan s = phantom_scan("a", 4);
    const ParametricMaps zero = error_map(s.maps, s.maps, s.mask);
    for (double q : zero.values.data()) EXPECT_EQ(q, 0.0);
    const ParametricMaps shifted = offset_maps(s, 3.0);
    const ParametricMaps e = error_map(shifted, s.maps, s.mask);
    const ParametricMaps r = error_map(s.maps, shifted, s.mask);
    for (std::size_t v = 0; v < s.mask.size(); ++v)
        for (std::size_t m = 0; m < 3; ++m) {
            EXPECT_NEAR(e.values.at(v)[m], s.mask.data()[v] ? 3.0 : 0.0, 1e-9);
            EXPECT_EQ(e.values.at(v)[m], -r.values.at(v)[m]);
        }
}

TEST(Crossval, OracleReconstructorScoresZero) {
    const prep::Scan a = phantom_scan("a", 5);
    prep::Scan b = a;
    b.id = "b";
    const std::vector<prep::Scan> data{a, b};
    const std::vector<Method> methods{{"oracle", [](auto, const prep::Scan& test, std::uint64_t) { return test.maps; }}};
    const CrossvalResult r = loo_crossval(data, methods, {});
    EXPECT_EQ(r.report.folds, 2u);
    EXPECT_EQ(r.folds.size(), 2u);
    EXPECT_EQ(r.report.rows.size(), 9u);
    for (const ReportRow& row : r.report.rows) {
        EXPECT_EQ(row.mae_mean, 0.0);
        EXPECT_EQ(row.rmse_mean, 0.0);
        EXPECT_EQ(row.mae_std, 0.0);
    }
}

TEST(Crossval, SixScansSixFoldsAndTrainingSetsExcludeTest) {
    std::vector<prep::Scan> data;
    for (int i = 0; i < 6; ++i) data.push_back(phantom_scan("scan0" + std::to_string(i), 10 + i));
    std::vector<std::string> seen;
    const std::vector<Method> methods{{"check", [&](std::span<const prep::Scan> train, const prep::Scan& test, std::uint64_t) {
                                           EXPECT_EQ(train.size(), 5u);
                                           for (const auto& t : train) EXPECT_NE(t.id, test.id);
                                           seen.push_back(test.id);
                                           return test.maps;
                                       }}};
    const CrossvalResult r = loo_crossval(data, methods, {});
    EXPECT_EQ(r.report.folds, 6u);
    EXPECT_EQ(seen, (std::vector<std::string>{"scan00", "scan01", "scan02", "scan03", "scan04", "scan05"}));
}

TEST(Crossval, AggregatesMeanAndPopulationStd) {
    const std::vector<prep::Scan> data{phantom_scan("a", 6), phantom_scan("b", 7)};
    const std::vector<Method> methods{{"shift", [](auto, const prep::Scan& test, std::uint64_t) {
                                           return offset_maps(test, test.id == "a" ? 1.0 : 3.0);
                                       }}};
    const CrossvalResult r = loo_crossval(data, methods, {});
    const ReportRow* row = r.report.find("GM", "shift", "T1");
    ASSERT_NE(row, nullptr);
    EXPECT_NEAR(row->mae_mean, 2.0, 1e-9);
    EXPECT_NEAR(row->mae_std, 1.0, 1e-9);
    EXPECT_NEAR(row->rmse_mean, 2.0, 1e-9);
    EXPECT_EQ(r.report.find("GM", "shift", "nope"), nullptr);
    // Rows ordered tissue-major, then method, then map.
    ASSERT_EQ(r.report.rows.size(), 9u);
    EXPECT_EQ(r.report.rows[0].tissue, "WM");
    EXPECT_EQ(r.report.rows[0].map, "PD");
    EXPECT_EQ(r.report.rows[8].tissue, "CSF");
    EXPECT_EQ(r.report.rows[8].map, "T2");
}

TEST(Crossval, OrderInvariance) {
    std::vector<prep::Scan> data{phantom_scan("c", 8), phantom_scan("a", 9), phantom_scan("b", 10)};
    auto noisy = [](std::span<const prep::Scan> train, const prep::Scan& test, std::uint64_t seed) {
        ParametricMaps est = test.maps;
        std::mt19937_64 rng(seed + train.size());
        std::normal_distribution<double> g(0.0, 5.0);
        for (double& q : est.values.data()) q += g(rng);
        return est;
    };
    const std::vector<Method> methods{{"noisy", noisy}};
    const CrossvalResult r1 = loo_crossval(data, methods, {});
    std::reverse(data.begin(), data.end());
    const CrossvalResult r2 = loo_crossval(data, methods, {});
    EXPECT_EQ(r1.report.rows, r2.report.rows);
    std::swap(data[0], data[1]);
    EXPECT_EQ(loo_crossval(data, methods, {}).report.rows, r1.report.rows);

    data.push_back(data[0]);
    EXPECT_THROW(loo_crossval(data, methods, {}), ArgumentError);
}

TEST(Crossval, FailedFoldIsNotedAndSkipped) {
    const std::vector<prep::Scan> data{phantom_scan("a", 11), phantom_scan("b", 12), phantom_scan("c", 13)};
    const std::vector<Method> methods{{"flaky", [](auto, const prep::Scan& test, std::uint64_t) {
                                           if (test.id == "b") throw DataError("diverged");
                                           return offset_maps(test, 1.0);
                                       }}};
    const CrossvalResult r = loo_crossval(data, methods, {});
    ASSERT_EQ(r.report.failures.size(), 1u);
    EXPECT_NE(r.report.failures[0].find("flaky/b"), std::string::npos);
    EXPECT_NE(r.report.failures[0].find("diverged"), std::string::npos);
    EXPECT_TRUE(r.folds[1].failed);
    EXPECT_NEAR(r.report.find("WM", "flaky", "T1")->mae_mean, 1.0, 1e-9);
    EXPECT_NEAR(r.report.find("WM", "flaky", "T1")->mae_std, 0.0, 1e-9);
}

TEST(Crossval, FoldSeedsAreDistinctAndStable) {
    EXPECT_EQ(fold_seed(1, 0), fold_seed(1, 0));
    EXPECT_NE(fold_seed(1, 0), fold_seed(1, 1));
    EXPECT_NE(fold_seed(1, 0), fold_seed(2, 0));
}

TEST(Report, CsvLayoutAndRoundTrip) {
    MetricsReport rep;
    rep.rows = {{"WM", "cnn", "T1", 159.4, 36.3, 200.25, 40.0}, {"GM", "mlp", "PD", 0.04321, 0.001, 0.05, -0.0}};
    rep.failures = {"mlp/scan02: boom"};
    std::stringstream ss;
    write_report(ss, rep);
    const std::string text = ss.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "tissue,method,map,mae_mean,mae_std,rmse_mean,rmse_std");
    EXPECT_NE(text.find("WM,cnn,T1,159.4000,36.3000,200.2500,40.0000\n"), std::string::npos);
    EXPECT_NE(text.find("GM,mlp,PD,0.0432,0.0010,0.0500,0.0000\n"), std::string::npos);
    EXPECT_NE(text.find("# failures: mlp/scan02: boom"), std::string::npos);

    const MetricsReport back = read_report(ss);
    ASSERT_EQ(back.rows.size(), 2u);
    EXPECT_EQ(back.rows[0].tissue, "WM");
    EXPECT_NEAR(back.rows[0].mae_mean, 159.4, 1e-4);
    EXPECT_NEAR(back.rows[1].mae_mean, 0.0432, 1e-4);
    EXPECT_EQ(back.failures, rep.failures);
}

TEST(Report, EmptyIsHeaderOnly) {
    std::stringstream ss;
    write_report(ss, {});
    EXPECT_EQ(ss.str(), "tissue,method,map,mae_mean,mae_std,rmse_mean,rmse_std\n");
    EXPECT_TRUE(read_report(ss).rows.empty());
}

TEST(Report, MalformedInput) {
    std::stringstream bad_header("a,b,c\n");
    EXPECT_THROW(read_report(bad_header), DataError);
    std::stringstream bad_row("tissue,method,map,mae_mean,mae_std,rmse_mean,rmse_std\nWM,cnn,T1,x,1,2,3\n");
    EXPECT_THROW(read_report(bad_row), DataError);
}

TEST(Report, FileRoundTrip) {
    TempDir dir;
    MetricsReport rep;
    rep.rows = {{"CSF", "stdict", "T2", 12.5, 1.25, 20.0, 2.0}};
    emit_report(rep, dir.path / "r.csv");
    const MetricsReport back = parse_report(dir.path / "r.csv");
    EXPECT_EQ(back.rows, rep.rows);
    EXPECT_THROW(parse_report(dir.path / "missing.csv"), IoError);
}

TEST(Preview, ConstantMapIsUniform) {
    TempDir dir;
    const Volume<double> v({5, 7, 1}, 1, 42.0);
    emit_preview(v, 0, 0, make_mask(v.dims(), true), dir.path / "c.pgm");
    const Pgm p = read_pgm(dir.path / "c.pgm");
    EXPECT_EQ(p.width, 7u);
    EXPECT_EQ(p.height, 5u);
    for (unsigned char px : p.pixels) EXPECT_EQ(px, p.pixels[0]);
}

TEST(Preview, LinearWindowSpansMaskedRange) {
    TempDir dir;
    Volume<double> v({4, 6, 2}, 2);
    for (std::size_t x = 0; x < 4; ++x)
        for (std::size_t y = 0; y < 6; ++y) v(x, y, 1, 1) = static_cast<double>(x * 6 + y);
    emit_preview(v, 1, 1, make_mask(v.dims(), true), dir.path / "r.pgm");
    const Pgm p = read_pgm(dir.path / "r.pgm");
    EXPECT_EQ(p.comment, "# window linear 0 23");
    EXPECT_EQ(p.pixels.front(), 0);
    EXPECT_EQ(p.pixels.back(), 255);
    // Row-major with rows along x.
    EXPECT_EQ(p.pixels[6], static_cast<unsigned char>(std::lround(6.0 / 23.0 * 255.0)));
    EXPECT_THROW(emit_preview(v, 2, 0, make_mask(v.dims(), true), dir.path / "x.pgm"), ArgumentError);
}

TEST(Preview, ZeroErrorIsMidGray) {
    TempDir dir;
    const Volume<double> v({3, 3, 1}, 1, 0.0);
    emit_preview(v, 0, 0, make_mask(v.dims(), true), dir.path / "e.pgm", Window::Symmetric);
    const Pgm p = read_pgm(dir.path / "e.pgm");
    for (unsigned char px : p.pixels) EXPECT_EQ(px, 128);

    Volume<double> w({1, 3, 1}, 1);
    w.data() = {-2.0, 0.0, 1.0};
    emit_preview(w, 0, 0, make_mask(w.dims(), true), dir.path / "s.pgm", Window::Symmetric);
    const Pgm q = read_pgm(dir.path / "s.pgm");
    EXPECT_EQ(q.comment, "# window symmetric -2 2");
    EXPECT_EQ(q.pixels[0], 0);
    EXPECT_EQ(q.pixels[1], 128);
}
