#include <benchmark/benchmark.h>

#include <random>

#include <mrf/baselines.hpp>
#include <mrf/dictionary.hpp>
#include <mrf/layers.hpp>
#include <mrf/phantom.hpp>
#include <mrf/stcnn.hpp>
#include <mrf/training.hpp>

using namespace mrf;

namespace {

ad::Tensor random_tensor(ad::Shape s, std::uint64_t seed, bool grad) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> v(ad::shape_numel(s));
    for (double& x : v) x = g(rng);
    return ad::Tensor::from(std::move(s), std::move(v), grad);
}

sim::SequenceSchedule schedule(std::size_t t_raw) {
    sim::ScheduleConfig cfg;
    cfg.t_raw = t_raw;
    return sim::build_schedule(cfg);
}

prep::Scan make_scan(std::uint64_t seed, const sim::SequenceSchedule& sched) {
    phantom::Phantom ph = phantom::generate_phantom(seed, {64, 64, 1});
    phantom::ArtifactConfig ac;
    ac.noise_sigma = 0.03;
    MrfImage img = phantom::apply_artifacts(phantom::render_mrf_image(ph, sched, 48, std::nullopt), ac, seed);
    return {"s" + std::to_string(seed), std::move(img), std::move(ph.maps), std::move(ph.brain_mask)};
}

} // namespace

static void BM_ConvForward(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    const ad::Tensor x = random_tensor({64, 5, 5, c}, 1, false);
    const ad::Tensor k = random_tensor({5, 5, c, c}, 2, false);
    const ad::Tensor b = random_tensor({c}, 3, false);
    ad::NoGradGuard guard;
    for (auto _ : state) benchmark::DoNotOptimize(ad::conv2d_valid(x, k, b));
}
BENCHMARK(BM_ConvForward)->Arg(32)->Arg(128);

static void BM_ConvForwardBackward(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    ad::Tensor x = random_tensor({64, 5, 5, c}, 1, true);
    ad::Tensor k = random_tensor({5, 5, c, c}, 2, true);
    ad::Tensor b = random_tensor({c}, 3, true);
    const ad::Tensor target = ad::Tensor::zeros({64, 1, 1, c});
    for (auto _ : state) {
        k.zero_grad();
        ad::backward(ad::mse_loss(ad::conv2d_valid(x, k, b), target));
    }
}
BENCHMARK(BM_ConvForwardBackward)->Arg(32)->Arg(128);

static void BM_SimulateFingerprint(benchmark::State& state) {
    const auto sched = schedule(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sim::simulate_fingerprint({1.0, 900.0, 90.0}, sched));
}
BENCHMARK(BM_SimulateFingerprint)->Arg(147)->Arg(720);

static void BM_DictionaryMatchSlice(benchmark::State& state) {
    const auto sched = schedule(147);
    const sim::Dictionary dict =
        sim::build_dictionary(sim::make_grid(100, 3000, 20), sim::make_grid(10, 500, 5), sched, 48);
    const prep::Scan scan = make_scan(1, sched);
    for (auto _ : state) benchmark::DoNotOptimize(baselines::reconstruct_dict(scan.image, dict, scan.mask));
    state.counters["entries"] = static_cast<double>(dict.size());
}
BENCHMARK(BM_DictionaryMatchSlice)->Unit(benchmark::kMillisecond);

static void BM_CnnReconstructSlice(benchmark::State& state) {
    const auto sched = schedule(147);
    const prep::Scan scan = make_scan(1, sched);
    nn::SpatiotemporalCnn model(scan.image.channels(), 3, nn::CnnWidths{}, 0.2, 1);
    model.norm_stats = prep::prepare_training_set(std::span<const prep::Scan>(&scan, 1), {}).stats;
    for (auto _ : state) benchmark::DoNotOptimize(nn::reconstruct_scan(model, scan.image, scan.mask));
}
BENCHMARK(BM_CnnReconstructSlice)->Unit(benchmark::kMillisecond);

static void BM_StDictReconstructSlice(benchmark::State& state) {
    const auto sched = schedule(147);
    std::vector<prep::Scan> scans;
    for (std::uint64_t s = 1; s <= 6; ++s) scans.push_back(make_scan(s, sched));
    const std::span<const prep::Scan> training(scans.data() + 1, scans.size() - 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(baselines::reconstruct_stdict(scans[0].image, training, {}, scans[0].mask));
}
BENCHMARK(BM_StDictReconstructSlice)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
