#include "mrf/crossval.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mrf::eval {

namespace {

struct Moments {
    double mean = 0.0;
    double std = 0.0;
};

// Population statistics: a single fold has std 0.
Moments moments(const std::vector<double>& xs) {
    Moments m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(xs.size()));
    return m;
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::uint64_t fold_seed(std::uint64_t base, std::size_t fold) { return splitmix(base ^ splitmix(fold + 1)); }

const ReportRow* MetricsReport::find(const std::string& tissue, const std::string& method,
                                     const std::string& map) const {
    for (const auto& r : rows)
        if (r.tissue == tissue && r.method == method && r.map == map) return &r;
    return nullptr;
}

CrossvalResult loo_crossval(std::span<const prep::Scan> dataset, std::span<const Method> methods,
                            const CrossvalConfig& cfg, const FoldObserver& observer) {
    cfg.thresholds.validate();
    if (dataset.size() < 2) throw ArgumentError("loo_crossval: at least two scans are required");
    if (methods.empty()) throw ArgumentError("loo_crossval: no methods given");

    std::vector<const prep::Scan*> order;
    for (const auto& s : dataset) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const prep::Scan* a, const prep::Scan* b) { return a->id < b->id; });
    for (std::size_t i = 1; i < order.size(); ++i)
        if (order[i]->id == order[i - 1]->id) throw ArgumentError("loo_crossval: duplicate scan id '" + order[i]->id + "'");
    std::set<std::string> names;
    for (const auto& m : methods)
        if (!names.insert(m.name).second) throw ArgumentError("loo_crossval: duplicate method '" + m.name + "'");

    const std::vector<std::string>& map_names = order.front()->maps.names;
    for (const auto* s : order)
        if (s->maps.names != map_names) throw ArgumentError("loo_crossval: scans disagree on map channels");

    CrossvalResult result;
    result.report.folds = order.size();

    std::vector<LabelVolume> labels;
    for (const auto* s : order) labels.push_back(segment_tissues(s->maps, s->mask, cfg.thresholds));

    for (const Method& method : methods) {
        for (std::size_t f = 0; f < order.size(); ++f) {
            std::vector<prep::Scan> train;
            for (std::size_t j = 0; j < order.size(); ++j)
                if (j != f) train.push_back(*order[j]);
            const prep::Scan& test = *order[f];

            FoldResult fold;
            fold.method = method.name;
            fold.held_out = test.id;
            fold.seed = fold_seed(cfg.seed, f);
            ParametricMaps estimate;
            try {
                estimate = method.reconstruct(train, test, fold.seed);
                if (!estimate.values.same_shape(test.maps.values))
                    throw DataError("estimate shape does not match the reference maps");
            } catch (const std::exception& e) {
                fold.failed = true;
                fold.error = e.what();
                result.report.failures.push_back(method.name + "/" + test.id + ": " + e.what());
                result.folds.push_back(std::move(fold));
                continue;
            }
            for (phantom::Label t : kTissues) {
                std::vector<ErrorPair> per_map;
                for (std::size_t c = 0; c < map_names.size(); ++c)
                    per_map.push_back(tissue_error(estimate, test.maps, labels[f], t, c));
                fold.tissue.push_back(std::move(per_map));
            }
            for (std::size_t c = 0; c < map_names.size(); ++c)
                fold.segmented.push_back(segmented_error(estimate, test.maps, labels[f], c));
            if (observer) observer(fold, test, estimate);
            result.folds.push_back(std::move(fold));
        }
    }

    for (std::size_t ti = 0; ti < kTissues.size(); ++ti)
        for (const Method& method : methods)
            for (std::size_t c = 0; c < map_names.size(); ++c) {
                std::vector<double> maes, rmses;
                for (const FoldResult& fold : result.folds) {
                    if (fold.method != method.name || fold.failed) continue;
                    const ErrorPair& e = fold.tissue[ti][c];
                    if (e.count == 0) continue;
                    maes.push_back(e.mae);
                    rmses.push_back(e.rmse);
                }
                if (maes.empty()) continue;
                const Moments a = moments(maes), r = moments(rmses);
                result.report.rows.push_back(
                    {tissue_name(kTissues[ti]), method.name, map_names[c], a.mean, a.std, r.mean, r.std});
            }
    return result;
}

} // namespace mrf::eval
