#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mrf/eval.hpp"
#include "mrf/preprocess.hpp"

namespace mrf::eval {

// Fits on `train` and returns denormalized maps for `test`.
using Reconstructor =
    std::function<ParametricMaps(std::span<const prep::Scan> train, const prep::Scan& test, std::uint64_t seed)>;

struct Method {
    std::string name;
    Reconstructor reconstruct;
};

struct CrossvalConfig {
    TissueThresholds thresholds;
    std::uint64_t seed = 1;
};

// One report cell: tissue x method x map, aggregated over folds.
struct ReportRow {
    std::string tissue;
    std::string method;
    std::string map;
    double mae_mean = 0.0;
    double mae_std = 0.0;
    double rmse_mean = 0.0;
    double rmse_std = 0.0;

    bool operator==(const ReportRow&) const = default;
};

struct MetricsReport {
    std::vector<ReportRow> rows;
    std::size_t folds = 0;
    std::vector<std::string> failures; // "method/scan: reason"

    const ReportRow* find(const std::string& tissue, const std::string& method, const std::string& map) const;
};

struct FoldResult {
    std::string method;
    std::string held_out;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    // [tissue][map] in kTissues x map-channel order; count 0 when absent.
    std::vector<std::vector<ErrorPair>> tissue;
    // Per map, over all segmented voxels.
    std::vector<ErrorPair> segmented;
};

struct CrossvalResult {
    MetricsReport report;
    std::vector<FoldResult> folds; // method-major, then canonical scan order
};

// Called after each successful fold with the held-out scan and its estimate.
using FoldObserver = std::function<void(const FoldResult&, const prep::Scan& test, const ParametricMaps& estimate)>;

// Leave-one-out over `dataset`. Scans are visited in ascending id order so the
// result does not depend on the order of `dataset`; ids must be unique.
CrossvalResult loo_crossval(std::span<const prep::Scan> dataset, std::span<const Method> methods,
                            const CrossvalConfig& cfg, const FoldObserver& observer = {});

// Seed handed to the reconstructor of fold `fold` (canonical order).
std::uint64_t fold_seed(std::uint64_t base, std::size_t fold);

} // namespace mrf::eval
