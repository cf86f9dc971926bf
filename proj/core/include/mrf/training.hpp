#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mrf/mlp.hpp"
#include "mrf/preprocess.hpp"
#include "mrf/stcnn.hpp"

namespace mrf::nn {

struct TrainConfig {
    double learning_rate = 0.001;
    std::size_t batch_size = 600;
    double dropout_rate = 0.2;
    std::size_t epochs = 50;
    std::size_t steps_per_epoch = 0; // 0: masked voxels / batch size, clamped to [1, max_auto_steps]
    std::size_t max_auto_steps = 200;
    std::uint64_t seed = 1;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    void validate() const;
};

struct TrainHistory {
    std::vector<double> epoch_loss; // mean minibatch MSE per epoch, normalized units
};

std::size_t resolve_steps_per_epoch(const TrainConfig& cfg, std::size_t masked_voxels);

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

// Minibatch Adam on MSE: sample -> forward (train) -> loss -> backward -> step.
TrainHistory train(Regressor& model, std::span<const prep::PreparedScan> scans, const TrainConfig& cfg,
                   const EpochCallback& on_epoch = {});

struct TrainedCnn {
    SpatiotemporalCnn model;
    TrainHistory history;
};
TrainedCnn train_stcnn(std::span<const prep::Scan> scans, const CnnWidths& widths, const TrainConfig& cfg,
                       const prep::PreprocessConfig& prep_cfg = {}, const EpochCallback& on_epoch = {});

struct TrainedMlp {
    FingerprintMlp model;
    TrainHistory history;
};
TrainedMlp train_mlp(std::span<const prep::Scan> scans, const std::vector<std::size_t>& hidden,
                     const TrainConfig& cfg, const prep::PreprocessConfig& prep_cfg = {},
                     const EpochCallback& on_epoch = {});

// Eval-mode prediction at every masked voxel of an already normalized image,
// denormalized with model.norm_stats. Unmasked voxels are zero.
ParametricMaps reconstruct(Regressor& model, const MrfImage& normalized_image, const Mask& mask,
                           std::size_t batch_size = 512);

// Same result for the CNN via whole-slice evaluation.
ParametricMaps reconstruct_fully_convolutional(SpatiotemporalCnn& model, const MrfImage& normalized_image,
                                               const Mask& mask);

// Preprocesses a raw scan image and reconstructs it, using the slice path for CNNs.
ParametricMaps reconstruct_scan(Regressor& model, const MrfImage& image, const Mask& mask,
                                const prep::PreprocessConfig& prep_cfg = {});

} // namespace mrf::nn
