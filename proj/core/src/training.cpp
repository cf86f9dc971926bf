#include "mrf/training.hpp"

#include <algorithm>

#include "mrf/adam.hpp"
#include "mrf/error.hpp"

namespace mrf::nn {

namespace {

constexpr std::uint64_t kSamplerStream = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kDropoutStream = 0xbf58476d1ce4e5b9ULL;

ParametricMaps denormalized_output(const Regressor& model, Dims dims, const std::vector<std::size_t>& voxels,
                                   const std::vector<double>& pred) {
    const std::size_t m = model.outputs();
    std::vector<std::string> names = model.norm_stats.names;
    if (names.size() != m) names = default_map_names();
    ParametricMaps maps = make_maps(dims, names);
    for (std::size_t i = 0; i < voxels.size(); ++i) {
        auto q = maps.values.at(voxels[i]);
        for (std::size_t k = 0; k < m; ++k) {
            const auto [lo, hi] = model.norm_stats.ranges[k];
            q[k] = pred[i * m + k] * (hi - lo) + lo;
        }
    }
    return maps;
}

void check_model_input(const Regressor& model, const MrfImage& image, const Mask& mask) {
    if (image.channels() != model.frames())
        throw ArgumentError("reconstruct: image has T=" + std::to_string(image.channels()) + ", model expects T=" +
                            std::to_string(model.frames()));
    if (!image.same_grid(mask)) throw ArgumentError("reconstruct: image and mask shapes disagree");
    model.norm_stats.validate();
    if (model.norm_stats.size() != model.outputs()) throw DataError("reconstruct: model lacks normalization stats");
}

} // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate: must be positive");
    if (batch_size == 0) throw ConfigError("train.batch_size: must be positive");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("train.dropout_rate: must lie in [0, 1)");
    if (max_auto_steps == 0) throw ConfigError("train.max_auto_steps: must be positive");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw ConfigError("train.adam_beta: must lie in [0, 1)");
    if (!(adam_epsilon > 0.0)) throw ConfigError("train.adam_epsilon: must be positive");
}

std::size_t resolve_steps_per_epoch(const TrainConfig& cfg, std::size_t masked_voxels) {
    if (cfg.steps_per_epoch > 0) return cfg.steps_per_epoch;
    return std::clamp<std::size_t>(masked_voxels / cfg.batch_size, 1, cfg.max_auto_steps);
}

TrainHistory train(Regressor& model, std::span<const prep::PreparedScan> scans, const TrainConfig& cfg,
                   const EpochCallback& on_epoch) {
    cfg.validate();
    TrainHistory history;
    if (cfg.epochs == 0) return history;
    for (const auto& sc : scans)
        if (sc.image.channels() != model.frames() || sc.maps.count() != model.outputs())
            throw ArgumentError("train: scan T/M does not match the model");

    const prep::PatchSampler sampler(scans, model.patch_size());
    const std::size_t steps = resolve_steps_per_epoch(cfg, sampler.population());
    std::mt19937_64 sample_rng(cfg.seed ^ kSamplerStream);
    std::mt19937_64 dropout_rng(cfg.seed ^ kDropoutStream);
    std::vector<Tensor> params = model.parameters();
    ad::AdamState adam;
    const ad::AdamConfig adam_cfg{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon};

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double total = 0.0;
        for (std::size_t step = 0; step < steps; ++step) {
            prep::PatchBatch batch = sampler.sample(cfg.batch_size, sample_rng);
            const std::size_t p = batch.patch_size;
            Tensor x = Tensor::from({batch.count, p, p, batch.channels}, std::move(batch.inputs));
            Tensor y = Tensor::from({batch.count, batch.maps}, std::move(batch.targets));
            for (Tensor& t : params) t.zero_grad();
            Tensor loss = ad::mse_loss(model.forward(x, Mode::Train, dropout_rng), y);
            ad::backward(loss);
            ad::adam_step(params, adam, adam_cfg);
            total += loss.item();
        }
        history.epoch_loss.push_back(total / static_cast<double>(steps));
        if (on_epoch) on_epoch(epoch, history.epoch_loss.back());
    }
    return history;
}

TrainedCnn train_stcnn(std::span<const prep::Scan> scans, const CnnWidths& widths, const TrainConfig& cfg,
                       const prep::PreprocessConfig& prep_cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    prep::PreparedSet set = prep::prepare_training_set(scans, prep_cfg);
    const auto& first = set.scans.front();
    TrainedCnn out{SpatiotemporalCnn(first.image.channels(), first.maps.count(), widths, cfg.dropout_rate, cfg.seed),
                   {}};
    out.model.norm_stats = set.stats;
    out.history = train(out.model, set.scans, cfg, on_epoch);
    return out;
}

TrainedMlp train_mlp(std::span<const prep::Scan> scans, const std::vector<std::size_t>& hidden,
                     const TrainConfig& cfg, const prep::PreprocessConfig& prep_cfg, const EpochCallback& on_epoch) {
    cfg.validate();
    prep::PreparedSet set = prep::prepare_training_set(scans, prep_cfg);
    const auto& first = set.scans.front();
    TrainedMlp out{FingerprintMlp(first.image.channels(), first.maps.count(), hidden, cfg.seed), {}};
    out.model.norm_stats = set.stats;
    out.history = train(out.model, set.scans, cfg, on_epoch);
    return out;
}

ParametricMaps reconstruct(Regressor& model, const MrfImage& normalized_image, const Mask& mask,
                           std::size_t batch_size) {
    check_model_input(model, normalized_image, mask);
    batch_size = std::max<std::size_t>(1, batch_size);
    const std::vector<std::size_t> voxels = masked_voxels(mask);
    const std::size_t p = model.patch_size();
    const std::size_t channels = 2 * model.frames();
    const std::size_t stride = p * p * channels;
    std::vector<double> pred(voxels.size() * model.outputs());
    std::mt19937_64 unused(0);
    ad::NoGradGuard no_grad;
    for (std::size_t start = 0; start < voxels.size(); start += batch_size) {
        const std::size_t n = std::min(batch_size, voxels.size() - start);
        std::vector<double> inputs(n * stride);
        for (std::size_t i = 0; i < n; ++i)
            prep::extract_patch_into(normalized_image, mask.voxel_at(voxels[start + i]), p,
                                     std::span(inputs).subspan(i * stride, stride));
        Tensor out = model.forward(Tensor::from({n, p, p, channels}, std::move(inputs)), Mode::Eval, unused);
        std::copy(out.values().begin(), out.values().end(),
                  pred.begin() + static_cast<long>(start * model.outputs()));
    }
    return denormalized_output(model, mask.dims(), voxels, pred);
}

ParametricMaps reconstruct_fully_convolutional(SpatiotemporalCnn& model, const MrfImage& normalized_image,
                                               const Mask& mask) {
    check_model_input(model, normalized_image, mask);
    const Dims d = mask.dims();
    const std::size_t m = model.outputs();
    const std::vector<std::size_t> voxels = masked_voxels(mask);
    std::vector<double> pred(voxels.size() * m);
    std::vector<std::vector<double>> slices(d.z);
    for (std::size_t z = 0; z < d.z; ++z) {
        bool any = false;
        for (std::size_t v : voxels) any |= mask.voxel_at(v).z == z;
        if (any) slices[z] = model.predict_slice(normalized_image, z);
    }
    for (std::size_t i = 0; i < voxels.size(); ++i) {
        const Voxel v = mask.voxel_at(voxels[i]);
        const double* src = slices[v.z].data() + (v.x * d.y + v.y) * m;
        std::copy(src, src + m, pred.begin() + static_cast<long>(i * m));
    }
    return denormalized_output(model, d, voxels, pred);
}

ParametricMaps reconstruct_scan(Regressor& model, const MrfImage& image, const Mask& mask,
                                const prep::PreprocessConfig& prep_cfg) {
    const MrfImage input = prep::prepare_input(image, mask, prep_cfg);
    if (auto* cnn = dynamic_cast<SpatiotemporalCnn*>(&model)) return reconstruct_fully_convolutional(*cnn, input, mask);
    return reconstruct(model, input, mask);
}

} // namespace mrf::nn
