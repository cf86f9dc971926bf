#include "mrf/mlp.hpp"

#include "mrf/error.hpp"

namespace mrf::nn {

FingerprintMlp::FingerprintMlp(std::size_t frames, std::size_t outputs, std::vector<std::size_t> hidden,
                               std::uint64_t seed)
    : Regressor(frames, outputs), hidden_(std::move(hidden)) {
    if (frames == 0 || outputs == 0) throw ConfigError("mlp: T and M must be positive");
    std::mt19937_64 rng(seed);
    std::size_t in = 2 * frames;
    for (std::size_t width : hidden_) {
        if (width == 0) throw ConfigError("mlp.hidden: layer widths must be positive");
        kernels_.push_back(he_uniform_kernel(1, 1, in, width, rng));
        biases_.push_back(Tensor::zeros({width}, true));
        in = width;
    }
    kernels_.push_back(he_uniform_kernel(1, 1, in, outputs, rng));
    biases_.push_back(Tensor::zeros({outputs}, true));
}

Tensor FingerprintMlp::forward(const Tensor& batch, Mode, std::mt19937_64&) {
    const std::size_t channels = 2 * frames_;
    Tensor h;
    if (batch.rank() == 2 && batch.dim(1) == channels) {
        h = ad::reshape(batch, {batch.dim(0), 1, 1, channels});
    } else if (batch.rank() == 4 && batch.dim(1) == 1 && batch.dim(2) == 1 && batch.dim(3) == channels) {
        h = batch;
    } else {
        throw ArgumentError("mlp forward: expected (N," + std::to_string(channels) + ") input, got " +
                            ad::shape_str(batch.shape()));
    }
    const std::size_t n = batch.dim(0);
    for (std::size_t l = 0; l < kernels_.size(); ++l) {
        h = ad::conv2d_valid(h, kernels_[l], biases_[l]);
        if (l + 1 < kernels_.size()) h = ad::relu(h);
    }
    return ad::reshape(h, {n, outputs_});
}

std::vector<Tensor> FingerprintMlp::parameters() const {
    std::vector<Tensor> p;
    for (std::size_t l = 0; l < kernels_.size(); ++l) {
        p.push_back(kernels_[l]);
        p.push_back(biases_[l]);
    }
    return p;
}

StateDict FingerprintMlp::state() const {
    StateDict d;
    for (std::size_t l = 0; l < kernels_.size(); ++l) {
        store(d, "dense" + std::to_string(l) + ".kernel", kernels_[l]);
        store(d, "dense" + std::to_string(l) + ".bias", biases_[l]);
    }
    return d;
}

void FingerprintMlp::load_state(const StateDict& state) {
    std::vector<Tensor> kernels, biases;
    std::vector<std::size_t> hidden;
    std::size_t in = 2 * frames_;
    for (std::size_t l = 0;; ++l) {
        const std::string prefix = "dense" + std::to_string(l);
        if (!state.count(prefix + ".kernel")) break;
        const StateRecord& k = state.at(prefix + ".kernel");
        if (k.shape.size() != 4 || k.shape[2] != in) throw DataError("model state: " + prefix + " input width mismatch");
        kernels.push_back(Tensor::from(k.shape, k.data, true));
        biases.push_back(Tensor::zeros({k.shape[3]}, true));
        restore(state, prefix + ".bias", biases.back());
        in = k.shape[3];
        hidden.push_back(in);
    }
    if (kernels.empty() || in != outputs_) throw DataError("model state: MLP layers inconsistent with M");
    hidden.pop_back();
    kernels_ = std::move(kernels);
    biases_ = std::move(biases);
    hidden_ = std::move(hidden);
}

} // namespace mrf::nn
