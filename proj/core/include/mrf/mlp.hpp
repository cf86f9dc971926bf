#pragma once

#include "mrf/regressor.hpp"

namespace mrf::nn {

// Fingerprint-wise fully-connected ReLU regressor: consumes only the centre
// fingerprint, (N, 1, 1, 2T) or (N, 2T), and returns (N, M). Dense layers are
// 1x1 convolutions on a 1x1 spatial grid.
class FingerprintMlp : public Regressor {
public:
    FingerprintMlp(std::size_t frames, std::size_t outputs, std::vector<std::size_t> hidden, std::uint64_t seed);

    std::string kind() const override { return "mlp"; }
    std::size_t patch_size() const override { return 1; }
    const std::vector<std::size_t>& hidden() const { return hidden_; }

    Tensor forward(const Tensor& batch, Mode mode, std::mt19937_64& rng) override;
    std::vector<Tensor> parameters() const override;
    StateDict state() const override;
    void load_state(const StateDict& state) override;

private:
    std::vector<std::size_t> hidden_;
    std::vector<Tensor> kernels_;
    std::vector<Tensor> biases_;
};

} // namespace mrf::nn
