#pragma once

#include "mrf/regressor.hpp"

namespace mrf::nn {

// conv (valid, stride 1) -> dropout -> batch norm -> ReLU
struct ConvBlock {
    Tensor kernel;
    Tensor bias;
    Tensor gamma;
    Tensor beta;
    ad::BatchNormState bn;
    double dropout_rate = 0.2;

    ConvBlock() = default;
    ConvBlock(std::size_t kh, std::size_t kw, std::size_t c_in, std::size_t c_out, double dropout_rate,
              std::mt19937_64& rng);

    std::size_t in_channels() const { return kernel.dim(2); }
    std::size_t out_channels() const { return kernel.dim(3); }

    Tensor forward(const Tensor& x, Mode mode, std::mt19937_64& rng);
    void append_parameters(std::vector<Tensor>& params) const;
    void save(StateDict& dict, const std::string& prefix) const;
    void load(const StateDict& dict, const std::string& prefix);
};

struct CnnWidths {
    std::size_t reduce1 = 512;
    std::size_t reduce2 = 256;
    std::size_t branch5 = 128;
    std::size_t branch3 = 128;
};

// Spatiotemporal CNN on 5x5 patches:
//   (N,5,5,2T) -> 1x1 block -> 1x1 block -> { 5x5 block | centre 3x3 slice -> 3x3 block }
//   -> channel concat -> linear 1x1 head -> (N, M)
class SpatiotemporalCnn : public Regressor {
public:
    static constexpr std::size_t kPatch = 5;

    SpatiotemporalCnn(std::size_t frames, std::size_t outputs, const CnnWidths& widths, double dropout_rate,
                      std::uint64_t seed);

    std::string kind() const override { return "cnn"; }
    std::size_t patch_size() const override { return kPatch; }
    const CnnWidths& widths() const { return widths_; }

    Tensor forward(const Tensor& batch, Mode mode, std::mt19937_64& rng) override;
    std::vector<Tensor> parameters() const override;
    StateDict state() const override;
    void load_state(const StateDict& state) override;

    // Eval-mode prediction for every in-plane voxel of slice z of a temporally
    // normalized image, evaluating the 1x1 layers once per voxel on a
    // zero-padded slice. Equivalent to per-patch evaluation with zero-fill.
    // Returns (X * Y, M) normalized outputs in voxel order.
    std::vector<double> predict_slice(const MrfImage& image, std::size_t z, std::size_t strip_rows = 8);

    ConvBlock reduce1;
    ConvBlock reduce2;
    ConvBlock branch5;
    ConvBlock branch3;
    Tensor head_kernel;
    Tensor head_bias;

private:
    CnnWidths widths_;
};

} // namespace mrf::nn
