#pragma once

#include <random>
#include <vector>

#include "mrf/tensor.hpp"

namespace mrf::ad {

enum class Mode { Train, Eval };

// Valid padding, stride one. x: (N, H, W, C_in), kernel: (kh, kw, C_in, C_out),
// bias: (C_out). Output (N, H - kh + 1, W - kw + 1, C_out).
Tensor conv2d_valid(const Tensor& x, const Tensor& kernel, const Tensor& bias);

// Gradient at exactly zero is taken as zero.
Tensor relu(const Tensor& x);

struct BatchNormState {
    std::vector<double> running_mean;
    std::vector<double> running_var;
    double momentum = 0.9;
    double eps = 1e-5;

    explicit BatchNormState(std::size_t channels = 0)
        : running_mean(channels, 0.0), running_var(channels, 1.0) {}
};

// Per-channel normalization over (N, H, W). Train mode uses batch statistics
// and updates the running averages (unbiased variance); eval uses running stats.
Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state, Mode mode);

// Inverted dropout; identity in eval mode or for rate 0.
Tensor dropout(const Tensor& x, double rate, Mode mode, std::mt19937_64& rng);

// x: (N, H, W, C) -> (N, h, w, C) starting at (row, col).
Tensor slice_spatial(const Tensor& x, std::size_t row, std::size_t col, std::size_t h, std::size_t w);

// Concatenates (N, H, W, Ca) and (N, H, W, Cb) along channels.
Tensor concat_channels(const Tensor& a, const Tensor& b);

Tensor reshape(const Tensor& x, Shape shape);

// Elementwise a * b for equal shapes.
Tensor multiply(const Tensor& a, const Tensor& b);

// Mean of squared differences over all entries; target receives no gradient.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

} // namespace mrf::ad
