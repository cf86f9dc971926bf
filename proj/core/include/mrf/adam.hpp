#pragma once

#include <vector>

#include "mrf/tensor.hpp"

namespace mrf::ad {

struct AdamConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// First/second moment estimates, one buffer per parameter, plus the step count.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::size_t step = 0;
};

// One bias-corrected Adam update of every parameter from its current gradient.
// Parameters without an accumulated gradient are treated as having zero gradient.
void adam_step(std::vector<Tensor>& params, AdamState& state, const AdamConfig& cfg);

} // namespace mrf::ad
