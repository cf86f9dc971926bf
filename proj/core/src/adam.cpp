#include "mrf/adam.hpp"

#include <cmath>

#include "mrf/error.hpp"

namespace mrf::ad {

void adam_step(std::vector<Tensor>& params, AdamState& state, const AdamConfig& cfg) {
    if (state.m.empty()) {
        for (const Tensor& p : params) {
            state.m.emplace_back(p.numel(), 0.0);
            state.v.emplace_back(p.numel(), 0.0);
        }
    }
    if (state.m.size() != params.size()) throw UsageError("adam_step: state tracks a different parameter list");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor& p = params[k];
        auto values = p.values();
        const bool has_grad = p.has_grad();
        const auto grad = has_grad ? p.grad() : std::span<const double>{};
        auto& m = state.m[k];
        auto& v = state.v[k];
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double g = has_grad ? grad[i] : 0.0;
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            values[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
}

} // namespace mrf::ad
