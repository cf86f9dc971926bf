#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "mrf/layers.hpp"
#include "mrf/preprocess.hpp"

namespace mrf::nn {

using ad::Mode;
using ad::Tensor;

// Named array used for persistence (parameters, running statistics, metadata).
struct StateRecord {
    ad::Shape shape;
    std::vector<double> data;
};
using StateDict = std::map<std::string, StateRecord>;

// A learned mapping from (N, p, p, 2T) fingerprint patches to (N, M) normalized map values.
class Regressor {
public:
    virtual ~Regressor() = default;

    virtual std::string kind() const = 0;
    virtual std::size_t patch_size() const = 0;
    std::size_t frames() const { return frames_; }
    std::size_t outputs() const { return outputs_; }

    virtual Tensor forward(const Tensor& batch, Mode mode, std::mt19937_64& rng) = 0;
    // Trainable tensors in a fixed order.
    virtual std::vector<Tensor> parameters() const = 0;

    virtual StateDict state() const = 0;
    virtual void load_state(const StateDict& state) = 0;

    prep::NormStats norm_stats;

protected:
    Regressor(std::size_t frames, std::size_t outputs) : frames_(frames), outputs_(outputs) {}

    std::size_t frames_;
    std::size_t outputs_;
};

// He-uniform (fan-in) initialized kernel of shape (kh, kw, c_in, c_out).
Tensor he_uniform_kernel(std::size_t kh, std::size_t kw, std::size_t c_in, std::size_t c_out, std::mt19937_64& rng);

// Copies a tensor's values out of / into a state dictionary, checking shapes.
void store(StateDict& dict, const std::string& name, const Tensor& t);
void restore(const StateDict& dict, const std::string& name, Tensor& t);
const StateRecord& lookup(const StateDict& dict, const std::string& name);

} // namespace mrf::nn
