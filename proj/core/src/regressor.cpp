#include "mrf/regressor.hpp"

#include <algorithm>
#include <cmath>

#include "mrf/error.hpp"

namespace mrf::nn {

Tensor he_uniform_kernel(std::size_t kh, std::size_t kw, std::size_t c_in, std::size_t c_out, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(kh * kw * c_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    std::vector<double> w(kh * kw * c_in * c_out);
    for (double& v : w) v = dist(rng);
    return Tensor::from({kh, kw, c_in, c_out}, std::move(w), true);
}

void store(StateDict& dict, const std::string& name, const Tensor& t) {
    dict[name] = {t.shape(), {t.values().begin(), t.values().end()}};
}

const StateRecord& lookup(const StateDict& dict, const std::string& name) {
    const auto it = dict.find(name);
    if (it == dict.end()) throw DataError("model state: missing record '" + name + "'");
    return it->second;
}

void restore(const StateDict& dict, const std::string& name, Tensor& t) {
    const StateRecord& r = lookup(dict, name);
    if (r.shape != t.shape())
        throw DataError("model state: record '" + name + "' has shape " + ad::shape_str(r.shape) + ", expected " +
                        ad::shape_str(t.shape()));
    std::copy(r.data.begin(), r.data.end(), t.values().begin());
}

} // namespace mrf::nn
