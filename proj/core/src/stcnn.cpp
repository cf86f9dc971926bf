#include "mrf/stcnn.hpp"

#include <algorithm>

#include "mrf/error.hpp"

namespace mrf::nn {

ConvBlock::ConvBlock(std::size_t kh, std::size_t kw, std::size_t c_in, std::size_t c_out, double rate,
                     std::mt19937_64& rng)
    : kernel(he_uniform_kernel(kh, kw, c_in, c_out, rng)),
      bias(Tensor::zeros({c_out}, true)),
      gamma(Tensor::full({c_out}, 1.0, true)),
      beta(Tensor::zeros({c_out}, true)),
      bn(c_out),
      dropout_rate(rate) {}

Tensor ConvBlock::forward(const Tensor& x, Mode mode, std::mt19937_64& rng) {
    Tensor y = ad::conv2d_valid(x, kernel, bias);
    y = ad::dropout(y, dropout_rate, mode, rng);
    y = ad::batch_norm(y, gamma, beta, bn, mode);
    return ad::relu(y);
}

void ConvBlock::append_parameters(std::vector<Tensor>& params) const {
    params.insert(params.end(), {kernel, bias, gamma, beta});
}

void ConvBlock::save(StateDict& dict, const std::string& prefix) const {
    store(dict, prefix + ".kernel", kernel);
    store(dict, prefix + ".bias", bias);
    store(dict, prefix + ".bn_gamma", gamma);
    store(dict, prefix + ".bn_beta", beta);
    const std::size_t c = out_channels();
    dict[prefix + ".bn_running_mean"] = {{c}, bn.running_mean};
    dict[prefix + ".bn_running_var"] = {{c}, bn.running_var};
    dict[prefix + ".dropout_rate"] = {{1}, {dropout_rate}};
}

void ConvBlock::load(const StateDict& dict, const std::string& prefix) {
    const StateRecord& k = lookup(dict, prefix + ".kernel");
    if (k.shape.size() != 4) throw DataError("model state: " + prefix + ".kernel must be rank 4");
    kernel = Tensor::from(k.shape, k.data, true);
    const std::size_t c = k.shape[3];
    bias = Tensor::zeros({c}, true);
    gamma = Tensor::zeros({c}, true);
    beta = Tensor::zeros({c}, true);
    restore(dict, prefix + ".bias", bias);
    restore(dict, prefix + ".bn_gamma", gamma);
    restore(dict, prefix + ".bn_beta", beta);
    bn = ad::BatchNormState(c);
    const StateRecord& rm = lookup(dict, prefix + ".bn_running_mean");
    const StateRecord& rv = lookup(dict, prefix + ".bn_running_var");
    if (rm.data.size() != c || rv.data.size() != c) throw DataError("model state: running stats of " + prefix);
    bn.running_mean = rm.data;
    bn.running_var = rv.data;
    dropout_rate = lookup(dict, prefix + ".dropout_rate").data.at(0);
}

SpatiotemporalCnn::SpatiotemporalCnn(std::size_t frames, std::size_t outputs, const CnnWidths& widths,
                                     double dropout_rate, std::uint64_t seed)
    : Regressor(frames, outputs), widths_(widths) {
    if (frames == 0 || outputs == 0) throw ConfigError("model: T and M must be positive");
    if (!widths.reduce1 || !widths.reduce2 || !widths.branch5 || !widths.branch3)
        throw ConfigError("model.widths: channel counts must be positive");
    std::mt19937_64 rng(seed);
    reduce1 = ConvBlock(1, 1, 2 * frames, widths.reduce1, dropout_rate, rng);
    reduce2 = ConvBlock(1, 1, widths.reduce1, widths.reduce2, dropout_rate, rng);
    branch5 = ConvBlock(5, 5, widths.reduce2, widths.branch5, dropout_rate, rng);
    branch3 = ConvBlock(3, 3, widths.reduce2, widths.branch3, dropout_rate, rng);
    head_kernel = he_uniform_kernel(1, 1, widths.branch5 + widths.branch3, outputs, rng);
    head_bias = Tensor::zeros({outputs}, true);
}

Tensor SpatiotemporalCnn::forward(const Tensor& batch, Mode mode, std::mt19937_64& rng) {
    if (batch.rank() != 4 || batch.dim(1) != kPatch || batch.dim(2) != kPatch)
        throw ArgumentError("stcnn forward: expected (N,5,5,2T) input, got " + ad::shape_str(batch.shape()));
    if (batch.dim(3) != 2 * frames_)
        throw ArgumentError("stcnn forward: expected " + std::to_string(2 * frames_) + " channels, got " +
                            std::to_string(batch.dim(3)));
    const std::size_t n = batch.dim(0);
    Tensor h = reduce1.forward(batch, mode, rng);
    h = reduce2.forward(h, mode, rng);
    Tensor wide = branch5.forward(h, mode, rng);
    Tensor narrow = branch3.forward(ad::slice_spatial(h, 1, 1, 3, 3), mode, rng);
    Tensor out = ad::conv2d_valid(ad::concat_channels(wide, narrow), head_kernel, head_bias);
    return ad::reshape(out, {n, outputs_});
}

std::vector<Tensor> SpatiotemporalCnn::parameters() const {
    std::vector<Tensor> p;
    for (const ConvBlock* b : {&reduce1, &reduce2, &branch5, &branch3}) b->append_parameters(p);
    p.push_back(head_kernel);
    p.push_back(head_bias);
    return p;
}

StateDict SpatiotemporalCnn::state() const {
    StateDict d;
    reduce1.save(d, "reduce1");
    reduce2.save(d, "reduce2");
    branch5.save(d, "branch5");
    branch3.save(d, "branch3");
    store(d, "head.kernel", head_kernel);
    store(d, "head.bias", head_bias);
    return d;
}

void SpatiotemporalCnn::load_state(const StateDict& state) {
    reduce1.load(state, "reduce1");
    reduce2.load(state, "reduce2");
    branch5.load(state, "branch5");
    branch3.load(state, "branch3");
    const StateRecord& hk = lookup(state, "head.kernel");
    head_kernel = Tensor::from(hk.shape, hk.data, true);
    head_bias = Tensor::zeros({hk.shape.at(3)}, true);
    restore(state, "head.bias", head_bias);

    if (reduce1.in_channels() != 2 * frames_ || hk.shape.at(3) != outputs_ ||
        reduce2.in_channels() != reduce1.out_channels() || branch5.in_channels() != reduce2.out_channels() ||
        branch3.in_channels() != reduce2.out_channels() ||
        hk.shape.at(2) != branch5.out_channels() + branch3.out_channels() || branch5.kernel.dim(0) != 5 ||
        branch3.kernel.dim(0) != 3)
        throw DataError("model state: inconsistent channel chain for T=" + std::to_string(frames_));
    widths_ = {reduce1.out_channels(), reduce2.out_channels(), branch5.out_channels(), branch3.out_channels()};
}

std::vector<double> SpatiotemporalCnn::predict_slice(const MrfImage& image, std::size_t z, std::size_t strip_rows) {
    if (image.channels() != frames_)
        throw ArgumentError("stcnn: image has T=" + std::to_string(image.channels()) + ", model expects T=" +
                            std::to_string(frames_));
    const Dims d = image.dims();
    if (z >= d.z) throw ArgumentError("stcnn: slice index outside volume");
    strip_rows = std::max<std::size_t>(1, strip_rows);
    const std::size_t t = frames_;
    const std::size_t padded_w = d.y + 4;
    std::vector<double> out(d.x * d.y * outputs_);
    std::mt19937_64 unused_rng(0);
    ad::NoGradGuard no_grad;

    for (std::size_t x0 = 0; x0 < d.x; x0 += strip_rows) {
        const std::size_t rows = std::min(strip_rows, d.x - x0);
        const std::size_t padded_h = rows + 4;
        std::vector<double> input(padded_h * padded_w * 2 * t, 0.0);
        for (std::size_t r = 0; r < padded_h; ++r) {
            const long x = static_cast<long>(x0 + r) - 2;
            if (x < 0 || x >= static_cast<long>(d.x)) continue;
            for (std::size_t y = 0; y < d.y; ++y) {
                const auto fp = image.at(image.voxel_index(static_cast<std::size_t>(x), y, z));
                double* dst = input.data() + (r * padded_w + y + 2) * 2 * t;
                for (std::size_t c = 0; c < t; ++c) {
                    dst[c] = fp[c].real();
                    dst[t + c] = fp[c].imag();
                }
            }
        }
        Tensor x = Tensor::from({1, padded_h, padded_w, 2 * t}, std::move(input));
        Tensor h = reduce1.forward(x, Mode::Eval, unused_rng);
        h = reduce2.forward(h, Mode::Eval, unused_rng);
        Tensor wide = branch5.forward(h, Mode::Eval, unused_rng);
        Tensor narrow = branch3.forward(ad::slice_spatial(h, 1, 1, rows + 2, d.y + 2), Mode::Eval, unused_rng);
        Tensor y = ad::conv2d_valid(ad::concat_channels(wide, narrow), head_kernel, head_bias);
        // y: (1, rows, Y, M), same voxel order as the output slice.
        std::copy(y.values().begin(), y.values().end(), out.begin() + static_cast<long>(x0 * d.y * outputs_));
    }
    return out;
}

} // namespace mrf::nn
