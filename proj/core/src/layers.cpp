#include "mrf/layers.hpp"

#include <Eigen/Core>
#include <cmath>

#include "mrf/error.hpp"

namespace mrf::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;
using CMapVec = Eigen::Map<const Eigen::VectorXd>;

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
    if (t.rank() != rank)
        throw ArgumentError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                            shape_str(t.shape()));
}

struct ConvGeometry {
    std::size_t n, h, w, c, kh, kw, o, ho, wo;
    std::size_t rows() const { return n * ho * wo; }
    std::size_t patch() const { return kh * kw * c; }
    // The im2col matrix equals the input reinterpreted row-major.
    bool direct() const { return (kh == 1 && kw == 1) || (kh == h && kw == w); }
};

void im2col(const ConvGeometry& g, const double* x, double* cols) {
    for (std::size_t n = 0; n < g.n; ++n)
        for (std::size_t y = 0; y < g.ho; ++y)
            for (std::size_t xo = 0; xo < g.wo; ++xo) {
                double* dst = cols + ((n * g.ho + y) * g.wo + xo) * g.patch();
                for (std::size_t dy = 0; dy < g.kh; ++dy) {
                    const double* src = x + ((n * g.h + y + dy) * g.w + xo) * g.c;
                    std::copy(src, src + g.kw * g.c, dst + dy * g.kw * g.c);
                }
            }
}

void col2im_add(const ConvGeometry& g, const double* cols, double* dx) {
    for (std::size_t n = 0; n < g.n; ++n)
        for (std::size_t y = 0; y < g.ho; ++y)
            for (std::size_t xo = 0; xo < g.wo; ++xo) {
                const double* src = cols + ((n * g.ho + y) * g.wo + xo) * g.patch();
                for (std::size_t dy = 0; dy < g.kh; ++dy) {
                    double* dst = dx + ((n * g.h + y + dy) * g.w + xo) * g.c;
                    const double* s = src + dy * g.kw * g.c;
                    for (std::size_t k = 0; k < g.kw * g.c; ++k) dst[k] += s[k];
                }
            }
}

} // namespace

Tensor conv2d_valid(const Tensor& x, const Tensor& kernel, const Tensor& bias) {
    require_rank(x, 4, "conv2d_valid");
    require_rank(kernel, 4, "conv2d_valid kernel");
    ConvGeometry g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), kernel.dim(0), kernel.dim(1), kernel.dim(3), 0, 0};
    if (kernel.dim(2) != g.c)
        throw ArgumentError("conv2d_valid: kernel expects " + std::to_string(kernel.dim(2)) + " input channels, got " +
                            std::to_string(g.c));
    if (g.kh > g.h || g.kw > g.w)
        throw ArgumentError("conv2d_valid: kernel " + shape_str(kernel.shape()) + " larger than input " +
                            shape_str(x.shape()));
    if (bias.numel() != g.o) throw ArgumentError("conv2d_valid: bias length mismatch");
    g.ho = g.h - g.kh + 1;
    g.wo = g.w - g.kw + 1;

    std::vector<double> cols;
    const double* col_ptr = x.values().data();
    if (!g.direct()) {
        cols.resize(g.rows() * g.patch());
        im2col(g, x.values().data(), cols.data());
        col_ptr = cols.data();
    }
    std::vector<double> out(g.rows() * g.o);
    {
        CMapMat a(col_ptr, static_cast<long>(g.rows()), static_cast<long>(g.patch()));
        CMapMat k(kernel.values().data(), static_cast<long>(g.patch()), static_cast<long>(g.o));
        MapMat y(out.data(), static_cast<long>(g.rows()), static_cast<long>(g.o));
        y.noalias() = a * k;
        y.rowwise() += CMapVec(bias.values().data(), static_cast<long>(g.o)).transpose();
    }

    auto bw = [g, cols = std::move(cols)](Node& self) {
        Node& xn = *self.parents[0];
        Node& kn = *self.parents[1];
        Node& bn = *self.parents[2];
        CMapMat dy(self.grad.data(), static_cast<long>(g.rows()), static_cast<long>(g.o));
        const double* col_ptr = g.direct() ? xn.value.data() : cols.data();
        CMapMat a(col_ptr, static_cast<long>(g.rows()), static_cast<long>(g.patch()));
        if (kn.requires_grad) {
            MapMat dk(kn.grad_buffer().data(), static_cast<long>(g.patch()), static_cast<long>(g.o));
            dk.noalias() += a.transpose() * dy;
        }
        if (bn.requires_grad) {
            // Plain row loop: Eigen's column reduction order depends on buffer alignment.
            auto& db = bn.grad_buffer();
            const double* d = self.grad.data();
            for (std::size_t r = 0; r < g.rows(); ++r)
                for (std::size_t k = 0; k < g.o; ++k) db[k] += d[r * g.o + k];
        }
        if (xn.requires_grad) {
            CMapMat k(kn.value.data(), static_cast<long>(g.patch()), static_cast<long>(g.o));
            if (g.direct()) {
                MapMat dx(xn.grad_buffer().data(), static_cast<long>(g.rows()), static_cast<long>(g.patch()));
                dx.noalias() += dy * k.transpose();
            } else {
                RowMat dcols = dy * k.transpose();
                col2im_add(g, dcols.data(), xn.grad_buffer().data());
            }
        }
    };
    return make_result({g.n, g.ho, g.wo, g.o}, std::move(out), {x, kernel, bias}, std::move(bw));
}

Tensor relu(const Tensor& x) {
    std::vector<double> out(x.values().begin(), x.values().end());
    for (double& v : out) v = v > 0.0 ? v : 0.0;
    auto bw = [](Node& self) {
        Node& xn = *self.parents[0];
        auto& dx = xn.grad_buffer();
        for (std::size_t i = 0; i < dx.size(); ++i)
            if (xn.value[i] > 0.0) dx[i] += self.grad[i];
    };
    return make_result(x.shape(), std::move(out), {x}, std::move(bw));
}

Tensor batch_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state, Mode mode) {
    if (x.rank() < 2) throw ArgumentError("batch_norm: input needs a channel axis");
    const std::size_t c = x.shape().back();
    const std::size_t p = x.numel() / c;
    if (gamma.numel() != c || beta.numel() != c || state.running_mean.size() != c || state.running_var.size() != c)
        throw ArgumentError("batch_norm: parameter length mismatch");
    if (mode == Mode::Train && p < 2)
        throw ArgumentError("batch_norm: train mode needs at least two values per channel");

    const double* xv = x.values().data();
    std::vector<double> mean(c, 0.0), inv_std(c, 0.0);
    if (mode == Mode::Train) {
        std::vector<double> var(c, 0.0);
        for (std::size_t r = 0; r < p; ++r)
            for (std::size_t k = 0; k < c; ++k) mean[k] += xv[r * c + k];
        for (double& m : mean) m /= static_cast<double>(p);
        for (std::size_t r = 0; r < p; ++r)
            for (std::size_t k = 0; k < c; ++k) {
                const double d = xv[r * c + k] - mean[k];
                var[k] += d * d;
            }
        const double unbias = static_cast<double>(p) / static_cast<double>(p - 1);
        for (std::size_t k = 0; k < c; ++k) {
            var[k] /= static_cast<double>(p);
            inv_std[k] = 1.0 / std::sqrt(var[k] + state.eps);
            state.running_mean[k] = state.momentum * state.running_mean[k] + (1.0 - state.momentum) * mean[k];
            state.running_var[k] = state.momentum * state.running_var[k] + (1.0 - state.momentum) * var[k] * unbias;
        }
    } else {
        for (std::size_t k = 0; k < c; ++k) {
            mean[k] = state.running_mean[k];
            inv_std[k] = 1.0 / std::sqrt(state.running_var[k] + state.eps);
        }
    }

    const double* gv = gamma.values().data();
    const double* bv = beta.values().data();
    std::vector<double> xhat(p * c), out(p * c);
    for (std::size_t r = 0; r < p; ++r)
        for (std::size_t k = 0; k < c; ++k) {
            const double h = (xv[r * c + k] - mean[k]) * inv_std[k];
            xhat[r * c + k] = h;
            out[r * c + k] = h * gv[k] + bv[k];
        }

    const bool train = mode == Mode::Train;
    auto bw = [p, c, train, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
        Node& xn = *self.parents[0];
        Node& gn = *self.parents[1];
        Node& bn = *self.parents[2];
        const double* dy = self.grad.data();
        std::vector<double> sum_dy(c, 0.0), sum_dy_xhat(c, 0.0);
        for (std::size_t r = 0; r < p; ++r)
            for (std::size_t k = 0; k < c; ++k) {
                sum_dy[k] += dy[r * c + k];
                sum_dy_xhat[k] += dy[r * c + k] * xhat[r * c + k];
            }
        if (gn.requires_grad) {
            auto& dg = gn.grad_buffer();
            for (std::size_t k = 0; k < c; ++k) dg[k] += sum_dy_xhat[k];
        }
        if (bn.requires_grad) {
            auto& db = bn.grad_buffer();
            for (std::size_t k = 0; k < c; ++k) db[k] += sum_dy[k];
        }
        if (xn.requires_grad) {
            std::vector<double> scale(c), mean_dy(c, 0.0), mean_dy_xhat(c, 0.0);
            for (std::size_t k = 0; k < c; ++k) {
                scale[k] = gn.value[k] * inv_std[k];
                if (train) {
                    mean_dy[k] = sum_dy[k] / static_cast<double>(p);
                    mean_dy_xhat[k] = sum_dy_xhat[k] / static_cast<double>(p);
                }
            }
            auto& dx = xn.grad_buffer();
            for (std::size_t r = 0; r < p; ++r)
                for (std::size_t k = 0; k < c; ++k) {
                    const std::size_t i = r * c + k;
                    dx[i] += (dy[i] - mean_dy[k] - xhat[i] * mean_dy_xhat[k]) * scale[k];
                }
        }
    };
    return make_result(x.shape(), std::move(out), {x, gamma, beta}, std::move(bw));
}

Tensor dropout(const Tensor& x, double rate, Mode mode, std::mt19937_64& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("dropout: rate must lie in [0, 1)");
    if (mode == Mode::Eval || rate == 0.0) {
        std::vector<double> out(x.values().begin(), x.values().end());
        auto bw = [](Node& self) {
            auto& dx = self.parents[0]->grad_buffer();
            for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[i];
        };
        return make_result(x.shape(), std::move(out), {x}, std::move(bw));
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    // Each 64-bit draw yields two 32-bit uniforms; an element is dropped when its uniform falls below rate.
    const auto threshold = static_cast<std::uint64_t>(std::ldexp(rate, 32));
    std::vector<double> mask(x.numel());
    for (std::size_t i = 0; i < mask.size(); i += 2) {
        const std::uint64_t r = rng();
        mask[i] = (r & 0xffffffffULL) < threshold ? 0.0 : keep_scale;
        if (i + 1 < mask.size()) mask[i + 1] = (r >> 32) < threshold ? 0.0 : keep_scale;
    }
    std::vector<double> out(x.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.values()[i] * mask[i];
    auto bw = [mask = std::move(mask)](Node& self) {
        auto& dx = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[i] * mask[i];
    };
    return make_result(x.shape(), std::move(out), {x}, std::move(bw));
}

Tensor slice_spatial(const Tensor& x, std::size_t row, std::size_t col, std::size_t h, std::size_t w) {
    require_rank(x, 4, "slice_spatial");
    const std::size_t n = x.dim(0), xh = x.dim(1), xw = x.dim(2), c = x.dim(3);
    if (row + h > xh || col + w > xw) throw ArgumentError("slice_spatial: window exceeds input");
    std::vector<double> out(n * h * w * c);
    auto offset_in = [=](std::size_t i, std::size_t r, std::size_t q) { return ((i * xh + row + r) * xw + col + q) * c; };
    auto offset_out = [=](std::size_t i, std::size_t r, std::size_t q) { return ((i * h + r) * w + q) * c; };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < h; ++r)
            for (std::size_t q = 0; q < w; ++q)
                std::copy_n(x.values().data() + offset_in(i, r, q), c, out.data() + offset_out(i, r, q));
    auto bw = [=](Node& self) {
        auto& dx = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t r = 0; r < h; ++r)
                for (std::size_t q = 0; q < w; ++q) {
                    const double* s = self.grad.data() + offset_out(i, r, q);
                    double* d = dx.data() + offset_in(i, r, q);
                    for (std::size_t k = 0; k < c; ++k) d[k] += s[k];
                }
    };
    return make_result({n, h, w, c}, std::move(out), {x}, std::move(bw));
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    require_rank(a, 4, "concat_channels");
    require_rank(b, 4, "concat_channels");
    for (std::size_t i = 0; i < 3; ++i)
        if (a.dim(i) != b.dim(i)) throw ArgumentError("concat_channels: leading dimensions differ");
    const std::size_t ca = a.dim(3), cb = b.dim(3), rows = a.numel() / ca;
    std::vector<double> out(rows * (ca + cb));
    for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(a.values().data() + r * ca, ca, out.data() + r * (ca + cb));
        std::copy_n(b.values().data() + r * cb, cb, out.data() + r * (ca + cb) + ca);
    }
    auto bw = [rows, ca, cb](Node& self) {
        Node& an = *self.parents[0];
        Node& bn = *self.parents[1];
        for (std::size_t r = 0; r < rows; ++r) {
            const double* s = self.grad.data() + r * (ca + cb);
            if (an.requires_grad) {
                double* d = an.grad_buffer().data() + r * ca;
                for (std::size_t k = 0; k < ca; ++k) d[k] += s[k];
            }
            if (bn.requires_grad) {
                double* d = bn.grad_buffer().data() + r * cb;
                for (std::size_t k = 0; k < cb; ++k) d[k] += s[ca + k];
            }
        }
    };
    return make_result({a.dim(0), a.dim(1), a.dim(2), ca + cb}, std::move(out), {a, b}, std::move(bw));
}

Tensor reshape(const Tensor& x, Shape shape) {
    if (shape_numel(shape) != x.numel())
        throw ArgumentError("reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape));
    std::vector<double> out(x.values().begin(), x.values().end());
    auto bw = [](Node& self) {
        auto& dx = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad[i];
    };
    return make_result(std::move(shape), std::move(out), {x}, std::move(bw));
}

Tensor multiply(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw ArgumentError("multiply: shapes differ");
    std::vector<double> out(a.numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
    auto bw = [](Node& self) {
        Node& an = *self.parents[0];
        Node& bn = *self.parents[1];
        if (an.requires_grad) {
            auto& d = an.grad_buffer();
            for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i] * bn.value[i];
        }
        if (bn.requires_grad) {
            auto& d = bn.grad_buffer();
            for (std::size_t i = 0; i < d.size(); ++i) d[i] += self.grad[i] * an.value[i];
        }
    };
    return make_result(a.shape(), std::move(out), {a, b}, std::move(bw));
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    if (pred.shape() != target.shape())
        throw ArgumentError("mse_loss: " + shape_str(pred.shape()) + " vs " + shape_str(target.shape()));
    const std::size_t n = pred.numel();
    if (n == 0) throw ArgumentError("mse_loss: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pred.values()[i] - target.values()[i];
        acc += d * d;
    }
    std::vector<double> tv(target.values().begin(), target.values().end());
    auto bw = [n, tv = std::move(tv)](Node& self) {
        Node& pn = *self.parents[0];
        auto& dp = pn.grad_buffer();
        const double scale = 2.0 * self.grad[0] / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) dp[i] += scale * (pn.value[i] - tv[i]);
    };
    return make_result({}, {acc / static_cast<double>(n)}, {pred}, std::move(bw));
}

} // namespace mrf::ad
