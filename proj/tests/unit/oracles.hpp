#pragma once

// Straight-line reference implementations used to cross-check the library.
// They deliberately avoid the library's own helpers.

#include <array>
#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

// Full three-component Bloch state, rotation about x (positive angle tips
// +z towards +y), relaxation split into the TE and TR - TE intervals.
inline std::vector<std::complex<double>> bloch(double pd, double t1, double t2, const std::vector<double>& fa_deg,
                                               const std::vector<double>& tr, const std::vector<double>& te,
                                               bool inversion) {
    std::array<double, 3> m{0.0, 0.0, inversion ? -1.0 : 1.0};
    std::vector<std::complex<double>> out;
    const double pi = 3.14159265358979323846;
    auto relax = [&](double dt) {
        const double e2 = std::exp(-dt / t2), e1 = std::exp(-dt / t1);
        m[0] *= e2;
        m[1] *= e2;
        m[2] = m[2] * e1 + (1.0 - e1);
    };
    for (std::size_t i = 0; i < fa_deg.size(); ++i) {
        const double a = fa_deg[i] * pi / 180.0;
        const double rot[3][3] = {{1, 0, 0}, {0, std::cos(a), std::sin(a)}, {0, -std::sin(a), std::cos(a)}};
        std::array<double, 3> r{};
        for (int row = 0; row < 3; ++row)
            for (int col = 0; col < 3; ++col) r[row] += rot[row][col] * m[col];
        m = r;
        relax(te[i]);
        out.emplace_back(pd * m[1], 0.0);
        relax(tr[i] - te[i]);
    }
    return out;
}

// Linear-interpolation percentile on an explicitly sorted copy.
inline double percentile(std::vector<double> v, double pct) {
    for (std::size_t i = 1; i < v.size(); ++i)
        for (std::size_t j = i; j > 0 && v[j - 1] > v[j]; --j) std::swap(v[j - 1], v[j]);
    const double rank = pct / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = static_cast<std::size_t>(std::ceil(rank));
    return v[lo] + (rank - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Direct valid convolution, NHWC input and (kh, kw, cin, cout) kernel.
inline std::vector<double> conv(const std::vector<double>& x, std::size_t n, std::size_t h, std::size_t w,
                                std::size_t c, const std::vector<double>& k, std::size_t kh, std::size_t kw,
                                std::size_t o, const std::vector<double>& b) {
    const std::size_t ho = h - kh + 1, wo = w - kw + 1;
    std::vector<double> y(n * ho * wo * o);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t yy = 0; yy < ho; ++yy)
            for (std::size_t xx = 0; xx < wo; ++xx)
                for (std::size_t oc = 0; oc < o; ++oc) {
                    double s = b[oc];
                    for (std::size_t dy = 0; dy < kh; ++dy)
                        for (std::size_t dx = 0; dx < kw; ++dx)
                            for (std::size_t ic = 0; ic < c; ++ic)
                                s += x[((i * h + yy + dy) * w + xx + dx) * c + ic] *
                                     k[((dy * kw + dx) * c + ic) * o + oc];
                    y[((i * ho + yy) * wo + xx) * o + oc] = s;
                }
    return y;
}

} // namespace oracle
