#pragma once

// Uniform tensor grid on the fixed rectangle Q = [Ls, L1] x [-1, 1], scalar
// fields on it, second-order differencing, cumulative quadrature, and the 1D/2D
// interpolation used by the characteristic tracer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "shocknozzle/errors.hpp"

namespace shocknozzle {

struct GridQ {
    int n1 = 0, n2 = 0;
    double y1_min = 0.0, y1_max = 1.0; // [Ls, L1]
    double h1 = 0.0, h2 = 0.0;

    GridQ() = default;
    GridQ(int n1_, int n2_, double Ls, double L1) : n1(n1_), n2(n2_), y1_min(Ls), y1_max(L1) {
        if (n1 < 9 || n2 < 9)
            throw ValidationError("grid: need at least 9 nodes per direction, got " +
                                  std::to_string(n1) + "x" + std::to_string(n2));
        if (!(L1 > Ls)) throw ValidationError("grid: empty y1 range");
        h1 = (y1_max - y1_min) / (n1 - 1);
        h2 = 2.0 / (n2 - 1);
    }

    double y1(int i) const { return (i == n1 - 1) ? y1_max : y1_min + i * h1; }
    double y2(int j) const { return (j == n2 - 1) ? 1.0 : -1.0 + j * h2; }
    std::size_t size() const { return static_cast<std::size_t>(n1) * n2; }
};

class Field {
public:
    Field() = default;
    Field(int n1, int n2, double value = 0.0)
        : n1_(n1), n2_(n2), data_(static_cast<std::size_t>(n1) * n2, value) {}
    explicit Field(const GridQ& g, double value = 0.0) : Field(g.n1, g.n2, value) {}

    double& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * n2_ + j]; }
    double operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * n2_ + j]; }

    int n1() const { return n1_; }
    int n2() const { return n2_; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    std::vector<double> row(int i) const {
        return {data_.begin() + static_cast<std::size_t>(i) * n2_,
                data_.begin() + static_cast<std::size_t>(i + 1) * n2_};
    }

private:
    int n1_ = 0, n2_ = 0;
    std::vector<double> data_;
};

// ---- second-order differencing -------------------------------------------

// d/ds of uniformly sampled values: central inside, one-sided three-point at ends.
inline std::vector<double> deriv_samples(const std::vector<double>& v, double h) {
    const std::size_t n = v.size();
    std::vector<double> d(n, 0.0);
    if (n < 3) throw ValidationError("deriv_samples: need at least 3 samples");
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (v[k + 1] - v[k - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    return d;
}

// One-sided three-point derivative at the first/last sample only.
inline double end_deriv(const std::vector<double>& v, double h, bool at_last) {
    const std::size_t n = v.size();
    if (at_last) return (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    return (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
}

// One-sided second derivative (three-point, first order is enough for O(h^2) checks
// of quantities that vanish at the wall; use the 4-point variant for second order).
inline double end_second_deriv(const std::vector<double>& v, double h, bool at_last) {
    const std::size_t n = v.size();
    if (at_last)
        return (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / (h * h);
    return (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h);
}

// One-sided third derivative, second-order accurate (five points).
inline double end_third_deriv(const std::vector<double>& v, double h, bool at_last) {
    const std::size_t n = v.size();
    if (n < 5) throw ValidationError("end_third_deriv: need at least 5 samples");
    if (at_last)
        return (5.0 * v[n - 1] - 18.0 * v[n - 2] + 24.0 * v[n - 3] - 14.0 * v[n - 4] +
                3.0 * v[n - 5]) / (2.0 * h * h * h);
    return (-5.0 * v[0] + 18.0 * v[1] - 24.0 * v[2] + 14.0 * v[3] - 3.0 * v[4]) /
           (2.0 * h * h * h);
}

// d/dy1 of a field (along i): central inside, third-order one-sided at the
// boundary rows. The boundary stencil matters: the residual evaluation divides
// boundary-value errors by h, so second-order one-sided ends would leave an
// O(h) residual on the adjacent row.
inline Field d_dy1(const Field& f, double h1) {
    const int n1 = f.n1(), n2 = f.n2();
    Field d(n1, n2);
    for (int j = 0; j < n2; ++j) {
        d(0, j) = (-11.0 * f(0, j) + 18.0 * f(1, j) - 9.0 * f(2, j) + 2.0 * f(3, j)) / (6.0 * h1);
        for (int i = 1; i + 1 < n1; ++i) d(i, j) = (f(i + 1, j) - f(i - 1, j)) / (2.0 * h1);
        d(n1 - 1, j) = (11.0 * f(n1 - 1, j) - 18.0 * f(n1 - 2, j) + 9.0 * f(n1 - 3, j) -
                        2.0 * f(n1 - 4, j)) / (6.0 * h1);
    }
    return d;
}

// d/dy2 of a field (along j), same stencil family.
inline Field d_dy2(const Field& f, double h2) {
    const int n1 = f.n1(), n2 = f.n2();
    Field d(n1, n2);
    for (int i = 0; i < n1; ++i) {
        d(i, 0) = (-11.0 * f(i, 0) + 18.0 * f(i, 1) - 9.0 * f(i, 2) + 2.0 * f(i, 3)) / (6.0 * h2);
        for (int j = 1; j + 1 < n2; ++j) d(i, j) = (f(i, j + 1) - f(i, j - 1)) / (2.0 * h2);
        d(i, n2 - 1) = (11.0 * f(i, n2 - 1) - 18.0 * f(i, n2 - 2) + 9.0 * f(i, n2 - 3) -
                        2.0 * f(i, n2 - 4)) / (6.0 * h2);
    }
    return d;
}

// ---- cumulative quadrature -------------------------------------------------

// Prefix integrals I[k] = int_{s0}^{s_k} v ds on a uniform grid by integrating
// the local cubic interpolant over each interval (fourth order, exact for
// cubics). The stencil shifts uniformly, so the quadrature error varies
// smoothly from node to node; Simpson-pair prefix rules alternate their error
// constant, which wrecks divided-difference checks of the result near the
// endpoints.
inline std::vector<double> cumulative_integral(const std::vector<double>& v, double h) {
    const std::size_t n = v.size();
    std::vector<double> I(n, 0.0);
    if (n < 4) throw ValidationError("cumulative_integral: need at least 4 samples");
    I[1] = h / 24.0 * (9.0 * v[0] + 19.0 * v[1] - 5.0 * v[2] + v[3]);
    for (std::size_t k = 2; k + 1 < n; ++k)
        I[k] = I[k - 1] +
               h / 24.0 * (-v[k - 2] + 13.0 * v[k - 1] + 13.0 * v[k] - v[k + 1]);
    I[n - 1] = I[n - 2] + h / 24.0 *
                              (v[n - 4] - 5.0 * v[n - 3] + 19.0 * v[n - 2] + 9.0 * v[n - 1]);
    return I;
}

// Row-wise prefix integral in y2: T(i, j) = int_{-1}^{y2_j} f(y1_i, t) dt.
inline Field cumulative_integral_y2(const Field& f, double h2) {
    const int n1 = f.n1(), n2 = f.n2();
    Field T(n1, n2);
    std::vector<double> rowv(n2);
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) rowv[j] = f(i, j);
        const std::vector<double> I = cumulative_integral(rowv, h2);
        for (int j = 0; j < n2; ++j) T(i, j) = I[j];
    }
    return T;
}

// ---- interpolation ----------------------------------------------------------

enum class Interp { Linear, Cubic };

// Piecewise Lagrange interpolation of uniform samples on [s0, s0+(n-1)h]:
// 2-point (linear) or 4-point (cubic, one-sided stencils at the end cells).
inline double interp_uniform(const std::vector<double>& v, double s0, double h, double s,
                             Interp kind) {
    const int n = static_cast<int>(v.size());
    const double t = (s - s0) / h;
    int cell = static_cast<int>(std::floor(t));
    cell = std::clamp(cell, 0, n - 2);
    if (kind == Interp::Linear || n < 4) {
        const double a = t - cell;
        return (1.0 - a) * v[cell] + a * v[cell + 1];
    }
    int base = std::clamp(cell - 1, 0, n - 4);
    const double x = t - base; // in units of h, nodes at 0,1,2,3
    const double w0 = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
    const double w1 = x * (x - 2.0) * (x - 3.0) / 2.0;
    const double w2 = -x * (x - 1.0) * (x - 3.0) / 2.0;
    const double w3 = x * (x - 1.0) * (x - 2.0) / 6.0;
    return w0 * v[base] + w1 * v[base + 1] + w2 * v[base + 2] + w3 * v[base + 3];
}

// Samples over y2 in [-1, 1].
inline double interp_y2(const std::vector<double>& v, double y2, Interp kind) {
    const int n = static_cast<int>(v.size());
    return interp_uniform(v, -1.0, 2.0 / (n - 1), std::clamp(y2, -1.0, 1.0), kind);
}

// Tensor-product interpolation of a field at (y1, y2) in grid coordinates.
class FieldInterpolator {
public:
    FieldInterpolator(const Field& f, const GridQ& g, Interp kind)
        : f_(&f), g_(&g), kind_(kind) {}

    double operator()(double y1, double y2) const {
        const GridQ& g = *g_;
        y1 = std::clamp(y1, g.y1_min, g.y1_max);
        y2 = std::clamp(y2, -1.0, 1.0);
        const double ti = (y1 - g.y1_min) / g.h1;
        const double tj = (y2 + 1.0) / g.h2;
        if (kind_ == Interp::Linear) {
            const int i = std::clamp(static_cast<int>(std::floor(ti)), 0, g.n1 - 2);
            const int j = std::clamp(static_cast<int>(std::floor(tj)), 0, g.n2 - 2);
            const double a = ti - i, b = tj - j;
            return (1.0 - a) * (1.0 - b) * (*f_)(i, j) + a * (1.0 - b) * (*f_)(i + 1, j) +
                   (1.0 - a) * b * (*f_)(i, j + 1) + a * b * (*f_)(i + 1, j + 1);
        }
        const int ci = std::clamp(static_cast<int>(std::floor(ti)) - 1, 0, g.n1 - 4);
        const int cj = std::clamp(static_cast<int>(std::floor(tj)) - 1, 0, g.n2 - 4);
        double wi[4], wj[4];
        cubic_weights(ti - ci, wi);
        cubic_weights(tj - cj, wj);
        double s = 0.0;
        for (int a = 0; a < 4; ++a) {
            double r = 0.0;
            for (int b = 0; b < 4; ++b) r += wj[b] * (*f_)(ci + a, cj + b);
            s += wi[a] * r;
        }
        return s;
    }

private:
    static void cubic_weights(double x, double w[4]) {
        w[0] = -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0;
        w[1] = x * (x - 2.0) * (x - 3.0) / 2.0;
        w[2] = -x * (x - 1.0) * (x - 3.0) / 2.0;
        w[3] = x * (x - 1.0) * (x - 2.0) / 6.0;
    }

    const Field* f_;
    const GridQ* g_;
    Interp kind_;
};

} // namespace shocknozzle
