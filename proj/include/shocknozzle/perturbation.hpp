#pragma once

// Perturbation unknowns of the 2D problem on the fixed rectangle Q, the exit
// pressure perturbation data, and the discrete analogue of the iteration-space
// wall compatibility conditions.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "shocknozzle/errors.hpp"
#include "shocknozzle/grid.hpp"

namespace shocknozzle {

// (v1, v2, v3) on Q, the shock displacement v4(y2), and its endpoint value.
struct PerturbationState {
    Field v1, v2, v3;
    std::vector<double> v4;
    double v4_minus1 = 0.0;

    static PerturbationState zero(const GridQ& g) {
        PerturbationState s;
        s.v1 = Field(g);
        s.v2 = Field(g);
        s.v3 = Field(g);
        s.v4.assign(g.n2, 0.0);
        s.v4_minus1 = 0.0;
        return s;
    }

    // Discrete max norm over the fields plus v4 and its first divided differences.
    double norm(double h2) const {
        double m = std::max({v1.max_abs(), v2.max_abs(), v3.max_abs()});
        for (double v : v4) m = std::max(m, std::abs(v));
        const std::vector<double> d = deriv_samples(v4, h2);
        for (double v : d) m = std::max(m, std::abs(v));
        return m;
    }

    double max_shock_displacement() const {
        double m = 0.0;
        for (double v : v4) m = std::max(m, std::abs(v));
        return m;
    }
};

inline PerturbationState state_difference(const PerturbationState& a,
                                          const PerturbationState& b) {
    PerturbationState d = a;
    for (std::size_t k = 0; k < d.v1.data().size(); ++k) {
        d.v1.data()[k] -= b.v1.data()[k];
        d.v2.data()[k] -= b.v2.data()[k];
        d.v3.data()[k] -= b.v3.data()[k];
    }
    for (std::size_t k = 0; k < d.v4.size(); ++k) d.v4[k] -= b.v4[k];
    d.v4_minus1 -= b.v4_minus1;
    return d;
}

// Exit pressure perturbation P(L1, y2) = Pe + eps * rho_exit * Pex_hat(y2).
struct ExitPerturbation {
    double epsilon = 0.0;
    std::vector<double> pex_hat; // sampled at the y2 nodes

    static ExitPerturbation zero(const GridQ& g) { return {0.0, std::vector<double>(g.n2, 0.0)}; }

    // Cosine family cos(k pi (y2+1)); every member has zero slope at the walls.
    static ExitPerturbation cosine(double eps, const GridQ& g, int mode = 1) {
        ExitPerturbation e;
        e.epsilon = eps;
        e.pex_hat.resize(g.n2);
        for (int j = 0; j < g.n2; ++j)
            e.pex_hat[j] = std::cos(mode * M_PI * (g.y2(j) + 1.0));
        return e;
    }

    void validate(const GridQ& g) const {
        if (static_cast<int>(pex_hat.size()) != g.n2)
            throw ValidationError("exit perturbation: samples must match the y2 grid");
        if (!(epsilon >= 0.0))
            throw ValidationError("exit perturbation: epsilon must be nonnegative");
        if (epsilon == 0.0) return;
        const std::vector<double> d = deriv_samples(pex_hat, g.h2);
        double dmax = 0.0, vmax = 0.0;
        for (double v : d) dmax = std::max(dmax, std::abs(v));
        for (double v : pex_hat) vmax = std::max(vmax, std::abs(v));
        const double tol = 0.05 * dmax + 1e-13 * std::max(1.0, vmax);
        if (std::abs(d.front()) > tol || std::abs(d.back()) > tol)
            throw ValidationError("exit perturbation: the exit pressure profile must have zero "
                                  "slope at the walls y2 = +-1");
        // Smoothness proxy: bounded second divided differences.
        for (int j = 1; j + 1 < g.n2; ++j) {
            const double dd =
                (pex_hat[j + 1] - 2.0 * pex_hat[j] + pex_hat[j - 1]) / (g.h2 * g.h2);
            if (std::abs(dd) > 1e4 * std::max(1.0, vmax))
                throw ValidationError("exit perturbation: profile second differences too large "
                                      "(node " + std::to_string(j) + ")");
        }
    }
};

// Wall traces of the discrete iteration-space conditions; every entry should be
// O(h^2) for admissible states.
struct CompatReport {
    double d2_v1_wall = 0.0;   // tangential derivative of v1 at the walls
    double d2_v3_wall = 0.0;   // tangential derivative of v3 at the walls
    double v2_wall = 0.0;      // wall-normal velocity
    double d22_v2_wall = 0.0;  // second tangential derivative of v2 at the walls
    double dv4_wall = 0.0;     // v4'(+-1)
    double d3v4_wall = 0.0;    // v4'''(+-1)

    double max() const {
        return std::max({d2_v1_wall, d2_v3_wall, v2_wall, d22_v2_wall, dv4_wall, d3v4_wall});
    }
};

inline CompatReport check_state_compatibility(const PerturbationState& s, const GridQ& g) {
    CompatReport r;
    std::vector<double> col(g.n2);
    auto wall_first_deriv = [&](const Field& f, int i) {
        for (int j = 0; j < g.n2; ++j) col[j] = f(i, j);
        return std::max(std::abs(end_deriv(col, g.h2, false)),
                        std::abs(end_deriv(col, g.h2, true)));
    };
    auto wall_second_deriv = [&](const Field& f, int i) {
        for (int j = 0; j < g.n2; ++j) col[j] = f(i, j);
        return std::max(std::abs(end_second_deriv(col, g.h2, false)),
                        std::abs(end_second_deriv(col, g.h2, true)));
    };
    for (int i = 0; i < g.n1; ++i) {
        r.d2_v1_wall = std::max(r.d2_v1_wall, wall_first_deriv(s.v1, i));
        r.d2_v3_wall = std::max(r.d2_v3_wall, wall_first_deriv(s.v3, i));
        r.v2_wall = std::max({r.v2_wall, std::abs(s.v2(i, 0)), std::abs(s.v2(i, g.n2 - 1))});
        r.d22_v2_wall = std::max(r.d22_v2_wall, wall_second_deriv(s.v2, i));
    }
    r.dv4_wall = std::max(std::abs(end_deriv(s.v4, g.h2, false)),
                          std::abs(end_deriv(s.v4, g.h2, true)));
    r.d3v4_wall = std::max(std::abs(end_third_deriv(s.v4, g.h2, false)),
                           std::abs(end_third_deriv(s.v4, g.h2, true)));
    return r;
}

} // namespace shocknozzle
