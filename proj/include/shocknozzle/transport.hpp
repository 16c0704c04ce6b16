#pragma once

// Linear transport of the Bernoulli perturbation by backward characteristic
// tracing: for every node of Q, integrate the characteristic ODE
//
//   dy2/ds = v2 (L1 - v4 - Ls) / [ (u_bar(s) + v1)(L1 - Ls) + v2 (s - L1) v4'(y2) ]
//
// from s = y1 down to s = Ls and record the foot ordinate beta(y). The walls
// are characteristics (v2 vanishes there), so wall rows are exact.

#include <cmath>
#include <string>
#include <vector>

#include "shocknozzle/errors.hpp"
#include "shocknozzle/grid.hpp"

namespace shocknozzle {

struct CharacteristicFoot {
    Field beta;           // foot ordinate of the characteristic through each node
    int clamp_events = 0; // interior clamps to [-1, 1] (walls excluded)
};

struct TraceOptions {
    Interp interp = Interp::Linear; // hat-field interpolation along characteristics
    double step_factor = 0.5;       // RK4 step = step_factor * h1
    double denom_guard_frac = 0.2;  // error when the denominator drops below this
                                    // fraction of its background value
};

// Hat-state data needed by the tracer; fields are sampled on `grid`.
struct HatFields {
    const Field* v1 = nullptr;
    const Field* v2 = nullptr;
    const std::vector<double>* v4 = nullptr;  // shock displacement samples on y2 nodes
    const std::vector<double>* dv4 = nullptr; // its sampled derivative
};

inline CharacteristicFoot trace_characteristics(const HatFields& hat,
                                                const std::vector<double>& u_bar_nodes,
                                                const GridQ& grid,
                                                const TraceOptions& opts = {}) {
    const double Ls = grid.y1_min, L1 = grid.y1_max;
    const double len = L1 - Ls;
    CharacteristicFoot foot;
    foot.beta = Field(grid);

    const FieldInterpolator v1i(*hat.v1, grid, opts.interp);
    const FieldInterpolator v2i(*hat.v2, grid, opts.interp);
    const Interp k1d = (opts.interp == Interp::Linear) ? Interp::Linear : Interp::Cubic;

    auto slope = [&](double s, double y2) {
        const double ub = interp_uniform(u_bar_nodes, Ls, grid.h1, s, Interp::Cubic);
        const double v1 = v1i(s, y2);
        const double v2 = v2i(s, y2);
        const double v4 = interp_y2(*hat.v4, y2, k1d);
        const double dv4 = interp_y2(*hat.dv4, y2, k1d);
        const double denom = (ub + v1) * len + v2 * (s - L1) * dv4;
        if (!(std::abs(denom) > opts.denom_guard_frac * ub * len))
            throw SolverError("characteristic degeneracy: transport denominator too small at "
                              "(y1, y2) = (" + std::to_string(s) + ", " + std::to_string(y2) + ")");
        return v2 * (L1 - v4 - Ls) / denom;
    };

    for (int i = 0; i < grid.n1; ++i) {
        for (int j = 0; j < grid.n2; ++j) {
            if (i == 0) {
                foot.beta(0, j) = grid.y2(j);
                continue;
            }
            if (j == 0 || j == grid.n2 - 1) {
                // walls are characteristics
                foot.beta(i, j) = grid.y2(j);
                continue;
            }
            const double y1 = grid.y1(i);
            const int nsteps = std::max(1, static_cast<int>(std::ceil(
                                               (y1 - Ls) / (opts.step_factor * grid.h1) - 1e-12)));
            const double h = -(y1 - Ls) / nsteps; // backward
            double s = y1;
            double y2 = grid.y2(j);
            for (int nstep = 0; nstep < nsteps; ++nstep) {
                const double w1 = slope(s, y2);
                const double w2 = slope(s + 0.5 * h, y2 + 0.5 * h * w1);
                const double w3 = slope(s + 0.5 * h, y2 + 0.5 * h * w2);
                const double send = (nstep + 1 == nsteps) ? Ls : s + h;
                const double w4 = slope(send, y2 + h * w3);
                y2 += h / 6.0 * (w1 + 2.0 * w2 + 2.0 * w3 + w4);
                s = send;
                if (y2 < -1.0 || y2 > 1.0) {
                    ++foot.clamp_events;
                    y2 = std::clamp(y2, -1.0, 1.0);
                }
            }
            foot.beta(i, j) = y2;
        }
    }
    return foot;
}

// v3(y) = b3 v4(beta(y)) + R3(beta(y)): constant along the traced characteristics
// with the shock-line initial data. Out-of-range feet are clamped and counted.
inline Field solve_bernoulli_transport(const std::vector<double>& v4,
                                       const CharacteristicFoot& foot, double b3,
                                       const std::vector<double>& r3, const GridQ& grid,
                                       Interp interp = Interp::Cubic,
                                       int* clamp_warnings = nullptr) {
    if (static_cast<int>(v4.size()) != grid.n2 || static_cast<int>(r3.size()) != grid.n2)
        throw ValidationError("transport: v4 and R3 must be sampled at the y2 nodes");
    Field v3(grid);
    int clamps = 0;
    for (int i = 0; i < grid.n1; ++i)
        for (int j = 0; j < grid.n2; ++j) {
            double b = foot.beta(i, j);
            if (b < -1.0 || b > 1.0) {
                ++clamps;
                b = std::clamp(b, -1.0, 1.0);
            }
            v3(i, j) = b3 * interp_y2(v4, b, interp) + interp_y2(r3, b, interp);
        }
    if (clamp_warnings) *clamp_warnings = clamps;
    return v3;
}

} // namespace shocknozzle
