#pragma once

// Pull-back of a computational-domain solution to the physical nozzle: each
// grid node (y1, y2) maps to x1 = y1 + (L1 - y1)(xi(y2) - Ls)/(L1 - Ls), and the
// primitive fields (u1, u2, rho, P, B) are reconstructed there.

#include <cmath>
#include <string>
#include <vector>

#include "shocknozzle/background.hpp"
#include "shocknozzle/coefficients.hpp"
#include "shocknozzle/gas.hpp"
#include "shocknozzle/grid.hpp"
#include "shocknozzle/perturbation.hpp"

namespace shocknozzle {

struct PhysicalFields {
    Field x1;                     // mapped abscissa per node; x2 = y2
    Field u1, u2, rho, P, B;
    std::vector<double> xi;       // shock curve xi(y2) = Ls + v4(y2)
};

inline double map_to_physical(double y1, double xi, double Ls, double L1) {
    return y1 + (L1 - y1) * (xi - Ls) / (L1 - Ls);
}

inline double map_to_computational(double x1, double xi, double Ls, double L1) {
    return (x1 - xi) / (L1 - xi) * (L1 - Ls) + Ls;
}

inline PhysicalFields to_physical(const PerturbationState& state, const BackgroundSolution& bg,
                                  const LinearCoefficients& co, const GridQ& grid) {
    const GasModel& gas = bg.setup.gas;
    const double Ls = bg.Ls, L1 = bg.setup.L1;
    PhysicalFields out;
    out.x1 = Field(grid);
    out.u1 = Field(grid);
    out.u2 = Field(grid);
    out.rho = Field(grid);
    out.P = Field(grid);
    out.B = Field(grid);
    out.xi.resize(grid.n2);
    for (int j = 0; j < grid.n2; ++j) {
        out.xi[j] = Ls + state.v4[j];
        if (!(out.xi[j] > bg.setup.L0 && out.xi[j] < L1))
            throw SolverError("physical map: shock curve leaves the nozzle at y2 = " +
                              std::to_string(grid.y2(j)));
    }
    for (int i = 0; i < grid.n1; ++i)
        for (int j = 0; j < grid.n2; ++j) {
            const double x1 = map_to_physical(grid.y1(i), out.xi[j], Ls, L1);
            const double u1 = co.u[i] + state.v1(i, j);
            const double u2 = state.v2(i, j);
            const double B = bg.bernoulli_plus + state.v3(i, j);
            const double rho =
                density_from_bernoulli(gas, B, bg.setup.force.potential(x1), u1 * u1 + u2 * u2);
            out.x1(i, j) = x1;
            out.u1(i, j) = u1;
            out.u2(i, j) = u2;
            out.rho(i, j) = rho;
            out.P(i, j) = gas.pressure(rho);
            out.B(i, j) = B;
        }
    return out;
}

} // namespace shocknozzle
