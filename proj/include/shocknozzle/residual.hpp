#pragma once

// Full nonlinear residual verification of a computed perturbation state: the
// three transformed field equations in the interior, the exact jump conditions
// at the shock foot, and the exit/wall boundary conditions. Background
// derivatives enter analytically; only perturbation fields are differenced.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "shocknozzle/background.hpp"
#include "shocknozzle/coefficients.hpp"
#include "shocknozzle/errors.hpp"
#include "shocknozzle/gas.hpp"
#include "shocknozzle/grid.hpp"
#include "shocknozzle/iteration.hpp"
#include "shocknozzle/perturbation.hpp"

namespace shocknozzle {

struct ResidualReport {
    // Interior equations, max over interior nodes.
    double eq_density = 0.0;
    double eq_curl = 0.0;
    double eq_bernoulli = 0.0;
    // Shock foot, max over y2 nodes: slope-eliminated jump relations and the
    // consistency of the discrete shock slope with the jump brackets.
    double rh_mass = 0.0;
    double rh_momentum = 0.0;
    double shock_slope = 0.0;
    bool entropy_ok = true;
    double min_pressure_jump = 0.0;
    // Boundary conditions.
    double exit_pressure = 0.0;
    double wall_normal_velocity = 0.0;

    double max_interior() const { return std::max({eq_density, eq_curl, eq_bernoulli}); }
};

inline ResidualReport nonlinear_residual(const PerturbationState& state,
                                         const BackgroundSolution& bg,
                                         const LinearCoefficients& co,
                                         const ExitPerturbation& exit, const GridQ& grid) {
    const GasModel& gas = bg.setup.gas;
    const int n1 = grid.n1, n2 = grid.n2;
    const double bplus = bg.bernoulli_plus;
    const StateDerivatives d(state, grid);

    ResidualReport rep;
    for (int i = 1; i + 1 < n1; ++i)
        for (int j = 1; j + 1 < n2; ++j) {
            const TransformedEquations eq =
                detail::transformed_equations_at(state, d, co, bg, grid, bplus, i, j);
            rep.eq_density = std::max(rep.eq_density, std::abs(eq.eq1));
            rep.eq_curl = std::max(rep.eq_curl, std::abs(eq.eq2));
            rep.eq_bernoulli = std::max(rep.eq_bernoulli, std::abs(eq.eq3));
        }

    // Shock foot: reconstruct the downstream state and test the jump relations
    // with the slope eliminated through xi' = [rho u1 u2]/[rho u2^2 + P].
    rep.min_pressure_jump = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n2; ++j) {
        const double xi = bg.Ls + state.v4[j];
        const FlowState up = bg.supersonic_trace.state_at(xi);
        const double phi_foot = bg.setup.force.potential(xi);
        const double u1 = co.u.front() + state.v1(0, j);
        const double u2 = state.v2(0, j);
        const double B = bplus + state.v3(0, j);
        const double rho = density_from_bernoulli(gas, B, phi_foot, u1 * u1 + u2 * u2);
        const double Pp = gas.pressure(rho), Pm = gas.pressure(up.rho);
        const double m1 = rho * u1 - up.rho * up.u1;
        const double m2 = rho * u2;
        const double m3 = rho * u1 * u2;
        const double m4 = rho * u2 * u2 + Pp - Pm;
        const double m5 = rho * u1 * u1 + Pp - up.rho * up.u1 * up.u1 - Pm;
        const double slope = m3 / m4;
        rep.rh_mass = std::max(rep.rh_mass, std::abs(m1 - slope * m2));
        rep.rh_momentum = std::max(rep.rh_momentum, std::abs(m5 - slope * m3));
        rep.shock_slope = std::max(rep.shock_slope, std::abs(d.dv4[j] - slope));
        rep.min_pressure_jump = std::min(rep.min_pressure_jump, Pp - Pm);
        if (!(Pp > Pm)) rep.entropy_ok = false;
    }

    // Exit pressure against its perturbed target value.
    const double phi_exit = bg.setup.force.potential(co.L1);
    const double rho_exit = co.rho.back();
    for (int j = 0; j < n2; ++j) {
        const double u1 = co.u.back() + state.v1(n1 - 1, j);
        const double u2 = state.v2(n1 - 1, j);
        const double B = bplus + state.v3(n1 - 1, j);
        const double rho = density_from_bernoulli(gas, B, phi_exit, u1 * u1 + u2 * u2);
        const double target = bg.exit_pressure + exit.epsilon * rho_exit * exit.pex_hat[j];
        rep.exit_pressure = std::max(rep.exit_pressure, std::abs(gas.pressure(rho) - target));
    }

    for (int i = 0; i < n1; ++i)
        rep.wall_normal_velocity = std::max(
            {rep.wall_normal_velocity, std::abs(state.v2(i, 0)), std::abs(state.v2(i, n2 - 1))});
    return rep;
}

} // namespace shocknozzle
