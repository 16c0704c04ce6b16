#pragma once

// Outer fixed-point driver of the 2D shock problem. One sweep, starting from a
// frozen state V_hat:
//
//   1. assemble every remainder as an exact nonlinear defect at V_hat:
//      full transformed operator minus its linearization, boundary remainders
//      by solving the exact jump/exit relations at the perturbed foot;
//   2. build the data of the non-local elliptic potential problem, solve for
//      (phi, kappa), and reconstruct (v1, v2) with v4(-1) = b0 kappa;
//   3. update the shock displacement by quadrature of b0 v2(Ls,.) + F5;
//   4. update the Bernoulli perturbation along the traced characteristics.
//
// Iterate until the state increment drops below tol_fp.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "shocknozzle/background.hpp"
#include "shocknozzle/coefficients.hpp"
#include "shocknozzle/elliptic.hpp"
#include "shocknozzle/errors.hpp"
#include "shocknozzle/gas.hpp"
#include "shocknozzle/grid.hpp"
#include "shocknozzle/perturbation.hpp"
#include "shocknozzle/transport.hpp"

namespace shocknozzle {

struct RemainderBundle {
    std::vector<double> F5;     // shock-ODE defect at the y2 nodes
    std::vector<double> R5;     // its prefix integral
    std::vector<double> R6, R7; // combined boundary data remainders
    std::vector<double> r2, r3, r4; // exact jump/exit defects (r3 feeds the transport)
    Field F6;                   // transport defect field
    Field G1, G2;               // interior defect fields
};

// Discrete derivatives of a state, shared by the defect assembly and the
// nonlinear residual evaluation.
struct StateDerivatives {
    Field d1v1, d2v1, d1v2, d2v2, d1v3, d2v3;
    std::vector<double> dv4;

    StateDerivatives(const PerturbationState& s, const GridQ& g)
        : d1v1(d_dy1(s.v1, g.h1)), d2v1(d_dy2(s.v1, g.h2)), d1v2(d_dy1(s.v2, g.h1)),
          d2v2(d_dy2(s.v2, g.h2)), d1v3(d_dy1(s.v3, g.h1)), d2v3(d_dy2(s.v3, g.h2)),
          dv4(deriv_samples(s.v4, g.h2)) {}
};

// Values of the three transformed field equations at one node; `eq1_background`
// holds the same floating-point combination of background terms that appears
// inside eq1, so that defects of the zero state vanish identically.
struct TransformedEquations {
    double eq1 = 0.0; // deformation (density) equation
    double eq2 = 0.0; // curl equation
    double eq3 = 0.0; // Bernoulli transport equation
    double eq1_background = 0.0;
    double c2 = 0.0;  // squared sound speed of the reconstructed state
};

namespace detail {

// Full transformed operators at node (i, j) for a state with derivative cache `d`.
inline TransformedEquations transformed_equations_at(const PerturbationState& s,
                                                     const StateDerivatives& d,
                                                     const LinearCoefficients& co,
                                                     const BackgroundSolution& bg, const GridQ& g,
                                                     double bplus, int i, int j) {
    const GasModel& gas = bg.setup.gas;
    const double Ls = co.Ls, L1 = co.L1, len = L1 - Ls;
    const double y1 = g.y1(i);
    const double xi = Ls + s.v4[j];
    const double dxi = d.dv4[j];
    if (!(xi > bg.setup.L0 && xi < L1))
        throw SolverError("transformed operator: shock foot left the nozzle at y2 = " +
                          std::to_string(g.y2(j)));
    const double t1fac = len / (L1 - xi);
    const double t2fac = (y1 - L1) * dxi / (L1 - xi);
    const double x1 = y1 + (L1 - y1) * (xi - Ls) / len;
    const double phi = bg.setup.force.potential(x1);
    const double fx = bg.setup.force(x1);

    const double u1 = co.u[i] + s.v1(i, j);
    const double u2 = s.v2(i, j);
    const double B = bplus + s.v3(i, j);
    const double c2 = (gas.gamma - 1.0) * (B + phi - 0.5 * (u1 * u1 + u2 * u2));
    if (!(c2 > 0.0) || !(u1 > 0.0))
        throw SolverError("transformed operator: state left the admissible region "
                          "(hat state too large)");

    const double d1u1 = co.du[i] + d.d1v1(i, j);
    const double T1u1 = t1fac * d1u1;
    const double T2u1 = d.d2v1(i, j) + t2fac * d1u1;
    const double T1u2 = t1fac * d.d1v2(i, j);
    const double T2u2 = d.d2v2(i, j) + t2fac * d.d1v2(i, j);
    const double T1B = t1fac * d.d1v3(i, j);
    const double T2B = d.d2v3(i, j) + t2fac * d.d1v3(i, j);

    TransformedEquations eq;
    eq.c2 = c2;
    eq.eq1 = (c2 - u1 * u1) * T1u1 - u1 * u2 * (T1u2 + T2u1) + (c2 - u2 * u2) * T2u2 + u1 * fx;
    eq.eq1_background = (co.c2[i] - co.u[i] * co.u[i]) * co.du[i] + co.u[i] * co.f[i];
    eq.eq2 = T1u2 - T2u1 + T2B / u1;
    eq.eq3 = u1 * T1B + u2 * T2B;
    return eq;
}

} // namespace detail

// Every remainder of the linearized scheme, evaluated at the frozen state.
// `foot` must come from trace_characteristics at the same state.
inline RemainderBundle assemble_remainders(const PerturbationState& hat,
                                           const BackgroundSolution& bg,
                                           const LinearCoefficients& co,
                                           const ExitPerturbation& exit,
                                           const GridQ& grid,
                                           const CharacteristicFoot& foot) {
    const GasModel& gas = bg.setup.gas;
    const int n1 = grid.n1, n2 = grid.n2;
    const double Ls = co.Ls, L1 = co.L1;
    const double u_exit = co.u.back();
    const double rho_exit = co.rho.back();
    const double Pe = bg.exit_pressure;
    const double bplus = bg.bernoulli_plus;

    const StateDerivatives d(hat, grid);
    RemainderBundle out;
    out.F5.assign(n2, 0.0);
    out.r2.assign(n2, 0.0);
    out.r3.assign(n2, 0.0);
    out.r4.assign(n2, 0.0);
    out.F6 = Field(grid);
    out.G1 = Field(grid);
    out.G2 = Field(grid);

    // Shock-line defects: exact oblique jump at the perturbed foot, and the
    // exact shock-slope relation.
    for (int j = 0; j < n2; ++j) {
        const double y2 = grid.y2(j);
        const double xi = Ls + hat.v4[j];
        const FlowState up = bg.supersonic_trace.state_at(xi);
        const double u2h = hat.v2(0, j);
        const double w = u2h * u2h;
        ObliqueJumpResult jump;
        try {
            jump = rh_jump_oblique(up.rho, up.u1, w, gas);
        } catch (const Error& e) {
            throw SolverError("remainders: exact jump solve failed at y2 = " +
                              std::to_string(y2) + ": " + e.what());
        }
        const double phi_foot = bg.setup.force.potential(xi);
        const double B_plus =
            bernoulli(gas, FlowState{jump.rho_plus, jump.u1_plus, u2h}, phi_foot);
        out.r2[j] = (jump.u1_plus - bg.post_shock.u1) - co.b2 * hat.v4[j];
        out.r3[j] = (B_plus - bplus) - co.b3 * hat.v4[j];

        // Exact slope of the transformed shock relation at the frozen state.
        const double u1h = co.u.front() + hat.v1(0, j);
        const double Bh = bplus + hat.v3(0, j);
        double rho_h;
        try {
            rho_h = density_from_bernoulli(gas, Bh, phi_foot, u1h * u1h + w);
        } catch (const DomainError& e) {
            throw SolverError(std::string("remainders: hat state too large: ") + e.what());
        }
        const double denom = gas.pressure(rho_h) - gas.pressure(up.rho) + rho_h * w;
        if (!(denom > 0.0))
            throw SolverError("remainders: momentum-flux jump lost positivity at the foot");
        out.F5[j] = (rho_h * u1h / denom - co.b0) * u2h;
    }
    out.R5 = cumulative_integral(out.F5, grid.h2);

    // Exit defect: the exact Bernoulli inversion of the perturbed exit pressure
    // against its linearization.
    const double phi_exit = bg.setup.force.potential(L1);
    for (int j = 0; j < n2; ++j) {
        const double p_target = Pe + exit.epsilon * rho_exit * exit.pex_hat[j];
        const double rho_tgt = gas.density_of_pressure(p_target);
        const double v2e = hat.v2(n1 - 1, j);
        const double rad = 2.0 * (bplus + hat.v3(n1 - 1, j) + phi_exit - gas.enthalpy(rho_tgt)) -
                           v2e * v2e;
        if (!(rad > 0.0))
            throw SolverError("remainders: exit state inversion failed (hat state too large)");
        const double v1_exact = std::sqrt(rad) - u_exit;
        out.r4[j] = v1_exact - (hat.v3(n1 - 1, j) - exit.epsilon * exit.pex_hat[j]) / u_exit;
    }

    // Transport defect along the frozen characteristics.
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const double b = foot.beta(i, j);
            out.F6(i, j) = co.b3 * (interp_y2(hat.v4, b, Interp::Cubic) - hat.v4[j]) +
                           interp_y2(out.r3, b, Interp::Cubic);
        }

    // Interior defects of the two field equations.
    const Field d2F6 = d_dy2(out.F6, grid.h2);
    for (int i = 0; i < n1; ++i) {
        const double cd = co.c2[i] - co.u[i] * co.u[i]; // positive in the subsonic region
        for (int j = 0; j < n2; ++j) {
            const TransformedEquations eq =
                detail::transformed_equations_at(hat, d, co, bg, grid, bplus, i, j);
            const double lin1 = cd * d.d1v1(i, j) + co.c2[i] * d.d2v2(i, j) +
                                co.B1[i] * hat.v1(i, j) + co.B3[i] * hat.v3(i, j) +
                                co.B4[i] * hat.v4[j];
            const double F3 = lin1 - (eq.eq1 - eq.eq1_background);
            const double lin2 = d.d1v2(i, j) - d.d2v1(i, j) +
                                (L1 - grid.y1(i)) / (L1 - Ls) * co.du[i] * d.dv4[j] +
                                d.d2v3(i, j) / co.u[i];
            const double F4 = lin2 - eq.eq2;
            out.G1(i, j) =
                (F3 - co.B3[i] * out.F6(i, j) - (co.B3[i] * co.b3 + co.B4[i]) * out.R5[j]) / cd;
            out.G2(i, j) = F4 - co.lambda[i] * out.F5[j] - d2F6(i, j) / co.u[i];
        }
    }

    out.R6.assign(n2, 0.0);
    out.R7.assign(n2, 0.0);
    for (int j = 0; j < n2; ++j) {
        out.R6[j] = co.b2 * out.R5[j] + out.r2[j];
        out.R7[j] = (co.b3 * out.R5[j] + out.F6(n1 - 1, j)) / u_exit + out.r4[j];
    }
    return out;
}

// Convenience overload that traces the characteristics itself.
inline RemainderBundle assemble_remainders(const PerturbationState& hat,
                                           const BackgroundSolution& bg,
                                           const LinearCoefficients& co,
                                           const ExitPerturbation& exit, const GridQ& grid,
                                           const TraceOptions& topts = {}) {
    const StateDerivatives d(hat, grid);
    HatFields hf{&hat.v1, &hat.v2, &hat.v4, &d.dv4};
    const CharacteristicFoot foot = trace_characteristics(hf, co.u, grid, topts);
    return assemble_remainders(hat, bg, co, exit, grid, foot);
}

// v4(y2) = v4(-1) + int_{-1}^{y2} (b0 v2(Ls, t) + F5(t)) dt by composite Simpson.
inline std::vector<double> update_shock(const std::vector<double>& v2_at_shock,
                                        const std::vector<double>& F5, double v4_minus1,
                                        double b0, double h2) {
    if (v2_at_shock.size() != F5.size())
        throw ValidationError("update_shock: sample count mismatch");
    std::vector<double> integrand(v2_at_shock.size());
    for (std::size_t j = 0; j < integrand.size(); ++j)
        integrand[j] = b0 * v2_at_shock[j] + F5[j];
    std::vector<double> v4 = cumulative_integral(integrand, h2);
    for (double& v : v4) v += v4_minus1;
    return v4;
}

struct VelocitySolution {
    Field v1, v2;
    double v4_minus1 = 0.0;
    double kappa = 0.0;
    PotentialSolution potential;
};

// Builds the potential-problem data from the remainder bundle and the exit
// perturbation, solves for (phi, kappa), and reconstructs the velocity field.
// The one-sided d/dy1 stencils of the reconstruction match the boundary rows of
// the discrete elliptic system, so the shock/exit conditions hold exactly.
inline VelocitySolution solve_velocity(const RemainderBundle& bundle,
                                       const LinearCoefficients& co,
                                       const ExitPerturbation& exit, const GridQ& grid,
                                       const NonlocalEllipticSolver& solver) {
    const int n1 = grid.n1, n2 = grid.n2;
    const double u_exit = co.u.back();

    const Field T = cumulative_integral_y2(bundle.G2, grid.h2);
    const Field d1T = d_dy1(T, grid.h1);
    Field rhs(grid);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            rhs(i, j) = bundle.G1(i, j) + co.lambda1[i] * T(i, j) + d1T(i, j);

    std::vector<double> g1(n2), g2(n2);
    for (int j = 0; j < n2; ++j) {
        g1[j] = bundle.R6[j] + T(0, j);
        g2[j] = -exit.epsilon * exit.pex_hat[j] / u_exit + bundle.R7[j] + T(n1 - 1, j);
    }

    VelocitySolution out;
    out.potential = solver.solve(rhs, g1, g2);
    const Field& phi = out.potential.phi;
    out.kappa = out.potential.kappa;
    out.v4_minus1 = co.b0 * out.kappa;

    out.v2 = d_dy2(phi, grid.h2);
    for (int i = 0; i < n1; ++i) { // walls carry the exact slip condition
        out.v2(i, 0) = 0.0;
        out.v2(i, n2 - 1) = 0.0;
    }
    const Field d1phi = d_dy1(phi, grid.h1);
    out.v1 = Field(grid);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            out.v1(i, j) = d1phi(i, j) +
                           co.lambda[i] * (out.v4_minus1 + co.b0 * phi(0, j)) - T(i, j);
    return out;
}

struct IterateOptions {
    double tol_fp = 1e-10;
    int max_iter = 50;
    double eps_max = 1e-2;
    double eps_warn = 1e-3;
    TraceOptions trace{Interp::Cubic, 0.5, 0.2}; // bicubic keeps remainder derivatives clean
};

struct IterationReport {
    bool converged = false;
    int iterations = 0;
    double epsilon = 0.0;
    std::vector<double> step_norms;        // ||V^n - V^(n-1)||
    std::vector<double> state_norms;       // ||V^n||
    std::vector<double> contraction_ratios;
    std::vector<double> kappa_history;
    std::vector<double> v4_minus1_history;
    std::vector<double> compat_history; // max wall-compatibility violation per iterate
    std::vector<std::string> warnings;
    double final_step_norm = 0.0;
};

inline std::pair<PerturbationState, IterationReport>
iterate(const BackgroundSolution& bg, const LinearCoefficients& co, const ExitPerturbation& exit,
        const GridQ& grid, const IterateOptions& opts = {}) {
    exit.validate(grid);
    if (co.n() != grid.n1)
        throw ValidationError("iterate: coefficient profiles must be sampled on the solver grid");
    if (exit.epsilon > opts.eps_max)
        throw ValidationError("iterate: epsilon = " + std::to_string(exit.epsilon) +
                              " exceeds the configured maximum " + std::to_string(opts.eps_max));

    IterationReport rep;
    rep.epsilon = exit.epsilon;
    if (exit.epsilon > opts.eps_warn)
        rep.warnings.push_back("epsilon above the validated linear-response regime (" +
                               std::to_string(opts.eps_warn) + "); contraction is not guaranteed");

    EllipticCoeffs ec{co.a0, co.a1, co.a2, co.a3};
    const NonlocalEllipticSolver solver(grid, ec);

    PerturbationState V = PerturbationState::zero(grid);
    for (int it = 1; it <= opts.max_iter; ++it) {
        const PerturbationState& hat = V;
        const StateDerivatives dhat(hat, grid);
        HatFields hf{&hat.v1, &hat.v2, &hat.v4, &dhat.dv4};
        const CharacteristicFoot foot = trace_characteristics(hf, co.u, grid, opts.trace);
        const RemainderBundle bundle = assemble_remainders(hat, bg, co, exit, grid, foot);

        VelocitySolution vel = solve_velocity(bundle, co, exit, grid, solver);
        PerturbationState next;
        next.v1 = std::move(vel.v1);
        next.v2 = std::move(vel.v2);
        next.v4_minus1 = vel.v4_minus1;
        next.v4 = update_shock(next.v2.row(0), bundle.F5, vel.v4_minus1, co.b0, grid.h2);
        next.v3 = solve_bernoulli_transport(next.v4, foot, co.b3, bundle.r3, grid,
                                            opts.trace.interp == Interp::Linear ? Interp::Linear
                                                                                : Interp::Cubic);

        const double step = state_difference(next, V).norm(grid.h2);
        rep.step_norms.push_back(step);
        rep.state_norms.push_back(next.norm(grid.h2));
        rep.kappa_history.push_back(vel.kappa);
        rep.v4_minus1_history.push_back(vel.v4_minus1);
        rep.compat_history.push_back(check_state_compatibility(next, grid).max());
        if (rep.step_norms.size() >= 2) {
            const double prev = rep.step_norms[rep.step_norms.size() - 2];
            rep.contraction_ratios.push_back(prev > 0.0 ? step / prev : 0.0);
        }
        V = std::move(next);
        rep.iterations = it;
        rep.final_step_norm = step;
        if (step <= opts.tol_fp) {
            rep.converged = true;
            break;
        }
    }
    if (!rep.converged) {
        std::string hist = "fixed-point iteration did not converge in " +
                           std::to_string(opts.max_iter) + " iterations; step norms:";
        for (double s : rep.step_norms) hist += " " + std::to_string(s);
        throw DivergenceError(hist);
    }
    return {std::move(V), std::move(rep)};
}

} // namespace shocknozzle
