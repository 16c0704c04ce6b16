#pragma once

// One-dimensional transonic shock background: branch integration of the forced
// Euler ODEs, the Rankine-Hugoniot jump, the exit-pressure map and its shooting
// inversion, and the subsonic extension past the shock.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "shocknozzle/errors.hpp"
#include "shocknozzle/gas.hpp"

namespace shocknozzle {

struct BackgroundOptions {
    int steps_per_branch = 2000;   // fixed RK4 step count per branch
    double sonic_guard = 1e-8;     // abort when |u^2-c^2| < guard * c^2(rho0)
    double tol_shoot = 1e-10;      // exit-pressure shooting tolerance
    int max_bisect = 200;
    double delta0_frac = 0.1;      // subsonic extension length as a fraction of L1-L0
};

struct NozzleSetup {
    double L0 = 0.0;
    double L1 = 1.0;
    double rho0 = 1.0;
    double u0 = 2.0;
    GasModel gas;
    ForceField force;
    BackgroundOptions opts;

    FlowState inlet() const { return {rho0, u0, 0.0}; }
    double mass_flux() const { return rho0 * u0; }

    void validate() const {
        if (!(L0 < L1)) throw ValidationError("nozzle: L0 must be below L1");
        GasModel::require_density(rho0);
        if (!(u0 > 0.0)) throw DomainError("nozzle: inlet velocity must be positive");
        const double c2 = gas.sound_speed_sq(rho0);
        if (!(u0 * u0 > c2))
            throw DomainError("nozzle: inlet must be supersonic (u0^2 = " +
                              std::to_string(u0 * u0) + " <= c^2 = " + std::to_string(c2) + ")");
        force.require_nonnegative(L0, L1);
    }
};

enum class Regime { Supersonic, Subsonic };

// Sampled branch of the 1D flow with rho = J/u. The grid may be non-uniform
// (the subsonic extension concatenates two uniform segments); evaluation at
// arbitrary x re-integrates one RK4 step from the nearest stored node, which
// keeps off-node values at integrator accuracy instead of interpolation accuracy.
class SolutionBranch {
public:
    std::vector<double> x, u, rho;
    double J = 0.0;
    Regime regime = Regime::Supersonic;
    GasModel gas;
    ForceField force;

    bool empty() const { return x.size() < 2; }
    double x_min() const { return x.front(); }
    double x_max() const { return x.back(); }

    double u_at(double xq) const {
        if (x.empty()) throw SolverError("branch: empty");
        const double span = x.back() - x.front();
        const double slack = 1e-12 * std::max(1.0, std::abs(span));
        if (xq < x.front() - slack || xq > x.back() + slack)
            throw DomainError("branch: query x = " + std::to_string(xq) +
                              " outside [" + std::to_string(x.front()) + ", " +
                              std::to_string(x.back()) + "]");
        xq = std::clamp(xq, x.front(), x.back());
        const std::size_t i = nearest_index(xq);
        const double dx = xq - x[i];
        if (dx == 0.0) return u[i];
        return rk4_step(u[i], x[i], dx);
    }

    double rho_at(double xq) const { return J / u_at(xq); }

    FlowState state_at(double xq) const {
        const double uu = u_at(xq);
        return {J / uu, uu, 0.0};
    }

    // u' = u f / (u^2 - c^2(J/u)) evaluated along the branch.
    double du_dx(double uu, double xx) const {
        const double c2 = gas.sound_speed_sq(J / uu);
        return uu * force(xx) / (uu * uu - c2);
    }

private:
    std::size_t nearest_index(double xq) const {
        const auto it = std::lower_bound(x.begin(), x.end(), xq);
        if (it == x.begin()) return 0;
        if (it == x.end()) return x.size() - 1;
        const std::size_t hi = static_cast<std::size_t>(it - x.begin());
        return (xq - x[hi - 1] <= x[hi] - xq) ? hi - 1 : hi;
    }

    double rk4_step(double uu, double xx, double h) const {
        const double k1 = du_dx(uu, xx);
        const double k2 = du_dx(uu + 0.5 * h * k1, xx + 0.5 * h);
        const double k3 = du_dx(uu + 0.5 * h * k2, xx + 0.5 * h);
        const double k4 = du_dx(uu + h * k3, xx + h);
        return uu + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
};

// Classical RK4 on u' = u f/(u^2 - c^2), rho = J/u, from `start` over [a,b]
// (backward when b < a). Trips the sonic guard rather than crossing the sonic line.
inline SolutionBranch integrate_branch(const FlowState& start, double a, double b,
                                       const NozzleSetup& setup, int nsteps = -1) {
    if (nsteps <= 0) nsteps = setup.opts.steps_per_branch;
    SolutionBranch br;
    br.J = start.rho * start.u1;
    br.gas = setup.gas;
    br.force = setup.force;
    const double c2_start = setup.gas.sound_speed_sq(start.rho);
    br.regime = (start.u1 * start.u1 > c2_start) ? Regime::Supersonic : Regime::Subsonic;
    const double guard = setup.opts.sonic_guard * setup.gas.sound_speed_sq(setup.rho0);

    const double h = (b - a) / nsteps;
    br.x.reserve(nsteps + 1);
    br.u.reserve(nsteps + 1);
    br.rho.reserve(nsteps + 1);
    double uu = start.u1;
    br.x.push_back(a);
    br.u.push_back(uu);
    br.rho.push_back(br.J / uu);

    // Abort inside the guard band, when the branch leaves its regime (a fixed
    // step can jump across the sonic line before the band is entered), or when
    // the state stops being a gas state at all.
    const double sign0 = (start.u1 * start.u1 > c2_start) ? 1.0 : -1.0;
    auto check_guard = [&](double uval, double xval) {
        if (!(uval > 0.0) || !std::isfinite(uval))
            throw SonicDegeneracyError("branch: integration left the admissible state space at "
                                       "x1 = " + std::to_string(xval));
        const double c2 = setup.gas.sound_speed_sq(br.J / uval);
        const double sdiff = uval * uval - c2;
        if (std::abs(sdiff) < guard || sdiff * sign0 < 0.0)
            throw SonicDegeneracyError("branch: sonic degeneracy at x1 = " + std::to_string(xval) +
                                       " (crossed or entered the sonic guard band)");
    };
    check_guard(uu, a);

    for (int n = 0; n < nsteps; ++n) {
        const double xx = a + n * h;
        const double k1 = br.du_dx(uu, xx);
        const double k2 = br.du_dx(uu + 0.5 * h * k1, xx + 0.5 * h);
        const double k3 = br.du_dx(uu + 0.5 * h * k2, xx + 0.5 * h);
        const double k4 = br.du_dx(uu + h * k3, xx + h);
        uu += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double xn = (n + 1 == nsteps) ? b : a + (n + 1) * h;
        check_guard(uu, xn);
        br.x.push_back(xn);
        br.u.push_back(uu);
        br.rho.push_back(br.J / uu);
    }
    if (b < a) {
        std::reverse(br.x.begin(), br.x.end());
        std::reverse(br.u.begin(), br.u.end());
        std::reverse(br.rho.begin(), br.rho.end());
    }
    return br;
}

// Momentum-flux function m(rho) = J^2/rho + A rho^gamma at fixed mass flux J.
inline double momentum_flux(const GasModel& gas, double J, double rho) {
    return J * J / rho + gas.pressure(rho);
}

// Unique subsonic state downstream of a supersonic state across a normal shock:
// solves m(rho+) = m(rho-) with rho+ > rho- by bracketed bisection above the
// sonic density, plus a short Newton polish. The entropy condition P+ > P- is
// automatic for the compressive root.
inline FlowState rh_jump(const FlowState& upstream, const GasModel& gas) {
    GasModel::require_density(upstream.rho);
    const double J = upstream.rho * upstream.u1;
    if (!(J > 0.0)) throw DomainError("rh_jump: mass flux must be positive");
    const double c2 = gas.sound_speed_sq(upstream.rho);
    const double u2 = upstream.u1 * upstream.u1;
    // Sonic density: c^2(rho*) = u^2(rho*) with u = J/rho.
    const double rho_sonic =
        std::pow(J * J / (gas.gamma * gas.entropy_const), 1.0 / (gas.gamma + 1.0));
    if (u2 < c2) throw DomainError("rh_jump: upstream state must be supersonic");
    if (upstream.rho >= rho_sonic * (1.0 - 1e-12)) {
        // Sonic upstream: the jump degenerates to the identity.
        return {upstream.rho, upstream.u1, 0.0};
    }

    const double m_target = momentum_flux(gas, J, upstream.rho);
    double lo = rho_sonic;
    double hi = std::max(2.0 * rho_sonic, upstream.rho * 2.0);
    int expand = 0;
    while (momentum_flux(gas, J, hi) < m_target) {
        hi *= 2.0;
        if (++expand > 200) throw SolverError("rh_jump: failed to bracket the subsonic root");
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (momentum_flux(gas, J, mid) < m_target ? lo : hi) = mid;
    }
    double rho_plus = 0.5 * (lo + hi);
    for (int it = 0; it < 4; ++it) { // Newton polish; m'(rho) = c^2 - u^2 > 0 here
        const double g = momentum_flux(gas, J, rho_plus) - m_target;
        const double gp = gas.sound_speed_sq(rho_plus) - J * J / (rho_plus * rho_plus);
        if (gp == 0.0) break;
        rho_plus -= g / gp;
    }
    if (!(rho_plus > upstream.rho))
        throw SolverError("rh_jump: compressive root not found");
    return {rho_plus, J / rho_plus, 0.0};
}

// Oblique generalization of the jump used at the perturbed 2D shock foot: given
// the upstream 1D state, zero upstream tangential velocity, and the downstream
// tangential speed squared w = (u2+)^2, solve the two slope-eliminated jump
// relations for (rho+, u1+). Mass-flux elimination gives
//   u1+(rho) = a b (rho w + dP) / (rho dP),  dP = P(rho) - P(a),
// and the remaining momentum relation is solved for rho by Newton from the
// normal-shock root.
struct ObliqueJumpResult {
    double rho_plus;
    double u1_plus;
};

inline ObliqueJumpResult rh_jump_oblique(double rho_minus, double u_minus, double w,
                                         const GasModel& gas) {
    const FlowState up{rho_minus, u_minus, 0.0};
    const FlowState normal = rh_jump(up, gas);
    if (w == 0.0) return {normal.rho, normal.u1};
    if (!(w >= 0.0)) throw DomainError("rh_jump_oblique: tangential speed squared must be >= 0");

    const double a = rho_minus, b = u_minus;
    const double Pa = gas.pressure(a);
    const double scale = a * b * b + Pa;

    auto u_of_rho = [&](double rho) {
        const double dP = gas.pressure(rho) - Pa;
        return a * b * (rho * w + dP) / (rho * dP);
    };
    auto g = [&](double rho) {
        const double dP = gas.pressure(rho) - Pa;
        const double uu = u_of_rho(rho);
        return rho * uu * uu + dP - a * b * b - rho * rho * uu * uu * w / (rho * w + dP);
    };

    double rho = normal.rho;
    bool ok = false;
    for (int it = 0; it < 60; ++it) {
        const double gv = g(rho);
        if (std::abs(gv) < 1e-14 * scale) { ok = true; break; }
        const double step = 1e-7 * rho;
        const double gp = (g(rho + step) - g(rho - step)) / (2.0 * step);
        if (gp == 0.0) break;
        double next = rho - gv / gp;
        if (!(next > a) || !std::isfinite(next)) next = 0.5 * (rho + normal.rho);
        rho = next;
    }
    if (!ok && !(std::abs(g(rho)) < 1e-12 * scale))
        throw SolverError("rh_jump_oblique: downstream state outside the admissible jump range "
                          "(hat state too large)");
    const double u1 = u_of_rho(rho);
    if (!(gas.pressure(rho) > Pa))
        throw SolverError("rh_jump_oblique: entropy condition violated");
    return {rho, u1};
}

struct PressureWindow {
    double P0 = 0.0; // exit pressure for a shock at L0
    double P1 = 0.0; // exit pressure for a shock at L1
    bool degenerate = false;

    bool contains(double Pe) const { return Pe > P1 && Pe < P0; }
};

struct BackgroundSolution {
    NozzleSetup setup;
    double Ls = 0.0;
    double J = 0.0;
    double exit_pressure = 0.0; // P(rho+ (L1)) of the computed solution
    FlowState pre_shock;        // supersonic state at Ls
    FlowState post_shock;       // subsonic state at Ls
    SolutionBranch supersonic;       // [L0, Ls]
    SolutionBranch supersonic_trace; // [L0, L1], global supersonic solution
    SolutionBranch subsonic;         // [Ls, L1]
    SolutionBranch extension;        // [Ls - delta0, L1]
    double delta0 = 0.0;
    double bernoulli_minus = 0.0; // supersonic-branch Bernoulli constant
    double bernoulli_plus = 0.0;  // subsonic-branch Bernoulli constant

    double rh_mass_residual() const {
        return std::abs(post_shock.rho * post_shock.u1 - pre_shock.rho * pre_shock.u1);
    }
    double rh_momentum_residual() const {
        const auto& gas = setup.gas;
        return std::abs(post_shock.rho * post_shock.u1 * post_shock.u1 +
                        gas.pressure(post_shock.rho) -
                        pre_shock.rho * pre_shock.u1 * pre_shock.u1 -
                        gas.pressure(pre_shock.rho));
    }
    bool entropy_ok() const {
        return setup.gas.pressure(post_shock.rho) > setup.gas.pressure(pre_shock.rho);
    }
};

namespace detail {

inline FlowState supersonic_state_at(const NozzleSetup& setup, double Ls) {
    if (Ls <= setup.L0) return setup.inlet();
    const SolutionBranch br = integrate_branch(setup.inlet(), setup.L0, Ls, setup);
    return br.state_at(Ls);
}

} // namespace detail

// Supersonic branch to Ls, normal jump, subsonic branch to L1; returns P(rho+(L1)).
inline double exit_pressure_of_shock(double Ls, const NozzleSetup& setup) {
    if (!(Ls >= setup.L0 && Ls <= setup.L1))
        throw DomainError("shock position must lie inside [L0, L1]");
    const FlowState pre = detail::supersonic_state_at(setup, Ls);
    const FlowState post = rh_jump(pre, setup.gas);
    if (Ls >= setup.L1) return setup.gas.pressure(post.rho);
    const SolutionBranch sub = integrate_branch(post, Ls, setup.L1, setup);
    return setup.gas.pressure(sub.rho.back());
}

inline PressureWindow pressure_window(const NozzleSetup& setup) {
    setup.validate();
    PressureWindow w;
    w.P0 = exit_pressure_of_shock(setup.L0, setup);
    w.P1 = exit_pressure_of_shock(setup.L1, setup);
    if (w.P0 < w.P1 - 1e-12 * std::abs(w.P0))
        throw SolverError("pressure window: monotonicity violated (P0 = " + std::to_string(w.P0) +
                          " < P1 = " + std::to_string(w.P1) + ")");
    w.degenerate = std::abs(w.P0 - w.P1) <= 1e-10 * std::abs(w.P0);
    return w;
}

// Backward integration of the subsonic flow from the post-shock state down to
// Ls - delta0, concatenated with the forward subsonic branch.
inline SolutionBranch extend_subsonic(const FlowState& post_shock, const SolutionBranch& subsonic,
                                      double Ls, double delta0, const NozzleSetup& setup) {
    if (delta0 < 0.0) throw ValidationError("extension: delta0 must be >= 0");
    if (delta0 == 0.0) return subsonic;
    if (!(Ls - delta0 > setup.L0))
        throw ValidationError("extension: Ls - delta0 must stay above L0");
    const int nsteps = std::max(
        16, static_cast<int>(std::lround(setup.opts.steps_per_branch * delta0 /
                                         std::max(setup.L1 - setup.L0, 1e-300))));
    SolutionBranch back;
    try {
        back = integrate_branch(post_shock, Ls, Ls - delta0, setup, nsteps);
    } catch (const SonicDegeneracyError&) {
        throw SonicDegeneracyError(
            "extension: sonic state reached while extending past the shock; shrink delta0 below " +
            std::to_string(delta0));
    }
    SolutionBranch ext = back; // ascending [Ls - delta0, Ls]
    ext.x.insert(ext.x.end(), subsonic.x.begin() + 1, subsonic.x.end());
    ext.u.insert(ext.u.end(), subsonic.u.begin() + 1, subsonic.u.end());
    ext.rho.insert(ext.rho.end(), subsonic.rho.begin() + 1, subsonic.rho.end());
    return ext;
}

// Assembles the full background for a prescribed shock position.
inline BackgroundSolution background_for_shock_position(double Ls, const NozzleSetup& setup) {
    setup.validate();
    if (!(Ls > setup.L0 && Ls < setup.L1))
        throw DomainError("shock position must lie strictly inside (L0, L1)");
    BackgroundSolution bg;
    bg.setup = setup;
    bg.Ls = Ls;
    bg.J = setup.mass_flux();
    bg.supersonic = integrate_branch(setup.inlet(), setup.L0, Ls, setup);
    bg.supersonic_trace = integrate_branch(setup.inlet(), setup.L0, setup.L1, setup);
    // The pre-shock state comes from the global trace so that shock-foot
    // evaluations at an unperturbed foot reproduce it bitwise.
    bg.pre_shock = bg.supersonic_trace.state_at(Ls);
    bg.post_shock = rh_jump(bg.pre_shock, setup.gas);
    bg.subsonic = integrate_branch(bg.post_shock, Ls, setup.L1, setup);
    bg.exit_pressure = setup.gas.pressure(bg.subsonic.rho.back());
    // Default extension length, clamped so it never reaches the inlet.
    double delta0 = setup.opts.delta0_frac * (setup.L1 - setup.L0);
    delta0 = std::min(delta0, 0.5 * (Ls - setup.L0));
    bg.delta0 = delta0;
    bg.extension = extend_subsonic(bg.post_shock, bg.subsonic, Ls, delta0, setup);
    bg.bernoulli_minus = bernoulli(setup.gas, setup.inlet(), setup.force.potential(setup.L0));
    bg.bernoulli_plus = bernoulli(setup.gas, bg.post_shock, setup.force.potential(Ls));
    return bg;
}

// Shooting inversion of the strictly decreasing map Ls -> Pe by bisection.
inline BackgroundSolution solve_shock_position(double Pe, const NozzleSetup& setup) {
    const PressureWindow w = pressure_window(setup);
    if (!w.contains(Pe))
        throw WindowError("no transonic shock for this exit pressure: Pe = " + std::to_string(Pe) +
                          " outside (P1, P0) = (" + std::to_string(w.P1) + ", " +
                          std::to_string(w.P0) + ")");
    double lo = setup.L0, hi = setup.L1; // Pe(lo) = P0 > Pe > P1 = Pe(hi)
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < setup.opts.max_bisect; ++it) {
        mid = 0.5 * (lo + hi);
        const double p = exit_pressure_of_shock(mid, setup);
        if (std::abs(p - Pe) <= setup.opts.tol_shoot) break;
        (p > Pe ? lo : hi) = mid;
    }
    return background_for_shock_position(mid, setup);
}

// Closed-form derivative of the exit density with respect to the shock position:
//   (gamma A rho+(L1)^(gamma-2) - J^2/rho+(L1)^3) d rho+(L1)/d Ls
//     = f(Ls) (u+(Ls) - u-(Ls)) / u-(Ls)  < 0 for f > 0.
inline double monotonicity_derivative(double Ls, const NozzleSetup& setup) {
    if (!(Ls > setup.L0 && Ls < setup.L1))
        throw DomainError("shock position must lie strictly inside (L0, L1)");
    const FlowState pre = detail::supersonic_state_at(setup, Ls);
    const FlowState post = rh_jump(pre, setup.gas);
    const SolutionBranch sub = integrate_branch(post, Ls, setup.L1, setup);
    const double rho_exit = sub.rho.back();
    const double I = setup.force(Ls) * (post.u1 - pre.u1) / pre.u1;
    const double coeff = setup.gas.gamma * setup.gas.entropy_const *
                             std::pow(rho_exit, setup.gas.gamma - 2.0) -
                         setup.mass_flux() * setup.mass_flux() / (rho_exit * rho_exit * rho_exit);
    return I / coeff;
}

} // namespace shocknozzle
