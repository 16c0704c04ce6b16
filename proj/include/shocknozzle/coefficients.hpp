#pragma once

// Coefficients of the linearized shock problem, all evaluated from the 1D
// background: the jump/shock constants b0, b2, b3, the interior coefficients
// B1, B3, B4, the potential-equation profiles lambda, lambda0, lambda1, and the
// elliptic coefficients a0..a3 with their positivity certificates. Velocity
// derivatives along the subsonic branch are evaluated analytically from the
// branch ODE rather than by differencing stored samples.

#include <cmath>
#include <string>
#include <vector>

#include "shocknozzle/background.hpp"
#include "shocknozzle/errors.hpp"
#include "shocknozzle/gas.hpp"
#include "shocknozzle/grid.hpp"

namespace shocknozzle {

// Derivatives of the exact oblique jump map at the unperturbed shock: the
// downstream (rho+, u1+) as a function of (rho- - rho-_bar, u- - u-_bar, (u2+)^2).
struct JumpPartials {
    // h1 = rho+ component
    double dh1_drho = 0.0;
    double dh1_du = 0.0;
    double dh1_dw = 0.0;
    // h2 = u1+ component
    double dh2_drho = 0.0;
    double dh2_du = 0.0;
    double dh2_dw = 0.0;
};

// Implicit differentiation of the slope-eliminated jump relations
//   F1 = rho u - a b - rho^2 u w / (rho w + P(rho) - P(a)) = 0
//   F2 = rho u^2 + P(rho) - a b^2 - P(a) - rho^2 u^2 w / (rho w + P(rho) - P(a)) = 0
// at the background point (w = 0). The 2x2 Jacobian in (rho, u) is
//   [[u, rho], [u^2 + c^2, 2J]] with determinant rho+ (u+^2 - c+^2) < 0.
inline JumpPartials rh_boundary_partials(const BackgroundSolution& bg) {
    const GasModel& gas = bg.setup.gas;
    const double a = bg.pre_shock.rho, b = bg.pre_shock.u1;
    const double rp = bg.post_shock.rho, up = bg.post_shock.u1;
    const double c2m = gas.sound_speed_sq(a);
    const double c2p = gas.sound_speed_sq(rp);
    const double J = bg.J;
    const double D = gas.pressure(rp) - gas.pressure(a);
    if (!(D > 0.0))
        throw DomainError("jump partials: entropy condition P+ > P- must hold strictly");
    const double det = rp * (up * up - c2p); // negative: downstream subsonic
    JumpPartials p;
    // d/d(rho-): parameter column (-b, -(b^2 + c^2(a)))
    p.dh1_drho = (2.0 * J * b - rp * (b * b + c2m)) / det;
    p.dh2_drho = (up * (b * b + c2m) - (up * up + c2p) * b) / det;
    // d/d(u-): parameter column (-a, -2ab)
    p.dh1_du = 2.0 * J * (a - rp) / det;
    p.dh2_du = (2.0 * J * up - (up * up + c2p) * a) / det;
    // d/dw: parameter column (-rp^2 up / D, -J^2 / D)
    p.dh1_dw = J * J / (D * (up * up - c2p));
    p.dh2_dw = -rp * up * c2p / (D * (up * up - c2p));
    return p;
}

struct LinearCoefficients {
    double Ls = 0.0, L1 = 0.0;
    double b0 = 0.0; // shock-slope constant, > 0
    double b2 = 0.0; // shock-side velocity boundary constant, < 0
    double b3 = 0.0; // Bernoulli jump constant, < 0 for compressive shocks
    double a3 = 0.0; // Robin coefficient b0 (b2 - lambda(Ls)), > 0

    // Profiles sampled at the y1 nodes of the solver grid.
    std::vector<double> y1;
    std::vector<double> u, rho, c2, du, ddu; // background, u' and u'' analytic
    std::vector<double> f, df;               // force and its derivative at y1
    std::vector<double> B1, B3, B4;
    std::vector<double> lambda, lambda0, lambda1, lambda2;
    std::vector<double> a0, a1, a2;

    JumpPartials jump_partials;

    int n() const { return static_cast<int>(y1.size()); }

    double u_exit() const { return u.back(); }
};

// Evaluates every coefficient profile on the y1 nodes of `grid` and certifies
// the positivity required for solvability of the non-local elliptic problem.
inline LinearCoefficients compute_linear_coefficients(const BackgroundSolution& bg,
                                                      const GridQ& grid) {
    const GasModel& gas = bg.setup.gas;
    const ForceField& force = bg.setup.force;
    const double Ls = bg.Ls, L1 = bg.setup.L1;
    if (std::abs(grid.y1_min - Ls) > 1e-12 * std::max(1.0, std::abs(Ls)) ||
        std::abs(grid.y1_max - L1) > 1e-12 * std::max(1.0, std::abs(L1)))
        throw ValidationError("coefficients: grid y1 range must match [Ls, L1]");

    LinearCoefficients co;
    co.Ls = Ls;
    co.L1 = L1;

    // Shock-line constants.
    const double f_Ls = force(Ls);
    if (!(f_Ls > 0.0))
        throw ValidationError("coefficient degeneracy: force vanishes at the shock (f(Ls) = " +
                              std::to_string(f_Ls) + "); the linearized problem needs f > 0");
    const double rm = bg.pre_shock.rho;
    const double rp = bg.post_shock.rho, up = bg.post_shock.u1;
    const double c2p_Ls = gas.sound_speed_sq(rp);
    const double dP = gas.pressure(rp) - gas.pressure(rm);
    if (!(dP > 0.0)) throw ValidationError("coefficient degeneracy: entropy condition violated");
    co.b0 = bg.J / dP;
    co.b2 = rm * up * f_Ls / (rp * (up * up - c2p_Ls));
    co.b3 = (rm - rp) / rp * f_Ls;
    if (!(co.b0 > 0.0)) throw ValidationError("coefficient degeneracy: b0 must be positive");
    if (!(co.b2 < 0.0)) throw ValidationError("coefficient degeneracy: b2 must be negative");

    const int n = grid.n1;
    co.y1.resize(n);
    co.u.resize(n);
    co.rho.resize(n);
    co.c2.resize(n);
    co.du.resize(n);
    co.ddu.resize(n);
    co.f.resize(n);
    co.df.resize(n);
    co.B1.resize(n);
    co.B3.resize(n);
    co.B4.resize(n);
    co.lambda.resize(n);
    co.lambda0.resize(n);
    co.lambda1.resize(n);
    co.lambda2.resize(n);
    co.a0.resize(n);
    co.a1.resize(n);
    co.a2.resize(n);

    const double len = L1 - Ls;
    for (int i = 0; i < n; ++i) {
        const double y = grid.y1(i);
        co.y1[i] = y;
        const double uu = bg.subsonic.u_at(y);
        const double rr = bg.J / uu;
        const double c2 = gas.sound_speed_sq(rr);
        const double fv = force(y);
        const double dfv = force.derivative(y);
        if (!(fv > 0.0))
            throw ValidationError("coefficient degeneracy: f(y1) = " + std::to_string(fv) +
                                  " at y1 = " + std::to_string(y) + "; need f > 0");
        const double denom = uu * uu - c2; // negative on the subsonic branch
        if (!(denom < 0.0))
            throw ValidationError("coefficient degeneracy: subsonic branch not strictly subsonic "
                                  "at y1 = " + std::to_string(y));
        const double du = uu * fv / denom;
        // u'' from differentiating u' = u f / (u^2 - c^2) with c^2 = gamma A (J/u)^(gamma-1):
        //   (u^2 - c^2)' = u' (2u^2 + (gamma-1) c^2) / u
        const double ddenom = du * (2.0 * uu * uu + (gas.gamma - 1.0) * c2) / uu;
        const double ddu = (du * fv + uu * dfv) / denom - uu * fv * ddenom / (denom * denom);

        const double B1 = fv - (gas.gamma + 1.0) * uu * du;
        const double B3 = (gas.gamma - 1.0) * du;
        const double B4 =
            ((gas.gamma - 1.0) * fv * (L1 - y) * du - uu * fv + uu * dfv * (L1 - y)) / len;
        const double s = (L1 - y) / len;
        const double lam = s * du + co.b3 / uu;
        const double dlam = -du / len + s * ddu - co.b3 * du / (uu * uu);
        const double lam1 = B1 / (c2 - uu * uu);
        const double lam2 = (B3 * co.b3 + B4) / (c2 - uu * uu);
        const double lam0 = dlam + lam1 * lam + lam2;

        co.u[i] = uu;
        co.rho[i] = rr;
        co.c2[i] = c2;
        co.du[i] = du;
        co.ddu[i] = ddu;
        co.f[i] = fv;
        co.df[i] = dfv;
        co.B1[i] = B1;
        co.B3[i] = B3;
        co.B4[i] = B4;
        co.lambda[i] = lam;
        co.lambda0[i] = lam0;
        co.lambda1[i] = lam1;
        co.lambda2[i] = lam2;
        co.a0[i] = -co.b0 * lam0;
        co.a1[i] = lam1;
        co.a2[i] = 1.0 / (1.0 - uu * uu / c2);
    }

    co.a3 = co.b0 * (co.b2 - co.lambda.front());
    co.jump_partials = rh_boundary_partials(bg);

    // Positivity certificates for the non-local elliptic solve.
    auto certify = [](const std::vector<double>& v, const std::vector<double>& y,
                      const char* name, double lower) {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (!(v[i] > lower))
                throw ValidationError(std::string("coefficient degeneracy: ") + name + " = " +
                                      std::to_string(v[i]) + " at y1 = " + std::to_string(y[i]) +
                                      " (must exceed " + std::to_string(lower) + ")");
    };
    certify(co.a0, co.y1, "a0", 0.0);
    certify(co.a1, co.y1, "a1", 0.0);
    certify(co.a2, co.y1, "a2", 1.0);
    if (!(co.a3 > 0.0))
        throw ValidationError("coefficient degeneracy: a3 = " + std::to_string(co.a3) +
                              " must be positive");
    return co;
}

} // namespace shocknozzle
