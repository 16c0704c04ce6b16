#pragma once

// Polytropic gas closures and the Bernoulli/density algebra shared by all solvers,
// plus the axial force field f(x1) and its exact potential.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "shocknozzle/errors.hpp"

namespace shocknozzle {

// Isentropic polytropic gas P(rho) = A rho^gamma, 1 < gamma < 3.
struct GasModel {
    double gamma = 1.4;
    double entropy_const = 1.0; // A

    GasModel() = default;
    GasModel(double gamma_, double entropy_const_ = 1.0)
        : gamma(gamma_), entropy_const(entropy_const_) {
        if (!(gamma > 1.0 && gamma < 3.0))
            throw DomainError("gas: adiabatic exponent must satisfy 1 < gamma < 3, got " +
                              std::to_string(gamma));
        if (!(entropy_const > 0.0))
            throw DomainError("gas: entropy constant A must be positive");
    }

    double pressure(double rho) const {
        require_density(rho);
        return entropy_const * std::pow(rho, gamma);
    }

    // c^2(rho) = gamma A rho^(gamma-1); equals gamma P / rho.
    double sound_speed_sq(double rho) const {
        require_density(rho);
        return gamma * entropy_const * std::pow(rho, gamma - 1.0);
    }

    // Enthalpy h(rho) = gamma A / (gamma-1) rho^(gamma-1).
    double enthalpy(double rho) const {
        require_density(rho);
        return gamma * entropy_const / (gamma - 1.0) * std::pow(rho, gamma - 1.0);
    }

    // Density from pressure, inverse of pressure().
    double density_of_pressure(double p) const {
        if (!(p > 0.0)) throw DomainError("gas: pressure must be positive");
        return std::pow(p / entropy_const, 1.0 / gamma);
    }

    static void require_density(double rho) {
        if (!(rho > 0.0))
            throw DomainError("gas: density must be positive, got " + std::to_string(rho));
    }
};

// Plane flow state (rho, u1, u2).
struct FlowState {
    double rho = 1.0;
    double u1 = 0.0;
    double u2 = 0.0;

    double speed_sq() const { return u1 * u1 + u2 * u2; }
};

// B = |u|^2/2 + h(rho) - Phi.
inline double bernoulli(const GasModel& gas, const FlowState& s, double phi) {
    return 0.5 * s.speed_sq() + gas.enthalpy(s.rho) - phi;
}

// rho = H(B, Phi, |u|^2) = [(gamma-1)/gamma/A (B + Phi - |u|^2/2)]^(1/(gamma-1)).
// Throws on a non-positive radicand (vacuum / invalid state).
inline double density_from_bernoulli(const GasModel& gas, double B, double phi,
                                     double speed_sq) {
    const double radicand =
        (gas.gamma - 1.0) / (gas.gamma * gas.entropy_const) * (B + phi - 0.5 * speed_sq);
    if (!(radicand > 0.0))
        throw DomainError("gas: vacuum/invalid state, Bernoulli radicand = " +
                          std::to_string(radicand));
    return std::pow(radicand, 1.0 / (gas.gamma - 1.0));
}

inline double mach_sq(const GasModel& gas, const FlowState& s) {
    return s.speed_sq() / gas.sound_speed_sq(s.rho);
}

// Axial force f(x1) as a polynomial on [L0, L1]; the potential Phi is its exact
// antiderivative with the gauge Phi(L0) = 0 (only Phi differences matter).
class ForceField {
public:
    ForceField() : coeffs_{0.0}, x_ref_(0.0) {}
    ForceField(std::vector<double> coeffs, double x_ref)
        : coeffs_(std::move(coeffs)), x_ref_(x_ref) {
        if (coeffs_.empty()) coeffs_.push_back(0.0);
    }
    static ForceField constant(double value, double x_ref = 0.0) {
        return ForceField({value}, x_ref);
    }

    double operator()(double x) const {
        double p = 0.0;
        for (std::size_t k = coeffs_.size(); k-- > 0;) p = p * x + coeffs_[k];
        return p;
    }

    double derivative(double x) const {
        double p = 0.0;
        for (std::size_t k = coeffs_.size(); k-- > 1;)
            p = p * x + static_cast<double>(k) * coeffs_[k];
        return p;
    }

    // Phi(x) = int_{x_ref}^{x} f, exact term-by-term.
    double potential(double x) const {
        double p = 0.0, pr = 0.0;
        for (std::size_t k = coeffs_.size(); k-- > 0;) {
            const double c = coeffs_[k] / static_cast<double>(k + 1);
            p = p * x + c;
            pr = pr * x_ref_ + c;
        }
        return p * x - pr * x_ref_;
    }

    double min_on(double a, double b, int nsamples = 1000) const {
        double m = (*this)(a);
        for (int i = 1; i < nsamples; ++i) {
            const double x = a + (b - a) * i / (nsamples - 1);
            m = std::min(m, (*this)(x));
        }
        return m;
    }

    // f > 0 everywhere on [a,b], checked by dense sampling.
    void require_positive(double a, double b, int nsamples = 1000) const {
        for (int i = 0; i < nsamples; ++i) {
            const double x = a + (b - a) * i / (nsamples - 1);
            if (!((*this)(x) > 0.0))
                throw ValidationError("force: f(x1) must be strictly positive on the nozzle; f(" +
                                      std::to_string(x) + ") = " + std::to_string((*this)(x)));
        }
    }

    void require_nonnegative(double a, double b, int nsamples = 1000) const {
        for (int i = 0; i < nsamples; ++i) {
            const double x = a + (b - a) * i / (nsamples - 1);
            if ((*this)(x) < 0.0)
                throw ValidationError("force: f(x1) must be nonnegative on the nozzle; f(" +
                                      std::to_string(x) + ") = " + std::to_string((*this)(x)));
        }
    }

    const std::vector<double>& coeffs() const { return coeffs_; }
    double reference_point() const { return x_ref_; }

private:
    std::vector<double> coeffs_; // lowest order first
    double x_ref_;               // gauge point, Phi(x_ref) = 0
};

} // namespace shocknozzle
