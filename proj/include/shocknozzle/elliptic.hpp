#pragma once

// Non-local second-order elliptic problem on Q with the free constant kappa:
//
//   d11 phi + a2(y1) d22 phi + a1(y1) d1 phi - a0(y1) (kappa + phi(Ls, y2)) = r(y)
//   d1 phi(Ls, y2) - a3 (kappa + phi(Ls, y2)) = g1(y2)
//   d1 phi(L1, y2) = g2(y2)
//   d2 phi(y1, +-1) = 0,   phi(Ls, -1) = 0.
//
// Discretization: five-point second-order stencil, Neumann walls by ghost
// reflection, second-order one-sided differences in the Robin/Neumann rows,
// and the point normalization phi(Ls,-1) = 0 as an extra row paired with the
// extra unknown kappa. The square sparse system is factored once (SparseLU)
// and reused across solves with different data.

#include <cstdio>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "shocknozzle/errors.hpp"
#include "shocknozzle/grid.hpp"

namespace shocknozzle {

struct EllipticCoeffs {
    std::vector<double> a0, a1, a2; // sampled at the y1 nodes
    double a3 = 0.0;

    void validate(int n1) const {
        if (static_cast<int>(a0.size()) != n1 || static_cast<int>(a1.size()) != n1 ||
            static_cast<int>(a2.size()) != n1)
            throw ValidationError("elliptic: coefficient profiles must match the y1 grid");
        for (int i = 0; i < n1; ++i)
            if (!(a0[i] > 0.0) || !(a2[i] > 0.0))
                throw ValidationError("elliptic: solvability needs a0, a2 > 0; violated at node " +
                                      std::to_string(i));
        if (!(a3 > 0.0)) throw ValidationError("elliptic: solvability needs a3 > 0");
    }
};

struct PotentialSolution {
    Field phi;
    double kappa = 0.0;
    double residual_max = 0.0; // max-norm residual of the assembled linear system
};

class NonlocalEllipticSolver {
public:
    NonlocalEllipticSolver(const GridQ& grid, EllipticCoeffs coeffs)
        : grid_(grid), co_(std::move(coeffs)) {
        co_.validate(grid_.n1);
        assemble();
        factor();
    }

    const GridQ& grid() const { return grid_; }

    // Solve with the equation right-hand side r(y) given directly at the nodes.
    PotentialSolution solve(const Field& r, const std::vector<double>& g1,
                            const std::vector<double>& g2) const {
        check_data(r, g1, g2);
        const int n1 = grid_.n1, n2 = grid_.n2;
        Eigen::VectorXd b(unknowns());
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j) {
                double v;
                if (i == 0) v = g1[j];
                else if (i == n1 - 1) v = g2[j];
                else v = r(i, j);
                b[idx(i, j)] = v;
            }
        b[kappa_index()] = 0.0; // pinning row phi(Ls,-1) = 0

        Eigen::VectorXd x = lu_.solve(b);
        if (lu_.info() != Eigen::Success)
            throw SolverError("elliptic: sparse solve failed");

        // Normwise backward error of the assembled system; the raw max-norm
        // residual is not grid-independent because the stencil rows carry 1/h^2
        // factors, so it is measured against ||A||_inf ||x||_inf + ||b||_inf.
        const double raw = (A_ * x - b).cwiseAbs().maxCoeff();
        const double scale =
            a_row_norm_ * x.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff() + 1e-300;
        const double res = raw / scale;
        if (!(res <= 1e-11)) {
            char msg[128];
            std::snprintf(msg, sizeof(msg),
                          "elliptic: assembled-system residual %.3e exceeds 1e-11", res);
            throw SolverError(msg);
        }

        PotentialSolution sol;
        sol.phi = Field(grid_);
        for (int i = 0; i < n1; ++i)
            for (int j = 0; j < n2; ++j) sol.phi(i, j) = x[idx(i, j)];
        sol.kappa = x[kappa_index()];
        sol.residual_max = res;
        return sol;
    }

    // Spec form of the problem: right-hand side d/dy1 of a given field f,
    // formed by second-order differencing on the grid.
    PotentialSolution solve_with_f(const Field& f, const std::vector<double>& g1,
                                   const std::vector<double>& g2,
                                   bool validate_compatibility = true) const {
        if (validate_compatibility) {
            check_wall_compat_field(f);
            check_wall_compat_boundary(g1, "g1");
            check_wall_compat_boundary(g2, "g2");
        }
        return solve(d_dy1(f, grid_.h1), g1, g2);
    }

    // Coordinate-format dump (row col value) of the assembled matrix.
    void dump_matrix(std::ostream& os) const {
        for (int k = 0; k < A_.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(A_, k); it; ++it)
                os << it.row() << " " << it.col() << " " << it.value() << "\n";
    }

    // Relative wall-flatness validation used for boundary data that must satisfy
    // g'(+-1) = 0: the one-sided slope at the wall must be small against the
    // largest slope of the sample set.
    void check_wall_compat_boundary(const std::vector<double>& g, const char* name) const {
        if (static_cast<int>(g.size()) != grid_.n2)
            throw ValidationError(std::string("elliptic: ") + name +
                                  " must be sampled at the y2 nodes");
        const std::vector<double> dg = deriv_samples(g, grid_.h2);
        double dmax = 0.0;
        for (double v : dg) dmax = std::max(dmax, std::abs(v));
        const double floor = 1e-13 * std::max(1.0, max_abs(g));
        const double tol = 0.05 * dmax + floor;
        if (std::abs(dg.front()) > tol || std::abs(dg.back()) > tol)
            throw ValidationError(std::string("elliptic: ") + name +
                                  " must have zero slope at the walls y2 = +-1");
    }

private:
    void check_wall_compat_field(const Field& f) const {
        const Field df = d_dy2(f, grid_.h2);
        double dmax = 0.0, wall = 0.0;
        for (int i = 0; i < grid_.n1; ++i)
            for (int j = 0; j < grid_.n2; ++j) {
                dmax = std::max(dmax, std::abs(df(i, j)));
                if (j == 0 || j == grid_.n2 - 1) wall = std::max(wall, std::abs(df(i, j)));
            }
        const double floor = 1e-13 * std::max(1.0, f.max_abs());
        if (wall > 0.05 * dmax + floor)
            throw ValidationError("elliptic: right-hand-side field must have zero y2-slope "
                                  "at the walls");
    }

    static double max_abs(const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }

    void check_data(const Field& r, const std::vector<double>& g1,
                    const std::vector<double>& g2) const {
        if (r.n1() != grid_.n1 || r.n2() != grid_.n2)
            throw ValidationError("elliptic: right-hand side field does not match the grid");
        if (static_cast<int>(g1.size()) != grid_.n2 || static_cast<int>(g2.size()) != grid_.n2)
            throw ValidationError("elliptic: boundary data must be sampled at the y2 nodes");
    }

    int idx(int i, int j) const { return i * grid_.n2 + j; }
    int kappa_index() const { return grid_.n1 * grid_.n2; }
    int unknowns() const { return grid_.n1 * grid_.n2 + 1; }

    void assemble() {
        const int n1 = grid_.n1, n2 = grid_.n2;
        const double h1 = grid_.h1, h2 = grid_.h2;
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(unknowns()) * 8);

        for (int i = 1; i + 1 < n1; ++i) {
            const double a0 = co_.a0[i], a1 = co_.a1[i], a2 = co_.a2[i];
            for (int j = 0; j < n2; ++j) {
                const int row = idx(i, j);
                // d11 + a1 d1
                trip.emplace_back(row, idx(i - 1, j), 1.0 / (h1 * h1) - a1 / (2.0 * h1));
                trip.emplace_back(row, idx(i, j), -2.0 / (h1 * h1));
                trip.emplace_back(row, idx(i + 1, j), 1.0 / (h1 * h1) + a1 / (2.0 * h1));
                // a2 d22 with ghost reflection at the walls
                if (j == 0) {
                    trip.emplace_back(row, idx(i, 0), -2.0 * a2 / (h2 * h2));
                    trip.emplace_back(row, idx(i, 1), 2.0 * a2 / (h2 * h2));
                } else if (j == n2 - 1) {
                    trip.emplace_back(row, idx(i, n2 - 1), -2.0 * a2 / (h2 * h2));
                    trip.emplace_back(row, idx(i, n2 - 2), 2.0 * a2 / (h2 * h2));
                } else {
                    trip.emplace_back(row, idx(i, j - 1), a2 / (h2 * h2));
                    trip.emplace_back(row, idx(i, j), -2.0 * a2 / (h2 * h2));
                    trip.emplace_back(row, idx(i, j + 1), a2 / (h2 * h2));
                }
                // non-local coupling -a0 (kappa + phi(Ls, y2))
                trip.emplace_back(row, idx(0, j), -a0);
                trip.emplace_back(row, kappa_index(), -a0);
            }
        }
        // Robin rows at y1 = Ls; the one-sided stencil matches d_dy1 so that the
        // reconstructed v1 satisfies the discrete boundary condition exactly.
        for (int j = 0; j < n2; ++j) {
            const int row = idx(0, j);
            trip.emplace_back(row, idx(0, j), -11.0 / (6.0 * h1) - co_.a3);
            trip.emplace_back(row, idx(1, j), 18.0 / (6.0 * h1));
            trip.emplace_back(row, idx(2, j), -9.0 / (6.0 * h1));
            trip.emplace_back(row, idx(3, j), 2.0 / (6.0 * h1));
            trip.emplace_back(row, kappa_index(), -co_.a3);
        }
        // Neumann rows at y1 = L1
        for (int j = 0; j < n2; ++j) {
            const int row = idx(n1 - 1, j);
            trip.emplace_back(row, idx(n1 - 1, j), 11.0 / (6.0 * h1));
            trip.emplace_back(row, idx(n1 - 2, j), -18.0 / (6.0 * h1));
            trip.emplace_back(row, idx(n1 - 3, j), 9.0 / (6.0 * h1));
            trip.emplace_back(row, idx(n1 - 4, j), -2.0 / (6.0 * h1));
        }
        // Pinning row
        trip.emplace_back(kappa_index(), idx(0, 0), 1.0);

        A_ = Eigen::SparseMatrix<double>(unknowns(), unknowns());
        A_.setFromTriplets(trip.begin(), trip.end());
        A_.makeCompressed();
        a_row_norm_ = 0.0;
        Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(unknowns());
        for (int k = 0; k < A_.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(A_, k); it; ++it)
                rowsum[it.row()] += std::abs(it.value());
        a_row_norm_ = rowsum.maxCoeff();
    }

    void factor() {
        lu_.analyzePattern(A_);
        lu_.factorize(A_);
        if (lu_.info() != Eigen::Success)
            throw SolverError("elliptic: sparse factorization failed (singular or "
                              "ill-conditioned system)");
    }

    GridQ grid_;
    EllipticCoeffs co_;
    Eigen::SparseMatrix<double> A_;
    double a_row_norm_ = 0.0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

// One-shot convenience wrapper over the reusable solver.
inline PotentialSolution solve_nonlocal_elliptic(const EllipticCoeffs& coeffs, const Field& f,
                                                 const std::vector<double>& g1,
                                                 const std::vector<double>& g2,
                                                 const GridQ& grid) {
    NonlocalEllipticSolver solver(grid, coeffs);
    return solver.solve_with_f(f, g1, g2);
}

} // namespace shocknozzle
