#pragma once

// Test-only oracles. Nothing here calls into the solver or ISVD code paths it is
// used to check: the reference schemes work on dense copies of M and A, use a
// dense LU factorization, and evaluate every history sum term by term.

#include "fracstream/fem.hpp"
#include "fracstream/fracpde.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace fracstream::testing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> normal;
    MatrixXd a(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            a(i, j) = normal(rng);
        }
    }
    return a;
}

/// Random m x n matrix with the given singular values (orthonormal factors from QR).
inline MatrixXd planted_rank(std::mt19937_64& rng, Eigen::Index m, Eigen::Index n, const VectorXd& sigma) {
    const Eigen::Index r = sigma.size();
    const MatrixXd left = Eigen::HouseholderQR<MatrixXd>(random_matrix(rng, m, r)).householderQ() * MatrixXd::Identity(m, r);
    const MatrixXd right = Eigen::HouseholderQR<MatrixXd>(random_matrix(rng, n, r)).householderQ() * MatrixXd::Identity(n, r);
    return left * sigma.asDiagonal() * right.transpose();
}

/// Singular values from Eigen's two-sided Jacobi SVD, descending.
inline VectorXd oracle_singular_values(const MatrixXd& a) {
    return Eigen::JacobiSVD<MatrixXd>(a).singularValues();
}

/// Standard L1 scheme for the heat problem with dense algebra. Returns every
/// solution u_1..u_N as columns.
inline MatrixXd dense_heat_reference(const pde::FracConfig& config) {
    const fem::Grid2D grid(config.n_side);
    const MatrixXd mass = fem::assemble_mass(grid).to_dense();
    const MatrixXd stiff = fem::assemble_stiffness(grid).to_dense();
    const double dt = config.final_time / static_cast<double>(config.steps);
    const double c = std::tgamma(2.0 - config.alpha) * std::pow(dt, config.alpha);
    const Eigen::PartialPivLU<MatrixXd> system(mass + c * stiff);
    const Eigen::PartialPivLU<MatrixXd> mass_lu(mass);

    auto beta = [&](std::size_t j) {
        const double e = 1.0 - config.alpha;
        return std::pow(static_cast<double>(j + 1), e) - std::pow(static_cast<double>(j), e);
    };

    const VectorXd u0 = mass_lu.solve(fem::assemble_load(grid, config.u0, 0.0));
    MatrixXd u(mass.rows(), static_cast<Eigen::Index>(config.steps));
    for (std::size_t n = 1; n <= config.steps; ++n) {
        VectorXd rhs = beta(n - 1) * (mass * u0) +
                       c * fem::assemble_load(grid, config.forcing, static_cast<double>(n) * dt);
        for (std::size_t j = 1; j < n; ++j) {
            rhs += (beta(j - 1) - beta(j)) * (mass * u.col(static_cast<Eigen::Index>(n - j - 1)));
        }
        u.col(static_cast<Eigen::Index>(n - 1)) = system.solve(rhs);
    }
    return u;
}

/// Diffusion-wave scheme with dense algebra, written directly from
/// (dbar u^{n+1}, v) + (grad u^{n+1}, grad v) = (f^{n+1}, v) multiplied by
/// Gamma(3 - alpha) dt^alpha. Returns u^1..u^N as columns.
inline MatrixXd dense_wave_reference(const pde::FracConfig& config) {
    const fem::Grid2D grid(config.n_side);
    const MatrixXd mass = fem::assemble_mass(grid).to_dense();
    const MatrixXd stiff = fem::assemble_stiffness(grid).to_dense();
    const double dt = config.final_time / static_cast<double>(config.steps);
    const double g = std::tgamma(3.0 - config.alpha) * std::pow(dt, config.alpha);
    const Eigen::PartialPivLU<MatrixXd> system(mass + g * stiff);
    const Eigen::PartialPivLU<MatrixXd> mass_lu(mass);

    auto beta = [&](std::size_t k) {
        const double e = 2.0 - config.alpha;
        return std::pow(static_cast<double>(k + 1), e) - std::pow(static_cast<double>(k), e);
    };

    const VectorXd u0 = mass_lu.solve(fem::assemble_load(grid, config.u0, 0.0));
    const VectorXd v0 = mass_lu.solve(fem::assemble_load(grid, config.v0, 0.0));
    // sol[j + 1] holds u^j, so sol[0] = u^{-1}.
    std::vector<VectorXd> sol{u0 - dt * v0, u0};
    auto at = [&](long j) -> const VectorXd& { return sol[static_cast<std::size_t>(j + 1)]; };

    MatrixXd out(mass.rows(), static_cast<Eigen::Index>(config.steps));
    for (std::size_t n = 0; n < config.steps; ++n) {
        const long ln = static_cast<long>(n);
        VectorXd rhs = g * fem::assemble_load(grid, config.forcing, static_cast<double>(n + 1) * dt);
        rhs += mass * (2.0 * at(ln) - at(ln - 1));
        for (long k = 1; k <= ln; ++k) {
            rhs -= beta(static_cast<std::size_t>(k)) * (mass * (at(ln - k + 1) - 2.0 * at(ln - k) + at(ln - k - 1)));
        }
        sol.push_back(system.solve(rhs));
        out.col(static_cast<Eigen::Index>(n)) = sol.back();
    }
    return out;
}

// Hat function of the node at (cx, cy) for cells split along (i,j)-(i+1,j+1),
// written independently of the assembly code.
inline double hat(double cx, double cy, double h, double x, double y) {
    const double dx = (x - cx) / h;
    const double dy = (y - cy) / h;
    return std::max(0.0, 1.0 - std::max({std::abs(dx), std::abs(dy), std::abs(dx - dy)}));
}

/// The P1 function with interior nodal values c, as a field.
inline fem::ScalarField p1_field(std::size_t n_side, VectorXd c) {
    return [n_side, c = std::move(c)](double x, double y, double) {
        const double h = 1.0 / static_cast<double>(n_side);
        const auto w = static_cast<Eigen::Index>(n_side - 1);
        double v = 0.0;
        for (Eigen::Index k = 0; k < c.size(); ++k) {
            v += c[k] * hat(static_cast<double>(k % w + 1) * h, static_cast<double>(k / w + 1) * h, h, x, y);
        }
        return v;
    };
}

inline double example_u0(double x, double y, double) { return x * y * (1.0 - x) * (1.0 - y); }

inline double example1_forcing(double x, double y, double t) {
    return 100.0 * std::sin(2.0 * M_PI * t * (x + y)) * x * (1.0 - x) * y * (1.0 - y);
}

inline pde::FracConfig example1(std::size_t n_side, std::size_t steps, double alpha = 0.1) {
    pde::FracConfig c;
    c.kind = pde::ProblemKind::heat;
    c.alpha = alpha;
    c.steps = steps;
    c.n_side = n_side;
    c.u0 = example_u0;
    c.forcing = example1_forcing;
    return c;
}

inline pde::FracConfig example2(std::size_t n_side, std::size_t steps, double alpha = 1.5) {
    pde::FracConfig c;
    c.kind = pde::ProblemKind::wave;
    c.alpha = alpha;
    c.steps = steps;
    c.n_side = n_side;
    c.u0 = example_u0;
    c.forcing = [](double, double, double) { return 1.0; };
    return c;
}

} // namespace fracstream::testing
