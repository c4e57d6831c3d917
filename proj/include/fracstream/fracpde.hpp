#pragma once

// L1-type time stepping for the time-fractional heat equation (0 < alpha < 1)
// and diffusion-wave equation (1 < alpha < 2) on the unit square, with either the
// full solution history or an incrementally compressed one.

#include "fracstream/fem.hpp"
#include "fracstream/isvd.hpp"
#include "fracstream/linalg.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace fracstream::pde {

using linalg::Vector;

enum class ProblemKind { heat, wave };

struct FracConfig {
    ProblemKind kind = ProblemKind::heat;
    double alpha = 0.1;
    double final_time = 1.0;
    std::size_t steps = 1000;
    std::size_t n_side = 8;
    double tol = 1e-12;
    fem::ScalarField forcing = [](double, double, double) { return 0.0; };
    fem::ScalarField u0 = [](double, double, double) { return 0.0; };
    fem::ScalarField v0 = [](double, double, double) { return 0.0; };
    linalg::SolverBackend backend = linalg::SolverBackend::cholesky;
    std::size_t min_flush_width = 64;
    /// Called after every step with the step number (1-based) and the new solution.
    std::function<void(std::size_t, const Vector&)> on_step;

    double dt() const { return final_time / static_cast<double>(steps); }
    /// Throws ConfigError when alpha does not match the problem kind, or T, N are invalid.
    void validate() const;
};

/// Grid, mass and stiffness matrices and the factored time-stepping matrix
/// M + c dt^alpha A. Built once and shared by every solver run on the same config.
struct Discretization {
    fem::Grid2D grid;
    linalg::SparseSpdMatrix mass;
    linalg::SparseSpdMatrix stiffness;
    double scale;  ///< Gamma(2 - alpha) dt^alpha (heat) or Gamma(3 - alpha) dt^alpha (wave)
    linalg::SpdSolver system;
    linalg::SpdSolver mass_solver;
};

Discretization discretize(const FracConfig& config);

struct RunReport {
    Vector solution;               ///< u at the final time
    std::size_t rank = 0;          ///< final rank of the compressed history, 0 for the full store
    std::size_t max_rank = 0;
    std::size_t max_queue = 0;     ///< longest queue of low-residual columns seen
    std::size_t history_bytes = 0; ///< peak bytes held by the history store
    double wall_seconds = 0.0;     ///< time-stepping loop only
    double max_residual = 0.0;     ///< max over steps of ||K u - b|| / max(1, ||b||)
    std::optional<double> l2_discrepancy;
};

/// beta_j = (j+1)^(1-alpha) - j^(1-alpha), j = 0..n-1, for 0 < alpha < 1.
std::vector<double> l1_weights(double alpha, std::size_t n);

/// beta_k = (k+1)^(2-alpha) - k^(2-alpha), k = 0..n-1, for 1 < alpha < 2.
std::vector<double> wave_weights(double alpha, std::size_t n);

RunReport solve_heat_standard(const FracConfig& config, const Discretization& disc);
RunReport solve_heat_isvd(const FracConfig& config, const Discretization& disc);
RunReport solve_wave_standard(const FracConfig& config, const Discretization& disc);
RunReport solve_wave_isvd(const FracConfig& config, const Discretization& disc);

RunReport solve_heat_standard(const FracConfig& config);
RunReport solve_heat_isvd(const FracConfig& config);
RunReport solve_wave_standard(const FracConfig& config);
RunReport solve_wave_isvd(const FracConfig& config);

/// Discrete L2 distance sqrt((a - b)^T M (a - b)).
double l2_discrepancy(const Discretization& disc, const Vector& a, const Vector& b);

} // namespace fracstream::pde
