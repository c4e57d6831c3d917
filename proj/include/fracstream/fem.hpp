#pragma once

// Piecewise-linear finite elements on a uniform right-triangulation of the unit
// square. Only interior nodes carry unknowns (homogeneous Dirichlet data).

#include "fracstream/linalg.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace fracstream::fem {

/// f(x, y, t). Time-independent data ignore t.
using ScalarField = std::function<double(double x, double y, double t)>;

struct Point {
    double x;
    double y;
};

/// Each grid cell [i h, (i+1) h] x [j h, (j+1) h] is split along its
/// (i, j)-(i+1, j+1) diagonal. Interior unknowns are numbered row-major:
/// node (i, j) with 1 <= i, j <= n_side - 1 maps to (j - 1)(n_side - 1) + (i - 1).
class Grid2D {
public:
    static constexpr std::ptrdiff_t kBoundary = -1;

    explicit Grid2D(std::size_t n_side);

    std::size_t n_side() const { return n_side_; }
    double h() const { return 1.0 / static_cast<double>(n_side_); }
    std::size_t dofs() const { return (n_side_ - 1) * (n_side_ - 1); }
    std::size_t triangle_count() const { return triangles_.size(); }

    /// Vertices of triangle t as global node ids (i + j (n_side + 1)), counter-clockwise.
    const std::array<std::size_t, 3>& triangle(std::size_t t) const { return triangles_[t]; }
    Point node(std::size_t global_id) const;
    /// Interior unknown index of a global node, or kBoundary.
    std::ptrdiff_t dof(std::size_t global_id) const;
    /// Coordinates of interior unknown k.
    Point dof_point(std::size_t k) const;

private:
    std::size_t n_side_;
    std::vector<std::array<std::size_t, 3>> triangles_;
};

inline Grid2D build_grid(std::size_t n_side) { return Grid2D(n_side); }

linalg::SparseSpdMatrix assemble_mass(const Grid2D& grid);
linalg::SparseSpdMatrix assemble_stiffness(const Grid2D& grid);

/// b_j = integral of f(., t) phi_j, using the edge-midpoint rule on each
/// triangle (exact for quadratics).
linalg::Vector assemble_load(const Grid2D& grid, const ScalarField& f, double t);

/// L2 projection of g(., 0) onto the interior P1 space: solves M c = load(g).
linalg::Vector l2_project(const Grid2D& grid, const ScalarField& g);
linalg::Vector l2_project(const Grid2D& grid, const ScalarField& g, const linalg::SpdSolver& mass_solver);

/// Sqrt(v^T M v): the L2(Omega) norm of the finite element function v.
double mass_norm(const linalg::SparseSpdMatrix& mass, const linalg::Vector& v);

} // namespace fracstream::fem
