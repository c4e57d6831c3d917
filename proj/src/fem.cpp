#include "fracstream/fem.hpp"

#include "fracstream/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fracstream::fem {

using linalg::SparseSpdMatrix;
using linalg::Triplet;
using linalg::Vector;

Grid2D::Grid2D(std::size_t n_side) : n_side_(n_side) {
    if (n_side < 2) {
        throw ConfigError("grid needs n_side >= 2, got " + std::to_string(n_side));
    }
    const std::size_t stride = n_side + 1;
    triangles_.reserve(2 * n_side * n_side);
    for (std::size_t j = 0; j < n_side; ++j) {
        for (std::size_t i = 0; i < n_side; ++i) {
            const std::size_t sw = i + j * stride;
            const std::size_t se = sw + 1;
            const std::size_t nw = sw + stride;
            const std::size_t ne = nw + 1;
            triangles_.push_back({sw, se, ne});
            triangles_.push_back({sw, ne, nw});
        }
    }
}

Point Grid2D::node(std::size_t global_id) const {
    const std::size_t stride = n_side_ + 1;
    return {static_cast<double>(global_id % stride) * h(), static_cast<double>(global_id / stride) * h()};
}

std::ptrdiff_t Grid2D::dof(std::size_t global_id) const {
    const std::size_t stride = n_side_ + 1;
    const std::size_t i = global_id % stride;
    const std::size_t j = global_id / stride;
    if (i == 0 || j == 0 || i == n_side_ || j == n_side_) {
        return kBoundary;
    }
    return static_cast<std::ptrdiff_t>((j - 1) * (n_side_ - 1) + (i - 1));
}

Point Grid2D::dof_point(std::size_t k) const {
    const std::size_t i = k % (n_side_ - 1) + 1;
    const std::size_t j = k / (n_side_ - 1) + 1;
    return {static_cast<double>(i) * h(), static_cast<double>(j) * h()};
}

namespace {

using LocalMatrix = std::array<std::array<double, 3>, 3>;

double triangle_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

LocalMatrix local_mass(double area) {
    LocalMatrix m{};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            m[a][b] = area / 12.0 * (a == b ? 2.0 : 1.0);
        }
    }
    return m;
}

LocalMatrix local_stiffness(const Point& p0, const Point& p1, const Point& p2) {
    const double area = triangle_area(p0, p1, p2);
    // Gradient of the barycentric coordinate opposite each edge.
    const std::array<double, 3> gx{p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
    const std::array<double, 3> gy{p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
    LocalMatrix k{};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            k[a][b] = (gx[a] * gx[b] + gy[a] * gy[b]) / (4.0 * area);
        }
    }
    return k;
}

template <typename LocalFn>
SparseSpdMatrix assemble(const Grid2D& grid, LocalFn&& local) {
    std::vector<Triplet> entries;
    entries.reserve(grid.triangle_count() * 9);
    for (std::size_t t = 0; t < grid.triangle_count(); ++t) {
        const auto& tri = grid.triangle(t);
        const std::array<Point, 3> p{grid.node(tri[0]), grid.node(tri[1]), grid.node(tri[2])};
        const LocalMatrix lm = local(p);
        for (int a = 0; a < 3; ++a) {
            const auto ra = grid.dof(tri[a]);
            if (ra == Grid2D::kBoundary) {
                continue;
            }
            entries.push_back({static_cast<std::size_t>(ra), static_cast<std::size_t>(ra), lm[a][a]});
            for (int b = a + 1; b < 3; ++b) {
                const auto rb = grid.dof(tri[b]);
                if (rb == Grid2D::kBoundary) {
                    continue;
                }
                // Mirrored pair inserted together keeps the assembled matrix exactly symmetric.
                entries.push_back({static_cast<std::size_t>(ra), static_cast<std::size_t>(rb), lm[a][b]});
                entries.push_back({static_cast<std::size_t>(rb), static_cast<std::size_t>(ra), lm[a][b]});
            }
        }
    }
    return SparseSpdMatrix::from_triplets(grid.dofs(), entries);
}

} // namespace

SparseSpdMatrix assemble_mass(const Grid2D& grid) {
    return assemble(grid, [](const std::array<Point, 3>& p) { return local_mass(triangle_area(p[0], p[1], p[2])); });
}

SparseSpdMatrix assemble_stiffness(const Grid2D& grid) {
    return assemble(grid, [](const std::array<Point, 3>& p) { return local_stiffness(p[0], p[1], p[2]); });
}

Vector assemble_load(const Grid2D& grid, const ScalarField& f, double t) {
    Vector b = Vector::Zero(static_cast<Eigen::Index>(grid.dofs()));
    for (std::size_t tr = 0; tr < grid.triangle_count(); ++tr) {
        const auto& tri = grid.triangle(tr);
        const std::array<Point, 3> p{grid.node(tri[0]), grid.node(tri[1]), grid.node(tri[2])};
        const double area = triangle_area(p[0], p[1], p[2]);
        // mid[e] is the midpoint of the edge opposite vertex e.
        std::array<double, 3> fmid{};
        for (int e = 0; e < 3; ++e) {
            const Point& a = p[(e + 1) % 3];
            const Point& c = p[(e + 2) % 3];
            fmid[e] = f(0.5 * (a.x + c.x), 0.5 * (a.y + c.y), t);
            if (!std::isfinite(fmid[e])) {
                throw InvalidInput("load: field is not finite at a quadrature point");
            }
        }
        for (int a = 0; a < 3; ++a) {
            const auto r = grid.dof(tri[a]);
            if (r == Grid2D::kBoundary) {
                continue;
            }
            // phi_a is 1/2 on the two edges touching vertex a and 0 on the opposite one.
            b[r] += area / 3.0 * 0.5 * (fmid[(a + 1) % 3] + fmid[(a + 2) % 3]);
        }
    }
    return b;
}

Vector l2_project(const Grid2D& grid, const ScalarField& g, const linalg::SpdSolver& mass_solver) {
    return mass_solver.solve(assemble_load(grid, g, 0.0));
}

Vector l2_project(const Grid2D& grid, const ScalarField& g) {
    return l2_project(grid, g, linalg::SpdSolver(assemble_mass(grid)));
}

double mass_norm(const SparseSpdMatrix& mass, const Vector& v) {
    return std::sqrt(std::max(0.0, v.dot(linalg::spmv(mass, v))));
}

} // namespace fracstream::fem
