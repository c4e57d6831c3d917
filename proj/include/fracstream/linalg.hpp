#pragma once

// Dense and sparse linear algebra shared by the FEM, ISVD and time-stepping code.
//
// Dense matrices are Eigen::MatrixXd, i.e. column-major storage. Sparse SPD
// matrices use a compressed-row layout owned by SparseSpdMatrix.

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace fracstream::linalg {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Symmetric sparse matrix in compressed-row form. Column indices within a row
/// are sorted and unique. Construction checks structural and numerical symmetry
/// and strictly positive diagonal.
class SparseSpdMatrix {
public:
    SparseSpdMatrix() = default;

    /// Sums duplicate entries. Throws InvalidInput if the summed matrix is not
    /// exactly symmetric or has a nonpositive diagonal entry.
    static SparseSpdMatrix from_triplets(std::size_t n, std::span<const Triplet> entries);

    std::size_t rows() const { return n_; }
    std::size_t nonzeros() const { return values_.size(); }

    std::span<const std::size_t> row_offsets() const { return row_ptr_; }
    std::span<const std::size_t> column_indices() const { return col_idx_; }
    std::span<const double> values() const { return values_; }

    /// Entry lookup by binary search in the row; zero when absent.
    double coeff(std::size_t i, std::size_t j) const;

    DenseMatrix to_dense() const;

    /// Linear combination a*this + b*other; both must share dimension.
    static SparseSpdMatrix combine(double a, const SparseSpdMatrix& x, double b, const SparseSpdMatrix& y);

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

Vector spmv(const SparseSpdMatrix& a, const Vector& x);

/// Sparse times dense block, column by column.
DenseMatrix spmm(const SparseSpdMatrix& a, const DenseMatrix& x);

enum class SolverBackend { cholesky, conjugate_gradient };

/// Factorization of a constant SPD matrix, reused across many right-hand sides.
/// Immutable once built, so a single instance may be shared between threads.
class SpdSolver {
public:
    explicit SpdSolver(const SparseSpdMatrix& a, SolverBackend backend = SolverBackend::cholesky);
    ~SpdSolver();
    SpdSolver(SpdSolver&&) noexcept;
    SpdSolver& operator=(SpdSolver&&) noexcept;

    Vector solve(const Vector& b) const;
    SolverBackend backend() const { return backend_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    SolverBackend backend_;
};

/// One-shot convenience: factor then solve.
Vector spd_solve(const SparseSpdMatrix& a, const Vector& b);

/// Unpreconditioned conjugate gradient, stops at ||r|| <= rel_tol * ||b||.
Vector conjugate_gradient(const SparseSpdMatrix& a, const Vector& b, double rel_tol = 1e-14,
                          std::size_t max_iter = 0);

/// Result of a dense SVD: a = u * diag(sigma) * v^T, sigma nonincreasing.
/// Each column of u has its largest-magnitude entry positive.
struct SvdTriple {
    DenseMatrix u;
    Vector sigma;
    DenseMatrix v;
};

/// Thin SVD, min(rows, cols) singular triplets.
SvdTriple dense_svd_econ(const DenseMatrix& a);

/// Full SVD with square orthogonal u (rows x rows) and v (cols x cols).
/// sigma still has min(rows, cols) entries.
SvdTriple dense_svd_full(const DenseMatrix& a);

/// Largest |entry| of Q^T Q - I.
double orthogonality_error(const DenseMatrix& q);

} // namespace fracstream::linalg
