#include "fracstream/errors.hpp"
#include "fracstream/linalg.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace fracstream::linalg {

SparseSpdMatrix SparseSpdMatrix::from_triplets(std::size_t n, std::span<const Triplet> entries) {
    std::vector<Triplet> sorted(entries.begin(), entries.end());
    for (const auto& t : sorted) {
        if (t.row >= n || t.col >= n) {
            throw InvalidInput("sparse triplet index out of range");
        }
        if (!std::isfinite(t.value)) {
            throw InvalidInput("sparse triplet value is not finite");
        }
    }
    // Stable so that duplicate contributions are summed in insertion order; mirrored
    // (i,j)/(j,i) pairs inserted together then produce bit-identical sums.
    std::stable_sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseSpdMatrix out;
    out.n_ = n;
    out.row_ptr_.assign(n + 1, 0);
    for (std::size_t k = 0; k < sorted.size();) {
        const std::size_t r = sorted[k].row;
        const std::size_t c = sorted[k].col;
        double sum = 0.0;
        for (; k < sorted.size() && sorted[k].row == r && sorted[k].col == c; ++k) {
            sum += sorted[k].value;
        }
        out.col_idx_.push_back(c);
        out.values_.push_back(sum);
        ++out.row_ptr_[r + 1];
    }
    std::partial_sum(out.row_ptr_.begin(), out.row_ptr_.end(), out.row_ptr_.begin());

    for (std::size_t i = 0; i < n; ++i) {
        if (!(out.coeff(i, i) > 0.0)) {
            throw InvalidInput("diagonal entry " + std::to_string(i) + " is not positive");
        }
        for (std::size_t k = out.row_ptr_[i]; k < out.row_ptr_[i + 1]; ++k) {
            if (out.coeff(out.col_idx_[k], i) != out.values_[k]) {
                throw InvalidInput("matrix is not exactly symmetric");
            }
        }
    }
    return out;
}

double SparseSpdMatrix::coeff(std::size_t i, std::size_t j) const {
    const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) {
        return 0.0;
    }
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

DenseMatrix SparseSpdMatrix::to_dense() const {
    DenseMatrix d = DenseMatrix::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col_idx_[k])) = values_[k];
        }
    }
    return d;
}

SparseSpdMatrix SparseSpdMatrix::combine(double a, const SparseSpdMatrix& x, double b, const SparseSpdMatrix& y) {
    if (x.rows() != y.rows()) {
        throw InvalidInput("cannot combine sparse matrices of different size");
    }
    std::vector<Triplet> entries;
    entries.reserve(x.nonzeros() + y.nonzeros());
    for (std::size_t i = 0; i < x.n_; ++i) {
        for (std::size_t k = x.row_ptr_[i]; k < x.row_ptr_[i + 1]; ++k) {
            entries.push_back({i, x.col_idx_[k], a * x.values_[k]});
        }
        for (std::size_t k = y.row_ptr_[i]; k < y.row_ptr_[i + 1]; ++k) {
            entries.push_back({i, y.col_idx_[k], b * y.values_[k]});
        }
    }
    return from_triplets(x.rows(), entries);
}

Vector spmv(const SparseSpdMatrix& a, const Vector& x) {
    if (static_cast<std::size_t>(x.size()) != a.rows()) {
        throw InvalidInput("spmv: vector length does not match matrix size");
    }
    const auto ptr = a.row_offsets();
    const auto col = a.column_indices();
    const auto val = a.values();
    Vector y(x.size());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) {
            acc += val[k] * x[static_cast<Eigen::Index>(col[k])];
        }
        y[static_cast<Eigen::Index>(i)] = acc;
    }
    return y;
}

DenseMatrix spmm(const SparseSpdMatrix& a, const DenseMatrix& x) {
    if (static_cast<std::size_t>(x.rows()) != a.rows()) {
        throw InvalidInput("spmm: block row count does not match matrix size");
    }
    const auto ptr = a.row_offsets();
    const auto col = a.column_indices();
    const auto val = a.values();
    DenseMatrix y = DenseMatrix::Zero(x.rows(), x.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) {
            y.row(static_cast<Eigen::Index>(i)) += val[k] * x.row(static_cast<Eigen::Index>(col[k]));
        }
    }
    return y;
}

Vector conjugate_gradient(const SparseSpdMatrix& a, const Vector& b, double rel_tol, std::size_t max_iter) {
    if (static_cast<std::size_t>(b.size()) != a.rows()) {
        throw InvalidInput("conjugate_gradient: right-hand side length does not match matrix size");
    }
    if (max_iter == 0) {
        max_iter = 10 * a.rows() + 100;
    }
    Vector x = Vector::Zero(b.size());
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        return x;
    }
    Vector r = b;
    Vector p = r;
    double rr = r.squaredNorm();
    for (std::size_t it = 0; it < max_iter; ++it) {
        const Vector ap = spmv(a, p);
        const double pap = p.dot(ap);
        if (!(pap > 0.0)) {
            throw FactorizationError("conjugate gradient breakdown: matrix is not positive definite");
        }
        const double step = rr / pap;
        x += step * p;
        r -= step * ap;
        const double rr_next = r.squaredNorm();
        if (std::sqrt(rr_next) <= rel_tol * bnorm) {
            return x;
        }
        p = r + (rr_next / rr) * p;
        rr = rr_next;
    }
    // Recurrence residual can stall above rel_tol from rounding; accept if the true residual is close.
    if ((b - spmv(a, x)).norm() <= 10.0 * rel_tol * bnorm) {
        return x;
    }
    throw FactorizationError("conjugate gradient did not converge");
}

struct SpdSolver::Impl {
    using EigenSparse = Eigen::SparseMatrix<double>;
    EigenSparse eigen_matrix;
    Eigen::SimplicialLLT<EigenSparse, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
    SparseSpdMatrix matrix;
};

SpdSolver::SpdSolver(const SparseSpdMatrix& a, SolverBackend backend)
    : impl_(std::make_unique<Impl>()), backend_(backend) {
    impl_->matrix = a;
    if (backend_ == SolverBackend::conjugate_gradient) {
        return;
    }
    const auto n = static_cast<Eigen::Index>(a.rows());
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(a.nonzeros());
    const auto ptr = a.row_offsets();
    const auto col = a.column_indices();
    const auto val = a.values();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) {
            entries.emplace_back(static_cast<int>(i), static_cast<int>(col[k]), val[k]);
        }
    }
    impl_->eigen_matrix.resize(n, n);
    impl_->eigen_matrix.setFromTriplets(entries.begin(), entries.end());
    impl_->llt.compute(impl_->eigen_matrix);
    if (impl_->llt.info() != Eigen::Success) {
        throw FactorizationError("sparse Cholesky failed: matrix is not positive definite");
    }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

Vector SpdSolver::solve(const Vector& b) const {
    if (static_cast<std::size_t>(b.size()) != impl_->matrix.rows()) {
        throw InvalidInput("spd_solve: right-hand side length does not match matrix size");
    }
    if (!b.allFinite()) {
        throw InvalidInput("spd_solve: right-hand side is not finite");
    }
    if (backend_ == SolverBackend::conjugate_gradient) {
        return conjugate_gradient(impl_->matrix, b);
    }
    Vector x = impl_->llt.solve(b);
    if (impl_->llt.info() != Eigen::Success) {
        throw FactorizationError("sparse Cholesky solve failed");
    }
    return x;
}

Vector spd_solve(const SparseSpdMatrix& a, const Vector& b) {
    return SpdSolver(a).solve(b);
}

} // namespace fracstream::linalg
