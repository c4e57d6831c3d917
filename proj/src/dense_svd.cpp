#include "fracstream/errors.hpp"
#include "fracstream/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace fracstream::linalg {

namespace {

constexpr int kMaxSweeps = 80;

void check_input(const DenseMatrix& a) {
    if (a.rows() == 0 || a.cols() == 0) {
        throw InvalidInput("svd of an empty matrix");
    }
    if (!a.allFinite()) {
        throw InvalidInput("svd input has non-finite entries");
    }
}

// One-sided (Hestenes) Jacobi on a matrix with rows >= cols. On return the
// columns of w are mutually orthogonal and a = w * v^T.
void hestenes_jacobi(DenseMatrix& w, DenseMatrix& v) {
    const Eigen::Index n = w.cols();
    v.setIdentity(n, n);
    if (n < 2) {
        return;
    }
    const double eps = std::numeric_limits<double>::epsilon();
    Eigen::VectorXd norms2 = w.colwise().squaredNorm().transpose();
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double alpha = norms2[p];
                const double beta = norms2[q];
                if (alpha == 0.0 || beta == 0.0) {
                    continue;
                }
                const double gamma = w.col(p).dot(w.col(q));
                if (std::abs(gamma) <= eps * std::sqrt(alpha * beta)) {
                    continue;
                }
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (Eigen::Index i = 0; i < w.rows(); ++i) {
                    const double wp = w(i, p);
                    const double wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double vp = v(i, p);
                    const double vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
                norms2[p] = w.col(p).squaredNorm();
                norms2[q] = w.col(q).squaredNorm();
            }
        }
        if (!rotated) {
            return;
        }
    }
}

// Fill columns [filled, cols) of u with an orthonormal complement of the first
// `filled` columns, drawing candidates from the coordinate axes.
void complete_basis(DenseMatrix& u, Eigen::Index filled) {
    const Eigen::Index m = u.rows();
    for (Eigen::Index j = filled; j < u.cols(); ++j) {
        Eigen::VectorXd best;
        double best_norm = -1.0;
        for (Eigen::Index axis = 0; axis < m; ++axis) {
            Eigen::VectorXd cand = Eigen::VectorXd::Unit(m, axis);
            for (int pass = 0; pass < 2; ++pass) {
                cand -= u.leftCols(j) * (u.leftCols(j).transpose() * cand);
            }
            const double nrm = cand.norm();
            if (nrm > best_norm) {
                best_norm = nrm;
                best = cand;
            }
            if (nrm > 0.5) {
                break;
            }
        }
        u.col(j) = best / best_norm;
    }
}

void fix_signs(SvdTriple& out) {
    // Columns past min(rows, cols) have no singular partner and flip alone.
    const Eigen::Index paired = out.sigma.size();
    for (Eigen::Index j = 0; j < out.u.cols(); ++j) {
        Eigen::Index arg = 0;
        out.u.col(j).cwiseAbs().maxCoeff(&arg);
        if (out.u(arg, j) < 0.0) {
            out.u.col(j) *= -1.0;
            if (j < paired) {
                out.v.col(j) *= -1.0;
            }
        }
    }
}

// Thin SVD of a tall (rows >= cols) matrix; u is rows x cols.
SvdTriple tall_svd(const DenseMatrix& a) {
    DenseMatrix w = a;
    DenseMatrix v;
    hestenes_jacobi(w, v);

    const Eigen::Index n = w.cols();
    Eigen::VectorXd norms = w.colwise().norm().transpose();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return norms[x] > norms[y]; });

    SvdTriple out;
    out.u.resize(w.rows(), n);
    out.v.resize(n, n);
    out.sigma.resize(n);
    Eigen::Index nonzero = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index src = order[static_cast<std::size_t>(j)];
        out.sigma[j] = norms[src];
        out.v.col(j) = v.col(src);
        if (norms[src] > std::numeric_limits<double>::min()) {
            out.u.col(j) = w.col(src) / norms[src];
            ++nonzero;
        } else {
            out.sigma[j] = 0.0;
        }
    }
    if (nonzero < n) {
        complete_basis(out.u, nonzero);
    }
    return out;
}

SvdTriple transpose_result(SvdTriple t) {
    std::swap(t.u, t.v);
    return t;
}

} // namespace

SvdTriple dense_svd_econ(const DenseMatrix& a) {
    check_input(a);
    SvdTriple out = a.rows() >= a.cols() ? tall_svd(a) : transpose_result(tall_svd(a.transpose()));
    fix_signs(out);
    return out;
}

SvdTriple dense_svd_full(const DenseMatrix& a) {
    check_input(a);
    SvdTriple out = a.rows() >= a.cols() ? tall_svd(a) : transpose_result(tall_svd(a.transpose()));
    const Eigen::Index k = out.sigma.size();
    if (out.u.cols() < a.rows()) {
        out.u.conservativeResize(Eigen::NoChange, a.rows());
        complete_basis(out.u, k);
    }
    if (out.v.cols() < a.cols()) {
        out.v.conservativeResize(Eigen::NoChange, a.cols());
        complete_basis(out.v, k);
    }
    fix_signs(out);
    return out;
}

double orthogonality_error(const DenseMatrix& q) {
    if (q.cols() == 0) {
        return 0.0;
    }
    const DenseMatrix gram = q.transpose() * q;
    return (gram - DenseMatrix::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

} // namespace fracstream::linalg
