#include "fracstream/isvd.hpp"

#include "fracstream/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

namespace fracstream::isvd {

namespace {

void check_column(const Vector& u, Eigen::Index m) {
    if (u.size() != m) {
        throw InvalidInput("isvd: column length " + std::to_string(u.size()) + " does not match dimension " +
                           std::to_string(m));
    }
    if (!u.allFinite()) {
        throw InvalidInput("isvd: column has non-finite entries");
    }
}

} // namespace

IncrementalSvd::IncrementalSvd(const Vector& u1, IsvdOptions options) : options_(options) {
    if (!(options_.tol > 0.0 && options_.tol < 1.0)) {
        throw InvalidInput("isvd: tol must lie in (0, 1)");
    }
    check_column(u1, u1.size());
    const double norm = u1.norm();
    if (u1.size() == 0 || norm == 0.0) {
        throw InvalidInput("isvd: first column must be nonzero");
    }
    q_ = u1 / norm;
    sigma_ = Vector::Constant(1, norm);
    r_ = DenseMatrix::Ones(1, 1);
    columns_seen_ = 1;
}

DenseMatrix IncrementalSvd::absorb_queue() {
    const Eigen::Index k = sigma_.size();
    const Eigen::Index q = static_cast<Eigen::Index>(queue_.size());
    DenseMatrix y(k, k + q);
    y.leftCols(k) = sigma_.asDiagonal();
    y.rightCols(q) = queued_block();
    // Y is short and fat, so the thin SVD keeps the rank at k.
    const SvdTriple s = linalg::dense_svd_econ(y);
    sigma_ = s.sigma;
    DenseMatrix r(r_.rows() + q, k);
    r.topRows(r_.rows()) = r_ * s.v.topRows(k);
    r.bottomRows(q) = s.v.bottomRows(q);
    r_ = std::move(r);
    queue_.clear();
    return s.u;
}

void IncrementalSvd::flush_queue() {
    if (queue_.empty()) {
        return;
    }
    q_ = q_ * absorb_queue();
    ++basis_version_;
}

UpdateInfo IncrementalSvd::update(const Vector& u) {
    check_column(u, q_.rows());
    UpdateInfo info;
    Vector d = q_.transpose() * u;
    Vector e = u - q_ * d;
    double p = e.norm();
    ++columns_seen_;

    // Reorthogonalize when e has drifted back into span(Q). Checked against every
    // basis column, not just the first. A second pass runs when the first one
    // cancels most of e (Kahan's twice-is-enough rule); d and p absorb the
    // correction so that u = Q d + p e still holds.
    if (p >= options_.tol && (q_.transpose() * e).cwiseAbs().maxCoeff() > options_.tol * p) {
        for (int pass = 0; pass < 2; ++pass) {
            const Vector c = q_.transpose() * e;
            d += c;
            e -= q_ * c;
            const double before = p;
            p = e.norm();
            if (p >= before / std::sqrt(2.0)) {
                break;
            }
        }
        info.reorthogonalized = true;
    }
    info.residual = p;

    // A full-rank basis already spans everything; p is rounding noise then.
    if (p < options_.tol || rank() == dimension()) {
        queue_.push_back(std::move(d));
        const std::size_t cap = std::max<std::size_t>(2 * rank(), options_.min_flush_width);
        if (options_.min_flush_width > 0 && queue_.size() >= cap) {
            flush_queue();
            info.flushed = true;
        }
        return info;
    }

    const Eigen::Index k = sigma_.size();
    // Rotation of the current basis accumulated within this call; Q itself is
    // rewritten only once, after the bordered SVD.
    DenseMatrix rotation = DenseMatrix::Identity(k, k);
    if (!queue_.empty()) {
        rotation = absorb_queue();
        d = rotation.transpose() * d;
        info.flushed = true;
    }

    e /= p;

    DenseMatrix bordered = DenseMatrix::Zero(k + 1, k + 1);
    bordered.topLeftCorner(k, k) = sigma_.asDiagonal();
    bordered.topRightCorner(k, 1) = d;
    bordered(k, k) = p;
    const SvdTriple s = linalg::dense_svd_full(bordered);

    DenseMatrix full_rotation = DenseMatrix::Zero(k + 1, k + 1);
    full_rotation.topLeftCorner(k, k) = rotation;
    full_rotation(k, k) = 1.0;
    full_rotation = full_rotation * s.u;

    info.sigma_before = sigma_;
    info.bordered_sigma = s.sigma;

    const double total = s.sigma.sum();
    const bool keep_all = s.sigma[k] >= options_.tol * total;
    const Eigen::Index kept = keep_all ? k + 1 : k;
    info.kind = keep_all ? UpdateKind::grown : UpdateKind::truncated;

    DenseMatrix q_new = q_ * full_rotation.topLeftCorner(k, kept);
    q_new.noalias() += e * full_rotation.block(k, 0, 1, kept);
    q_ = std::move(q_new);
    sigma_ = s.sigma.head(kept);

    DenseMatrix r(r_.rows() + 1, kept);
    r.topRows(r_.rows()) = r_ * s.v.topLeftCorner(k, kept);
    r.bottomRows(1) = s.v.block(k, 0, 1, kept);
    r_ = std::move(r);
    ++basis_version_;
    return info;
}

void IncrementalSvd::finalize() { flush_queue(); }

SvdTriple IncrementalSvd::factors() {
    finalize();
    return {q_, sigma_, r_};
}

DenseMatrix IncrementalSvd::queued_block() const {
    DenseMatrix v(sigma_.size(), static_cast<Eigen::Index>(queue_.size()));
    for (std::size_t j = 0; j < queue_.size(); ++j) {
        v.col(static_cast<Eigen::Index>(j)) = queue_[j];
    }
    return v;
}

Vector IncrementalSvd::reconstruct_column(std::size_t column_number) const {
    if (column_number == 0 || column_number > columns_seen_) {
        throw InvalidInput("isvd: column number " + std::to_string(column_number) + " outside 1.." +
                           std::to_string(columns_seen_));
    }
    const std::size_t row = column_number - 1;
    if (row < absorbed_columns()) {
        const Vector coeff = sigma_.cwiseProduct(r_.row(static_cast<Eigen::Index>(row)).transpose());
        return q_ * coeff;
    }
    return q_ * queue_[row - absorbed_columns()];
}

std::size_t IncrementalSvd::storage_bytes() const {
    const std::size_t k = rank();
    return sizeof(double) * (dimension() * k + absorbed_columns() * k + k * k + k * queue_length());
}

SvdTriple build_full(const DenseMatrix& columns, IsvdOptions options) {
    if (columns.cols() == 0) {
        throw InvalidInput("isvd: empty column stream");
    }
    IncrementalSvd svd(columns.col(0), options);
    for (Eigen::Index j = 1; j < columns.cols(); ++j) {
        svd.update(columns.col(j));
    }
    return svd.factors();
}

DenseMatrix read_column_stream(std::istream& in) {
    long long m = 0;
    long long n = 0;
    if (!(in >> m >> n) || m <= 0 || n <= 0) {
        throw InvalidInput("column stream: expected header \"m n\" with positive sizes");
    }
    DenseMatrix a(m, n);
    for (long long j = 0; j < n; ++j) {
        for (long long i = 0; i < m; ++i) {
            if (!(in >> a(i, j))) {
                throw InvalidInput("column stream: missing value at column " + std::to_string(j + 1));
            }
        }
    }
    return a;
}

namespace {

void write_array(std::ostream& out, const char* name, const DenseMatrix& a) {
    out << name << ' ' << a.rows() << ' ' << a.cols() << '\n';
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out << (j ? " " : "") << a(i, j);
        }
        out << '\n';
    }
}

} // namespace

void write_factors(std::ostream& out, const SvdTriple& factors) {
    const auto old_precision = out.precision(17);
    write_array(out, "Q", factors.u);
    write_array(out, "sigma", factors.sigma);
    write_array(out, "R", factors.v);
    out.precision(old_precision);
}

} // namespace fracstream::isvd
