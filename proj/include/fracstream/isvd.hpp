#pragma once

// Streaming truncated SVD of a column stream u_1, u_2, ... .
//
// The state keeps U_l ~ Q diag(sigma) R^T. Columns whose residual against span(Q)
// is below tol are not absorbed immediately: their coefficient vectors d = Q^T u
// are queued and folded in as one batch the next time the basis has to grow (or on
// finalize). A column with a large residual borders the core matrix,
//
//     Ybar = [ diag(sigma)  d ]
//            [      0       p ],
//
// whose (k+1) x (k+1) SVD rotates [Q | e]. The new trailing singular value is
// dropped when it falls below tol times the sum of all k+1 singular values.

#include "fracstream/linalg.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace fracstream::isvd {

using linalg::DenseMatrix;
using linalg::SvdTriple;
using linalg::Vector;

enum class UpdateKind {
    buffered,   ///< residual below tol, column queued
    grown,      ///< bordered update kept all k+1 singular values
    truncated,  ///< bordered update dropped the trailing singular value
};

/// What happened inside one update; enough to check the interlacing bounds
/// between the core singular values before and after a bordered update.
struct UpdateInfo {
    UpdateKind kind = UpdateKind::buffered;
    double residual = 0.0;   ///< p = ||u - Q Q^T u||
    Vector sigma_before;     ///< core singular values entering the bordered SVD (after any flush)
    Vector bordered_sigma;   ///< all k+1 singular values of Ybar
    bool reorthogonalized = false;
    bool flushed = false;    ///< a queued batch was folded in during this call
};

struct IsvdOptions {
    double tol = 1e-12;
    /// Fold the queue early once it holds max(2k, min_flush_width) columns.
    /// Zero disables the early flush.
    std::size_t min_flush_width = 64;
};

class IncrementalSvd {
public:
    /// Starts from the first column. Throws InvalidInput when u1 is zero or
    /// non-finite, or when tol is outside (0, 1).
    IncrementalSvd(const Vector& u1, IsvdOptions options = {});

    UpdateInfo update(const Vector& u);

    /// Folds any queued columns into the factors. Idempotent.
    void finalize();

    /// Finalizes and returns Q, sigma, R. R has one row per presented column.
    SvdTriple factors();

    /// Q diag(sigma) r_j^T for the 1-based column number j. Queued columns are
    /// returned as Q d. Throws InvalidInput when j is 0 or past the stream.
    Vector reconstruct_column(std::size_t column_number) const;

    const DenseMatrix& basis() const { return q_; }
    const Vector& singular_values() const { return sigma_; }
    /// Right factor for the absorbed prefix (rows = absorbed_columns()).
    const DenseMatrix& right_factor() const { return r_; }
    /// Coefficient vectors of queued columns, each in the current basis.
    std::span<const Vector> queued() const { return queue_; }
    /// Queue materialized as a k x q block.
    DenseMatrix queued_block() const;

    std::size_t rank() const { return static_cast<std::size_t>(sigma_.size()); }
    std::size_t dimension() const { return static_cast<std::size_t>(q_.rows()); }
    std::size_t columns_seen() const { return columns_seen_; }
    std::size_t absorbed_columns() const { return static_cast<std::size_t>(r_.rows()); }
    std::size_t queue_length() const { return queue_.size(); }
    double tol() const { return options_.tol; }

    /// Increments whenever Q changes; lets callers cache products with Q.
    std::size_t basis_version() const { return basis_version_; }

    /// 8 (m k + l k + k^2 + k q): basis, right factor, core rotation and queue.
    std::size_t storage_bytes() const;

private:
    /// Folds the queue into sigma and R; returns the rotation Q must still absorb.
    DenseMatrix absorb_queue();
    void flush_queue();

    IsvdOptions options_;
    DenseMatrix q_;
    Vector sigma_;
    DenseMatrix r_;
    std::vector<Vector> queue_;
    std::size_t columns_seen_ = 0;
    std::size_t basis_version_ = 0;
};

/// Runs initialize, update over the remaining columns, and finalize.
SvdTriple build_full(const DenseMatrix& columns, IsvdOptions options = {});

/// Text column stream: header "m n", then n lines of m whitespace-separated values.
DenseMatrix read_column_stream(std::istream& in);

/// Writes Q, sigma and R as three arrays, each preceded by "<name> <rows> <cols>".
void write_factors(std::ostream& out, const SvdTriple& factors);

} // namespace fracstream::isvd
