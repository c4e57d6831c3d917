#include "fracstream/fracpde.hpp"

#include "fracstream/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <type_traits>

namespace fracstream::pde {

using linalg::DenseMatrix;

void FracConfig::validate() const {
    if (kind == ProblemKind::heat && !(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("heat problem needs 0 < alpha < 1, got " + std::to_string(alpha));
    }
    if (kind == ProblemKind::wave && !(alpha > 1.0 && alpha < 2.0)) {
        throw ConfigError("wave problem needs 1 < alpha < 2, got " + std::to_string(alpha));
    }
    if (!(final_time > 0.0) || !std::isfinite(final_time)) {
        throw ConfigError("final time must be positive");
    }
    if (steps == 0) {
        throw ConfigError("number of time steps must be at least 1");
    }
    if (!(tol > 0.0 && tol < 1.0)) {
        throw ConfigError("isvd tolerance must lie in (0, 1)");
    }
}

std::vector<double> l1_weights(double alpha, std::size_t n) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidInput("l1 weights need 0 < alpha < 1");
    }
    std::vector<double> beta(n);
    const double e = 1.0 - alpha;
    for (std::size_t j = 0; j < n; ++j) {
        beta[j] = std::pow(static_cast<double>(j + 1), e) - std::pow(static_cast<double>(j), e);
    }
    return beta;
}

std::vector<double> wave_weights(double alpha, std::size_t n) {
    if (!(alpha > 1.0 && alpha < 2.0)) {
        throw InvalidInput("wave weights need 1 < alpha < 2");
    }
    std::vector<double> beta(n);
    const double e = 2.0 - alpha;
    for (std::size_t k = 0; k < n; ++k) {
        beta[k] = std::pow(static_cast<double>(k + 1), e) - std::pow(static_cast<double>(k), e);
    }
    return beta;
}

Discretization discretize(const FracConfig& config) {
    config.validate();
    fem::Grid2D grid(config.n_side);
    auto mass = fem::assemble_mass(grid);
    auto stiffness = fem::assemble_stiffness(grid);
    const double gamma = config.kind == ProblemKind::heat ? std::tgamma(2.0 - config.alpha) : std::tgamma(3.0 - config.alpha);
    const double scale = gamma * std::pow(config.dt(), config.alpha);
    auto system_matrix = linalg::SparseSpdMatrix::combine(1.0, mass, scale, stiffness);
    linalg::SpdSolver system(system_matrix, config.backend);
    linalg::SpdSolver mass_solver(mass, config.backend);
    return Discretization{std::move(grid), std::move(mass), std::move(stiffness), scale, std::move(system),
                          std::move(mass_solver)};
}

double l2_discrepancy(const Discretization& disc, const Vector& a, const Vector& b) {
    return fem::mass_norm(disc.mass, a - b);
}

namespace {

using Clock = std::chrono::steady_clock;

// Dense store of mass-weighted snapshots M u_s, one column per snapshot.
class FullHistory {
public:
    FullHistory(Eigen::Index m, Eigen::Index capacity) : store_(m, capacity) {}

    void push(const Vector& mass_times_u) { store_.col(size_++) = mass_times_u; }

    /// sum_s weights[s] M u_s over all pushed snapshots.
    Vector weighted_sum(const Vector& weights) const {
        return store_.leftCols(size_) * weights.head(size_);
    }

    std::size_t bytes() const { return sizeof(double) * static_cast<std::size_t>(store_.size()); }

private:
    DenseMatrix store_;
    Eigen::Index size_ = 0;
};

// Snapshots u_s kept as an incremental SVD. Weighted sums are formed in the
// rank-k coefficient space and lifted once through the cached product M Q.
class CompressedHistory {
public:
    CompressedHistory(const linalg::SparseSpdMatrix& mass, isvd::IsvdOptions options)
        : mass_(mass), options_(options) {}

    void push(const Vector& u) {
        if (!svd_) {
            // Leading zero snapshots have zero coefficients; start once one is nonzero.
            if (u.norm() == 0.0) {
                ++zero_prefix_;
                return;
            }
            svd_.emplace(u, options_);
        } else {
            svd_->update(u);
        }
        peak_bytes_ = std::max(peak_bytes_, svd_->storage_bytes());
        max_rank_ = std::max(max_rank_, svd_->rank());
        max_queue_ = std::max(max_queue_, svd_->queue_length());
    }

    /// sum_s weights[s] M u_s with u_s replaced by its compressed representation.
    Vector weighted_sum(const Vector& weights) {
        const auto m = static_cast<Eigen::Index>(mass_.rows());
        if (!svd_) {
            return Vector::Zero(m);
        }
        if (cached_version_ != svd_->basis_version() || mass_basis_.cols() == 0) {
            mass_basis_ = linalg::spmm(mass_, svd_->basis());
            cached_version_ = svd_->basis_version();
        }
        const auto offset = static_cast<Eigen::Index>(zero_prefix_);
        const auto absorbed = static_cast<Eigen::Index>(svd_->absorbed_columns());
        Vector coeff = svd_->singular_values().cwiseProduct(
            svd_->right_factor().transpose() * weights.segment(offset, absorbed));
        Eigen::Index s = offset + absorbed;
        for (const Vector& d : svd_->queued()) {
            coeff += weights[s++] * d;
        }
        return mass_basis_ * coeff;
    }

    void finalize() {
        if (svd_) {
            svd_->finalize();
            peak_bytes_ = std::max(peak_bytes_, svd_->storage_bytes());
        }
    }

    std::size_t rank() const { return svd_ ? svd_->rank() : 0; }
    std::size_t max_rank() const { return max_rank_; }
    std::size_t max_queue() const { return max_queue_; }
    std::size_t peak_bytes() const { return peak_bytes_; }

private:
    const linalg::SparseSpdMatrix& mass_;
    isvd::IsvdOptions options_;
    std::optional<isvd::IncrementalSvd> svd_;
    std::size_t zero_prefix_ = 0;
    DenseMatrix mass_basis_;
    std::size_t cached_version_ = 0;
    std::size_t peak_bytes_ = 0;
    std::size_t max_rank_ = 0;
    std::size_t max_queue_ = 0;
};

void require_kind(const FracConfig& config, ProblemKind kind) {
    config.validate();
    if (config.kind != kind) {
        throw ConfigError(kind == ProblemKind::heat ? "heat solver called with a wave configuration"
                                                    : "wave solver called with a heat configuration");
    }
}

double step_residual(const Discretization& disc, const Vector& mass_u, const Vector& u, const Vector& rhs) {
    const Vector r = mass_u + disc.scale * linalg::spmv(disc.stiffness, u) - rhs;
    return r.norm() / std::max(1.0, rhs.norm());
}

// History weights for heat step i (1-based): snapshot u_s, s = 1..i-1, stored at
// index s-1, enters with beta_{i-s-1} - beta_{i-s}.
void heat_history_weights(const std::vector<double>& beta, std::size_t i, Vector& weights) {
    for (std::size_t s = 1; s < i; ++s) {
        const std::size_t j = i - s;
        weights[static_cast<Eigen::Index>(s - 1)] = beta[j - 1] - beta[j];
    }
}

template <typename History>
RunReport run_heat(const FracConfig& config, const Discretization& disc, History& history) {
    const std::size_t n_steps = config.steps;
    const auto beta = l1_weights(config.alpha, n_steps);
    const Vector u0 = fem::l2_project(disc.grid, config.u0, disc.mass_solver);
    const Vector mass_u0 = linalg::spmv(disc.mass, u0);
    const double dt = config.dt();

    RunReport report;
    Vector weights = Vector::Zero(static_cast<Eigen::Index>(n_steps));
    Vector u = u0;
    const auto start = Clock::now();
    for (std::size_t i = 1; i <= n_steps; ++i) {
        Vector rhs = beta[i - 1] * mass_u0 +
                     disc.scale * fem::assemble_load(disc.grid, config.forcing, static_cast<double>(i) * dt);
        if (i > 1) {
            heat_history_weights(beta, i, weights);
            rhs += history.weighted_sum(weights.head(static_cast<Eigen::Index>(i - 1)));
        }
        u = disc.system.solve(rhs);
        const Vector mass_u = linalg::spmv(disc.mass, u);
        report.max_residual = std::max(report.max_residual, step_residual(disc, mass_u, u, rhs));
        if constexpr (std::is_same_v<History, FullHistory>) {
            history.push(mass_u);
        } else {
            history.push(u);
        }
        if (config.on_step) {
            config.on_step(i, u);
        }
    }
    report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    report.solution = u;
    return report;
}

// Second-difference history of the wave scheme before computing u^{n+1}.
// Snapshot u^j sits at stream index j+1 (u^{-1} at 0). The k-th term
// beta_k (u^{n-k+1} - 2 u^{n-k} + u^{n-k-1}) is spread over three indices.
void wave_history_weights(const std::vector<double>& beta, std::size_t n, Vector& weights) {
    weights.head(static_cast<Eigen::Index>(n + 2)).setZero();
    for (std::size_t k = 1; k <= n; ++k) {
        weights[static_cast<Eigen::Index>(n - k + 2)] += beta[k];
        weights[static_cast<Eigen::Index>(n - k + 1)] -= 2.0 * beta[k];
        weights[static_cast<Eigen::Index>(n - k)] += beta[k];
    }
}

template <typename History>
RunReport run_wave(const FracConfig& config, const Discretization& disc, History& history) {
    constexpr bool kFull = std::is_same_v<History, FullHistory>;
    const std::size_t n_steps = config.steps;
    const auto beta = wave_weights(config.alpha, n_steps);
    const double dt = config.dt();
    const Vector u0 = fem::l2_project(disc.grid, config.u0, disc.mass_solver);
    const Vector v0 = fem::l2_project(disc.grid, config.v0, disc.mass_solver);
    const Vector u_prev0 = u0 - dt * v0;

    Vector mass_prev = linalg::spmv(disc.mass, u_prev0);
    Vector mass_curr = linalg::spmv(disc.mass, u0);
    if constexpr (kFull) {
        history.push(mass_prev);
        history.push(mass_curr);
    } else {
        history.push(u_prev0);
        history.push(u0);
    }

    RunReport report;
    Vector weights = Vector::Zero(static_cast<Eigen::Index>(n_steps + 2));
    Vector u = u0;
    const auto start = Clock::now();
    for (std::size_t n = 0; n < n_steps; ++n) {
        const auto len = static_cast<Eigen::Index>(n + 2);
        Vector rhs = disc.scale * fem::assemble_load(disc.grid, config.forcing, static_cast<double>(n + 1) * dt);
        wave_history_weights(beta, n, weights);
        if constexpr (kFull) {
            // The k = 0 term M (2 u^n - u^{n-1}) joins the same product.
            weights[len - 1] -= 2.0;
            weights[len - 2] += 1.0;
            rhs -= history.weighted_sum(weights.head(len));
        } else {
            rhs += 2.0 * mass_curr - mass_prev;
            if (n > 0) {
                rhs -= history.weighted_sum(weights.head(len));
            }
        }
        u = disc.system.solve(rhs);
        Vector mass_u = linalg::spmv(disc.mass, u);
        report.max_residual = std::max(report.max_residual, step_residual(disc, mass_u, u, rhs));
        if constexpr (kFull) {
            history.push(mass_u);
        } else {
            history.push(u);
        }
        mass_prev = std::move(mass_curr);
        mass_curr = std::move(mass_u);
        if (config.on_step) {
            config.on_step(n + 1, u);
        }
    }
    report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    report.solution = u;
    return report;
}

isvd::IsvdOptions isvd_options(const FracConfig& config) {
    return {config.tol, config.min_flush_width};
}

} // namespace

RunReport solve_heat_standard(const FracConfig& config, const Discretization& disc) {
    require_kind(config, ProblemKind::heat);
    FullHistory history(static_cast<Eigen::Index>(disc.mass.rows()), static_cast<Eigen::Index>(config.steps));
    RunReport report = run_heat(config, disc, history);
    report.history_bytes = history.bytes();
    return report;
}

RunReport solve_heat_isvd(const FracConfig& config, const Discretization& disc) {
    require_kind(config, ProblemKind::heat);
    CompressedHistory history(disc.mass, isvd_options(config));
    RunReport report = run_heat(config, disc, history);
    history.finalize();
    report.rank = history.rank();
    report.max_rank = history.max_rank();
    report.max_queue = history.max_queue();
    report.history_bytes = history.peak_bytes();
    return report;
}

RunReport solve_wave_standard(const FracConfig& config, const Discretization& disc) {
    require_kind(config, ProblemKind::wave);
    FullHistory history(static_cast<Eigen::Index>(disc.mass.rows()), static_cast<Eigen::Index>(config.steps + 2));
    RunReport report = run_wave(config, disc, history);
    report.history_bytes = history.bytes();
    return report;
}

RunReport solve_wave_isvd(const FracConfig& config, const Discretization& disc) {
    require_kind(config, ProblemKind::wave);
    CompressedHistory history(disc.mass, isvd_options(config));
    RunReport report = run_wave(config, disc, history);
    history.finalize();
    report.rank = history.rank();
    report.max_rank = history.max_rank();
    report.max_queue = history.max_queue();
    report.history_bytes = history.peak_bytes();
    return report;
}

RunReport solve_heat_standard(const FracConfig& config) { return solve_heat_standard(config, discretize(config)); }
RunReport solve_heat_isvd(const FracConfig& config) { return solve_heat_isvd(config, discretize(config)); }
RunReport solve_wave_standard(const FracConfig& config) { return solve_wave_standard(config, discretize(config)); }
RunReport solve_wave_isvd(const FracConfig& config) { return solve_wave_isvd(config, discretize(config)); }

} // namespace fracstream::pde
