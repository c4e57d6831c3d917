#pragma once

// Benchmark harness: runs the full-history and compressed-history solvers on the
// built-in example problems and reports time, memory, rank and discrepancy as CSV.

#include "fracstream/fracpde.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fracstream::bench {

enum class SolverSelection { standard, isvd, both };

/// Config file schema, one "key = value" per line, '#' starts a comment:
///
///   problem      example1 | example2 | heat | wave   (heat = example1, wave = example2)
///   alpha        fractional order; defaults to 0.1 (heat) or 1.5 (wave)
///   dt, T        step size and final time; T / dt must be an integer
///   grids        comma separated n_side list (alias: n_side)
///   tol          isvd tolerance
///   solvers      standard | isvd | both
///   output       csv path (empty: stdout)
///   seed         reserved, not used by the solvers
///   forcing, u0  default | zero
///   linear_solver cholesky | cg
///   timing       true | false; false writes an empty wall_seconds column
///   parallel     true | false; run grid sizes concurrently
struct BenchSpec {
    pde::ProblemKind problem = pde::ProblemKind::heat;
    double alpha = 0.1;
    double dt = 1e-3;
    double final_time = 1.0;
    std::vector<std::size_t> grids{8};
    double tol = 1e-12;
    SolverSelection solvers = SolverSelection::both;
    std::string output;
    std::uint64_t seed = 0;
    bool zero_forcing = false;
    bool zero_u0 = false;
    linalg::SolverBackend backend = linalg::SolverBackend::cholesky;
    bool timing = true;
    bool parallel = false;

    std::size_t steps() const;
    std::string problem_name() const;
};

/// Throws ConfigError naming the offending key.
BenchSpec parse_config(std::string_view text);

/// Full solver configuration for one grid size of a spec.
pde::FracConfig make_config(const BenchSpec& spec, std::size_t n_side);

struct CsvRow {
    std::string problem;
    double alpha = 0.0;
    std::size_t n_side = 0;
    double h = 0.0;
    double dt = 0.0;
    double tol = 0.0;
    std::string solver;
    double wall_seconds = 0.0;
    std::size_t history_bytes = 0;
    std::optional<std::size_t> rank_k;
    std::optional<double> l2_discrepancy;
    std::optional<std::string> error;  ///< set when the solver failed
};

inline constexpr std::string_view kCsvHeader =
    "problem,alpha,n_side,h,dt,tol,solver,wall_seconds,history_bytes,rank_k,l2_discrepancy";

/// One row per (grid, solver), grids in config order, standard before isvd.
/// A failing solver yields a row with `error` set; remaining grids still run.
std::vector<CsvRow> run_bench(const BenchSpec& spec);

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows, bool timing = true);

/// Peak history-store bytes counted by the solver: 8 m N for the full store
/// (8 m (N + 2) for the wave scheme), 8 (m k + l k + k^2 + k q) at the peak for
/// the compressed one.
inline std::size_t report_memory(const pde::RunReport& report) { return report.history_bytes; }

} // namespace fracstream::bench
