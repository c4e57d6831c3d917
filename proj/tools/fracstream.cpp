// fracstream: command-line front end for the fractional PDE solvers.
//
//   fracstream bench --config <path> [--out <csv>]
//   fracstream solve --problem {example1|example2} --n-side <k> --dt <r> --tol <r> --solver {standard|isvd|both}
//   fracstream isvd --input <stream.txt> [--tol <r>] [--out <factors.txt>]
//
// Exit codes: 0 success, 1 configuration error, 2 solver failure.

#include "fracstream/bench.hpp"
#include "fracstream/errors.hpp"
#include "fracstream/isvd.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kConfigError = 1;
constexpr int kSolverError = 2;

int emit(const fracstream::bench::BenchSpec& spec, const std::vector<fracstream::bench::CsvRow>& rows) {
    int status = 0;
    for (const auto& row : rows) {
        if (row.error) {
            std::cerr << "fracstream: " << row.problem << " n_side=" << row.n_side << " " << row.solver
                      << " failed: " << *row.error << '\n';
            status = kSolverError;
        }
    }
    if (spec.output.empty()) {
        fracstream::bench::write_csv(std::cout, rows, spec.timing);
    } else {
        std::ofstream out(spec.output);
        if (!out) {
            std::cerr << "fracstream: cannot open " << spec.output << " for writing\n";
            return kConfigError;
        }
        fracstream::bench::write_csv(out, rows, spec.timing);
    }
    return status;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-fractional PDE solvers with incrementally compressed history"};
    app.require_subcommand(1);

    auto* bench = app.add_subcommand("bench", "Run a benchmark described by a config file");
    std::string config_path;
    std::string bench_out;
    bench->add_option("--config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
    bench->add_option("--out", bench_out, "CSV output path (overrides the config)");

    auto* solve = app.add_subcommand("solve", "Solve one built-in problem and print CSV rows");
    std::string problem = "example1";
    std::size_t n_side = 8;
    double dt = 1e-3;
    double tol = 1e-12;
    double final_time = 1.0;
    std::string solver = "both";
    std::string solve_out;
    bool no_timing = false;
    solve->add_option("--problem", problem)->check(CLI::IsMember({"example1", "example2"}));
    solve->add_option("--n-side", n_side, "sub-intervals per side of the unit square");
    solve->add_option("--dt", dt, "time step");
    solve->add_option("--T", final_time, "final time");
    solve->add_option("--tol", tol, "isvd tolerance");
    solve->add_option("--solver", solver)->check(CLI::IsMember({"standard", "isvd", "both"}));
    solve->add_option("--out", solve_out, "CSV output path");
    solve->add_flag("--no-timing", no_timing, "leave wall_seconds empty for reproducible output");

    auto* isvd_cmd = app.add_subcommand("isvd", "Compress a text column stream and print its factors");
    std::string input_path;
    std::string factors_out;
    double isvd_tol = 1e-12;
    isvd_cmd->add_option("--input", input_path, "header 'm n' then one column per line")
        ->required()
        ->check(CLI::ExistingFile);
    isvd_cmd->add_option("--tol", isvd_tol);
    isvd_cmd->add_option("--out", factors_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    using namespace fracstream;
    try {
        if (*bench) {
            std::ifstream in(config_path);
            std::stringstream text;
            text << in.rdbuf();
            auto spec = bench::parse_config(text.str());
            if (!bench_out.empty()) {
                spec.output = bench_out;
            }
            return emit(spec, bench::run_bench(spec));
        }
        if (*solve) {
            std::ostringstream text;
            text.precision(17);
            text << "problem = " << problem << "\ngrids = " << n_side << "\ntol = " << tol << "\nsolvers = " << solver
                 << "\ndt = " << dt << "\nT = " << final_time << "\ntiming = " << (no_timing ? "false" : "true")
                 << '\n';
            auto spec = bench::parse_config(text.str());
            spec.output = solve_out;
            return emit(spec, bench::run_bench(spec));
        }
        std::ifstream in(input_path);
        const auto columns = isvd::read_column_stream(in);
        const auto factors = isvd::build_full(columns, {isvd_tol});
        if (factors_out.empty()) {
            isvd::write_factors(std::cout, factors);
        } else {
            std::ofstream out(factors_out);
            isvd::write_factors(out, factors);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "fracstream: " << e.what() << '\n';
        return kConfigError;
    } catch (const InvalidInput& e) {
        std::cerr << "fracstream: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "fracstream: " << e.what() << '\n';
        return kSolverError;
    }
}
