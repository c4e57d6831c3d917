#include "fracstream/bench.hpp"

#include "fracstream/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <future>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fracstream::bench {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double parse_real(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end || !std::isfinite(out)) {
        throw ConfigError(key + ": expected a real number, got '" + value + "'");
    }
    return out;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
    std::size_t out = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(key + ": expected a nonnegative integer, got '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no") {
        return false;
    }
    throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

bool parse_zero_flag(const std::string& key, const std::string& value) {
    if (value == "default") {
        return false;
    }
    if (value == "zero") {
        return true;
    }
    throw ConfigError(key + ": expected 'default' or 'zero', got '" + value + "'");
}

double example_u0(double x, double y, double) { return x * y * (1.0 - x) * (1.0 - y); }

double example1_forcing(double x, double y, double t) {
    return 100.0 * std::sin(2.0 * std::numbers::pi * t * (x + y)) * x * (1.0 - x) * y * (1.0 - y);
}

std::string format_real(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

std::size_t BenchSpec::steps() const {
    return static_cast<std::size_t>(std::llround(final_time / dt));
}

std::string BenchSpec::problem_name() const {
    return problem == pde::ProblemKind::heat ? "example1" : "example2";
}

BenchSpec parse_config(std::string_view text) {
    std::map<std::string, std::string> entries;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string stripped = trim(line);
        if (stripped.empty()) {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        std::string key = trim(std::string_view(stripped).substr(0, eq));
        if (key == "n_side") {
            key = "grids";
        }
        entries[key] = trim(std::string_view(stripped).substr(eq + 1));
    }

    BenchSpec spec;
    bool alpha_given = false;
    if (auto it = entries.find("problem"); it != entries.end()) {
        const std::string& v = it->second;
        if (v == "example1" || v == "heat") {
            spec.problem = pde::ProblemKind::heat;
        } else if (v == "example2" || v == "wave") {
            spec.problem = pde::ProblemKind::wave;
        } else {
            throw ConfigError("problem: expected example1, example2, heat or wave, got '" + v + "'");
        }
    }
    if (auto it = entries.find("alpha"); it != entries.end()) {
        spec.alpha = parse_real("alpha", it->second);
        alpha_given = true;
        const bool heat_range = spec.alpha > 0.0 && spec.alpha < 1.0;
        const bool wave_range = spec.alpha > 1.0 && spec.alpha < 2.0;
        if (!heat_range && !wave_range) {
            throw ConfigError("alpha: " + it->second + " is outside (0, 1) and (1, 2)");
        }
        if (!entries.contains("problem")) {
            spec.problem = heat_range ? pde::ProblemKind::heat : pde::ProblemKind::wave;
        }
        if (spec.problem == pde::ProblemKind::heat && !heat_range) {
            throw ConfigError("alpha: heat problem needs 0 < alpha < 1, got " + it->second);
        }
        if (spec.problem == pde::ProblemKind::wave && !wave_range) {
            throw ConfigError("alpha: wave problem needs 1 < alpha < 2, got " + it->second);
        }
    }
    if (!alpha_given) {
        spec.alpha = spec.problem == pde::ProblemKind::heat ? 0.1 : 1.5;
    }

    for (const auto& [key, value] : entries) {
        if (key == "problem" || key == "alpha") {
            continue;
        }
        if (key == "dt") {
            spec.dt = parse_real(key, value);
            if (!(spec.dt > 0.0)) {
                throw ConfigError("dt: must be positive");
            }
        } else if (key == "T") {
            spec.final_time = parse_real(key, value);
            if (!(spec.final_time > 0.0)) {
                throw ConfigError("T: must be positive");
            }
        } else if (key == "grids") {
            spec.grids.clear();
            std::istringstream list(value);
            std::string item;
            while (std::getline(list, item, ',')) {
                const std::size_t n = parse_count(key, trim(item));
                if (n < 2) {
                    throw ConfigError("grids: n_side must be at least 2, got " + std::to_string(n));
                }
                spec.grids.push_back(n);
            }
            if (spec.grids.empty()) {
                throw ConfigError("grids: list is empty");
            }
        } else if (key == "tol") {
            spec.tol = parse_real(key, value);
            if (!(spec.tol > 0.0 && spec.tol < 1.0)) {
                throw ConfigError("tol: must lie in (0, 1)");
            }
        } else if (key == "solvers") {
            if (value == "standard") {
                spec.solvers = SolverSelection::standard;
            } else if (value == "isvd") {
                spec.solvers = SolverSelection::isvd;
            } else if (value == "both") {
                spec.solvers = SolverSelection::both;
            } else {
                throw ConfigError("solvers: expected standard, isvd or both, got '" + value + "'");
            }
        } else if (key == "output") {
            spec.output = value;
        } else if (key == "seed") {
            spec.seed = parse_count(key, value);
        } else if (key == "forcing") {
            spec.zero_forcing = parse_zero_flag(key, value);
        } else if (key == "u0") {
            spec.zero_u0 = parse_zero_flag(key, value);
        } else if (key == "linear_solver") {
            if (value == "cholesky") {
                spec.backend = linalg::SolverBackend::cholesky;
            } else if (value == "cg") {
                spec.backend = linalg::SolverBackend::conjugate_gradient;
            } else {
                throw ConfigError("linear_solver: expected cholesky or cg, got '" + value + "'");
            }
        } else if (key == "timing") {
            spec.timing = parse_bool(key, value);
        } else if (key == "parallel") {
            spec.parallel = parse_bool(key, value);
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }

    const double ratio = spec.final_time / spec.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || std::round(ratio) < 1.0) {
        throw ConfigError("dt: T / dt = " + format_real(ratio) + " is not a positive integer");
    }
    return spec;
}

pde::FracConfig make_config(const BenchSpec& spec, std::size_t n_side) {
    pde::FracConfig config;
    config.kind = spec.problem;
    config.alpha = spec.alpha;
    config.final_time = spec.final_time;
    config.steps = spec.steps();
    config.n_side = n_side;
    config.tol = spec.tol;
    config.backend = spec.backend;
    const auto zero = [](double, double, double) { return 0.0; };
    config.u0 = spec.zero_u0 ? fem::ScalarField(zero) : fem::ScalarField(example_u0);
    config.v0 = zero;
    if (spec.zero_forcing) {
        config.forcing = zero;
    } else if (spec.problem == pde::ProblemKind::heat) {
        config.forcing = example1_forcing;
    } else {
        config.forcing = [](double, double, double) { return 1.0; };
    }
    return config;
}

namespace {

std::vector<CsvRow> run_grid(const BenchSpec& spec, std::size_t n_side) {
    const auto config = make_config(spec, n_side);
    CsvRow base;
    base.problem = spec.problem_name();
    base.alpha = spec.alpha;
    base.n_side = n_side;
    base.h = 1.0 / static_cast<double>(n_side);
    base.dt = spec.dt;
    base.tol = spec.tol;

    std::optional<pde::Discretization> disc;
    std::string setup_error;
    try {
        disc.emplace(pde::discretize(config));
    } catch (const std::exception& ex) {
        setup_error = ex.what();
    }

    const bool heat = spec.problem == pde::ProblemKind::heat;
    std::vector<CsvRow> rows;
    std::optional<linalg::Vector> standard_solution;
    std::optional<linalg::Vector> isvd_solution;
    auto run_one = [&](const std::string& solver, bool compressed) {
        CsvRow row = base;
        row.solver = solver;
        if (!disc) {
            row.error = setup_error;
            rows.push_back(row);
            return;
        }
        try {
            pde::RunReport report;
            if (compressed) {
                report = heat ? pde::solve_heat_isvd(config, *disc) : pde::solve_wave_isvd(config, *disc);
                row.rank_k = report.rank;
                isvd_solution = report.solution;
            } else {
                report = heat ? pde::solve_heat_standard(config, *disc) : pde::solve_wave_standard(config, *disc);
                standard_solution = report.solution;
            }
            row.wall_seconds = report.wall_seconds;
            row.history_bytes = report_memory(report);
        } catch (const std::exception& ex) {
            row.error = ex.what();
        }
        rows.push_back(row);
    };

    if (spec.solvers != SolverSelection::isvd) {
        run_one("standard", false);
    }
    if (spec.solvers != SolverSelection::standard) {
        run_one("isvd", true);
    }
    if (standard_solution && isvd_solution) {
        const double diff = pde::l2_discrepancy(*disc, *standard_solution, *isvd_solution);
        for (auto& row : rows) {
            row.l2_discrepancy = diff;
        }
    }
    return rows;
}

} // namespace

std::vector<CsvRow> run_bench(const BenchSpec& spec) {
    if (spec.grids.empty()) {
        throw ConfigError("grids: list is empty");
    }
    std::vector<CsvRow> rows;
    if (spec.parallel) {
        std::vector<std::future<std::vector<CsvRow>>> jobs;
        for (const std::size_t n : spec.grids) {
            jobs.push_back(std::async(std::launch::async, [&spec, n] { return run_grid(spec, n); }));
        }
        for (auto& job : jobs) {
            auto part = job.get();
            rows.insert(rows.end(), part.begin(), part.end());
        }
    } else {
        for (const std::size_t n : spec.grids) {
            auto part = run_grid(spec, n);
            rows.insert(rows.end(), part.begin(), part.end());
        }
    }
    return rows;
}

void write_csv(std::ostream& out, const std::vector<CsvRow>& rows, bool timing) {
    out << kCsvHeader << '\n';
    for (const auto& row : rows) {
        out << row.problem << ',' << format_real(row.alpha) << ',' << row.n_side << ',' << format_real(row.h) << ','
            << format_real(row.dt) << ',' << format_real(row.tol) << ',' << row.solver << ',';
        if (row.error) {
            out << "error,error,error,error\n";
            continue;
        }
        if (timing) {
            out << format_real(row.wall_seconds);
        }
        out << ',' << row.history_bytes << ',';
        if (row.rank_k) {
            out << *row.rank_k;
        }
        out << ',';
        if (row.l2_discrepancy) {
            out << format_real(*row.l2_discrepancy);
        }
        out << '\n';
    }
}

} // namespace fracstream::bench
