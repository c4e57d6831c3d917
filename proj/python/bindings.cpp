#include "fracstream/bench.hpp"
#include "fracstream/errors.hpp"
#include "fracstream/fem.hpp"
#include "fracstream/fracpde.hpp"
#include "fracstream/isvd.hpp"
#include "fracstream/linalg.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace fracstream;

namespace {

py::tuple svd_tuple(const linalg::SvdTriple& s) { return py::make_tuple(s.u, s.sigma, s.v); }

const char* kind_name(isvd::UpdateKind kind) {
    switch (kind) {
    case isvd::UpdateKind::buffered:
        return "buffered";
    case isvd::UpdateKind::grown:
        return "grown";
    case isvd::UpdateKind::truncated:
        return "truncated";
    }
    return "unknown";
}

py::dict report_dict(const pde::RunReport& r) {
    py::dict d;
    d["solution"] = r.solution;
    d["rank"] = r.rank;
    d["max_rank"] = r.max_rank;
    d["history_bytes"] = r.history_bytes;
    d["wall_seconds"] = r.wall_seconds;
    d["max_residual"] = r.max_residual;
    return d;
}

py::dict solve(const std::string& problem, std::size_t n_side, double dt, double final_time, double tol,
               const std::string& solver) {
    std::ostringstream text;
    text.precision(17);
    text << "problem = " << problem << "\ndt = " << dt << "\nT = " << final_time << "\ntol = " << tol << '\n';
    if (solver != "standard" && solver != "isvd") {
        throw ConfigError("solver must be 'standard' or 'isvd'");
    }
    const auto spec = bench::parse_config(text.str());
    const auto config = bench::make_config(spec, n_side);
    const auto disc = pde::discretize(config);
    const bool heat = config.kind == pde::ProblemKind::heat;
    py::gil_scoped_release release;
    pde::RunReport report;
    if (solver == "standard") {
        report = heat ? pde::solve_heat_standard(config, disc) : pde::solve_wave_standard(config, disc);
    } else {
        report = heat ? pde::solve_heat_isvd(config, disc) : pde::solve_wave_isvd(config, disc);
    }
    py::gil_scoped_acquire acquire;
    return report_dict(report);
}

py::list run_bench(const std::string& config_text) {
    const auto rows = bench::run_bench(bench::parse_config(config_text));
    py::list out;
    for (const auto& row : rows) {
        py::dict d;
        d["problem"] = row.problem;
        d["alpha"] = row.alpha;
        d["n_side"] = row.n_side;
        d["h"] = row.h;
        d["dt"] = row.dt;
        d["tol"] = row.tol;
        d["solver"] = row.solver;
        d["wall_seconds"] = row.wall_seconds;
        d["history_bytes"] = row.history_bytes;
        d["rank_k"] = row.rank_k;
        d["l2_discrepancy"] = row.l2_discrepancy;
        d["error"] = row.error;
        out.append(d);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_fracstream, m) {
    m.doc() = "Time-fractional PDE solvers with incrementally compressed solution history";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<FactorizationError>(m, "FactorizationError", PyExc_RuntimeError);

    py::class_<linalg::SparseSpdMatrix>(m, "SparseSpdMatrix")
        .def_property_readonly("rows", &linalg::SparseSpdMatrix::rows)
        .def_property_readonly("nonzeros", &linalg::SparseSpdMatrix::nonzeros)
        .def("to_dense", &linalg::SparseSpdMatrix::to_dense)
        .def("dot", [](const linalg::SparseSpdMatrix& a, const linalg::Vector& x) { return linalg::spmv(a, x); })
        .def("solve", [](const linalg::SparseSpdMatrix& a, const linalg::Vector& b) { return linalg::spd_solve(a, b); });

    py::class_<fem::Grid2D>(m, "Grid2D")
        .def(py::init<std::size_t>(), py::arg("n_side"))
        .def_property_readonly("n_side", &fem::Grid2D::n_side)
        .def_property_readonly("h", &fem::Grid2D::h)
        .def_property_readonly("dofs", &fem::Grid2D::dofs)
        .def_property_readonly("triangle_count", &fem::Grid2D::triangle_count)
        .def("dof_points", [](const fem::Grid2D& g) {
            Eigen::MatrixX2d pts(static_cast<Eigen::Index>(g.dofs()), 2);
            for (std::size_t k = 0; k < g.dofs(); ++k) {
                const auto p = g.dof_point(k);
                pts(static_cast<Eigen::Index>(k), 0) = p.x;
                pts(static_cast<Eigen::Index>(k), 1) = p.y;
            }
            return pts;
        });

    m.def("build_grid", &fem::build_grid, py::arg("n_side"));
    m.def("assemble_mass", &fem::assemble_mass, py::arg("grid"));
    m.def("assemble_stiffness", &fem::assemble_stiffness, py::arg("grid"));

    m.def("dense_svd_econ", [](const linalg::DenseMatrix& a) { return svd_tuple(linalg::dense_svd_econ(a)); });
    m.def("dense_svd_full", [](const linalg::DenseMatrix& a) { return svd_tuple(linalg::dense_svd_full(a)); });

    py::class_<isvd::IncrementalSvd>(m, "IncrementalSvd")
        .def(py::init([](const linalg::Vector& u1, double tol, std::size_t min_flush_width) {
                 return isvd::IncrementalSvd(u1, {tol, min_flush_width});
             }),
             py::arg("u1"), py::arg("tol") = 1e-12, py::arg("min_flush_width") = 64)
        .def("update", [](isvd::IncrementalSvd& s, const linalg::Vector& u) { return kind_name(s.update(u).kind); })
        .def("finalize", &isvd::IncrementalSvd::finalize)
        .def("factors", [](isvd::IncrementalSvd& s) { return svd_tuple(s.factors()); })
        .def("reconstruct_column", &isvd::IncrementalSvd::reconstruct_column, py::arg("column_number"))
        .def_property_readonly("rank", &isvd::IncrementalSvd::rank)
        .def_property_readonly("columns_seen", &isvd::IncrementalSvd::columns_seen)
        .def_property_readonly("queue_length", &isvd::IncrementalSvd::queue_length)
        .def_property_readonly("singular_values", &isvd::IncrementalSvd::singular_values)
        .def_property_readonly("storage_bytes", &isvd::IncrementalSvd::storage_bytes);

    m.def(
        "build_full",
        [](const linalg::DenseMatrix& columns, double tol) { return svd_tuple(isvd::build_full(columns, {tol})); },
        py::arg("columns"), py::arg("tol") = 1e-12);

    m.def("l1_weights", &pde::l1_weights, py::arg("alpha"), py::arg("n"));
    m.def("wave_weights", &pde::wave_weights, py::arg("alpha"), py::arg("n"));

    m.def("solve", &solve, py::arg("problem") = "example1", py::arg("n_side") = 8, py::arg("dt") = 1e-3,
          py::arg("T") = 1.0, py::arg("tol") = 1e-12, py::arg("solver") = "isvd",
          "Run one solver on a built-in problem and return its report as a dict.");
    m.def("run_bench", &run_bench, py::arg("config_text") = "",
          "Run a benchmark from 'key = value' config text; returns one dict per CSV row.");
    m.def(
        "bench_csv",
        [](const std::string& config_text) {
            const auto spec = bench::parse_config(config_text);
            std::ostringstream out;
            bench::write_csv(out, bench::run_bench(spec), spec.timing);
            return out.str();
        },
        py::arg("config_text") = "");
}
