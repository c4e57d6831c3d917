#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracstream/errors.hpp"
#include "fracstream/fracpde.hpp"
#include "reference.hpp"

#include <cmath>
#include <vector>

using namespace fracstream;
using linalg::DenseMatrix;
using linalg::Vector;
using pde::FracConfig;

namespace {

DenseMatrix collect(FracConfig config, pde::RunReport (*solver)(const FracConfig&)) {
    DenseMatrix out(static_cast<Eigen::Index>((config.n_side - 1) * (config.n_side - 1)),
                    static_cast<Eigen::Index>(config.steps));
    config.on_step = [&](std::size_t n, const Vector& u) { out.col(static_cast<Eigen::Index>(n - 1)) = u; };
    solver(config);
    return out;
}

double max_step_gap(const DenseMatrix& a, const DenseMatrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("heat weights") {
    const auto b = pde::l1_weights(0.5, 3);
    REQUIRE(b.size() == 3);
    CHECK(b[0] == 1.0);
    CHECK(b[1] == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-15));
    CHECK(b[2] == doctest::Approx(std::sqrt(3.0) - std::sqrt(2.0)).epsilon(1e-15));
    for (double alpha : {0.1, 0.5, 0.9}) {
        const auto w = pde::l1_weights(alpha, 2000);
        double sum = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            sum += w[j];
            if (j > 0) {
                CHECK(w[j] < w[j - 1]);
                CHECK(w[j] > 0.0);
            }
        }
        CHECK(std::abs(sum - std::pow(2000.0, 1.0 - alpha)) <= 1e-12 * std::pow(2000.0, 1.0 - alpha));
    }
    // alpha -> 1 flattens every weight after the first toward zero.
    const auto near_one = pde::l1_weights(0.999, 10);
    CHECK(near_one[5] < 1e-3);
    CHECK_THROWS_AS(pde::l1_weights(0.0, 3), InvalidInput);
    CHECK_THROWS_AS(pde::l1_weights(1.0, 3), InvalidInput);
}

TEST_CASE("wave weights") {
    const auto b = pde::wave_weights(1.5, 3);
    CHECK(b[0] == 1.0);
    CHECK(b[1] == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-15));
    const auto w = pde::wave_weights(1.001, 50);
    // exponent ~ 1: every weight close to one
    CHECK(std::abs(w[40] - 1.0) < 1e-2);
    for (std::size_t k = 1; k < w.size(); ++k) {
        CHECK(w[k] < w[k - 1]);
    }
    CHECK_THROWS_AS(pde::wave_weights(1.0, 3), InvalidInput);
    CHECK_THROWS_AS(pde::wave_weights(2.0, 3), InvalidInput);
    CHECK_THROWS_AS(pde::wave_weights(0.5, 3), InvalidInput);
}

TEST_CASE("config validation") {
    FracConfig c = testing::example1(4, 10);
    c.alpha = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(pde::solve_heat_standard(c), ConfigError);
    c = testing::example1(4, 10);
    c.steps = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = testing::example1(4, 10);
    c.final_time = -1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = testing::example1(4, 10);
    c.tol = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(pde::solve_wave_standard(testing::example1(4, 10)), ConfigError);
    CHECK_THROWS_AS(pde::solve_heat_isvd(testing::example2(4, 10)), ConfigError);
}

TEST_CASE("zero data stays zero") {
    FracConfig heat = testing::example1(6, 40);
    heat.u0 = [](double, double, double) { return 0.0; };
    heat.forcing = heat.u0;
    const auto hs = pde::solve_heat_standard(heat);
    const auto hi = pde::solve_heat_isvd(heat);
    CHECK(hs.solution.norm() == 0.0);
    CHECK(hi.solution.norm() == 0.0);
    CHECK(hi.history_bytes == 0);
    CHECK(hi.rank == 0);

    FracConfig wave = testing::example2(6, 40);
    wave.u0 = heat.u0;
    wave.forcing = heat.u0;
    CHECK(pde::solve_wave_standard(wave).solution.norm() == 0.0);
    const auto wi = pde::solve_wave_isvd(wave);
    CHECK(wi.solution.norm() == 0.0);
    CHECK(wi.history_bytes == 0);
}

TEST_CASE("single heat step has no history term") {
    const FracConfig c = testing::example1(5, 1);
    const fem::Grid2D grid(5);
    const DenseMatrix m = fem::assemble_mass(grid).to_dense();
    const DenseMatrix a = fem::assemble_stiffness(grid).to_dense();
    const double scale = std::tgamma(1.9) * 1.0;
    const Vector u0 = Eigen::PartialPivLU<DenseMatrix>(m).solve(fem::assemble_load(grid, c.u0, 0.0));
    const Vector rhs = m * u0 + scale * fem::assemble_load(grid, c.forcing, 1.0);
    const Vector want = Eigen::PartialPivLU<DenseMatrix>(m + scale * a).solve(rhs);
    CHECK((pde::solve_heat_standard(c).solution - want).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((pde::solve_heat_isvd(c).solution - want).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("single wave step has no history term") {
    FracConfig c = testing::example2(5, 1);
    c.v0 = [](double x, double y, double) { return x * (1.0 - x) * y; };
    const fem::Grid2D grid(5);
    const DenseMatrix m = fem::assemble_mass(grid).to_dense();
    const DenseMatrix a = fem::assemble_stiffness(grid).to_dense();
    const double g = std::tgamma(1.5);
    const Eigen::PartialPivLU<DenseMatrix> mass_lu(m);
    const Vector u0 = mass_lu.solve(fem::assemble_load(grid, c.u0, 0.0));
    const Vector v0 = mass_lu.solve(fem::assemble_load(grid, c.v0, 0.0));
    const Vector rhs = g * fem::assemble_load(grid, c.forcing, 1.0) + m * (2.0 * u0 - (u0 - v0));
    const Vector want = Eigen::PartialPivLU<DenseMatrix>(m + g * a).solve(rhs);
    CHECK((pde::solve_wave_standard(c).solution - want).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((pde::solve_wave_isvd(c).solution - want).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("standard solvers match the dense reference at every step") {
    const FracConfig heat = testing::example1(8, 100, 0.5);
    CHECK(max_step_gap(collect(heat, pde::solve_heat_standard), testing::dense_heat_reference(heat)) <= 1e-12);
    FracConfig wave = testing::example2(8, 100, 1.2);
    wave.v0 = [](double x, double y, double) { return std::sin(M_PI * x) * y * (1.0 - y); };
    CHECK(max_step_gap(collect(wave, pde::solve_wave_standard), testing::dense_wave_reference(wave)) <= 1e-12);
}

TEST_CASE("example 1 final-time discrepancy at n_side 8") {
    const FracConfig c = testing::example1(8, 1000);
    const auto disc = pde::discretize(c);
    const auto s = pde::solve_heat_standard(c, disc);
    const auto i = pde::solve_heat_isvd(c, disc);
    CHECK(pde::l2_discrepancy(disc, s.solution, i.solution) <= 1e-10);
    CHECK(i.rank > 0);
    CHECK(i.rank <= 60);
    CHECK(s.history_bytes == 8u * 49u * 1000u);
    CHECK(i.max_residual <= 1e-12);
    CHECK(s.max_residual <= 1e-12);
}

TEST_CASE("separable forcing gives a tiny rank") {
    // phi is a discrete eigenfunction (A v = lambda M v) so every snapshot is a
    // multiple of it; the loads are exactly M v because the quadrature is exact on P1.
    const fem::Grid2D grid(8);
    const Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> eig(fem::assemble_stiffness(grid).to_dense(),
                                                                   fem::assemble_mass(grid).to_dense());
    const fem::ScalarField phi = testing::p1_field(8, eig.eigenvectors().col(0));
    FracConfig c = testing::example1(8, 300);
    c.u0 = [](double, double, double) { return 0.0; };
    c.forcing = [phi](double x, double y, double t) { return std::cos(3.0 * t) * phi(x, y, 0.0); };
    const auto disc = pde::discretize(c);
    const auto s = pde::solve_heat_standard(c, disc);
    const auto i = pde::solve_heat_isvd(c, disc);
    CHECK(i.rank <= 3);
    CHECK(pde::l2_discrepancy(disc, s.solution, i.solution) <= 1e-10);
}

TEST_CASE("example 2 discrepancy and its tolerance trend") {
    const FracConfig c = testing::example2(8, 1000);
    const auto disc = pde::discretize(c);
    const auto s = pde::solve_wave_standard(c, disc);
    const auto tight = pde::solve_wave_isvd(c, disc);
    const double d_tight = pde::l2_discrepancy(disc, s.solution, tight.solution);
    CHECK(d_tight <= 1e-7);
    FracConfig loose_cfg = c;
    loose_cfg.tol = 1e-8;
    const auto loose = pde::solve_wave_isvd(loose_cfg, disc);
    const double d_loose = pde::l2_discrepancy(disc, s.solution, loose.solution);
    MESSAGE("wave discrepancy tol 1e-8: " << d_loose << ", tol 1e-12: " << d_tight);
    CHECK(d_tight < d_loose);
    CHECK(loose.rank <= tight.rank);
    CHECK(s.history_bytes == 8u * 49u * 1002u);
}

TEST_CASE("compressed and full history agree at every step on small problems") {
    // tol near rounding level: the two variants are the same scheme.
    FracConfig heat = testing::example1(7, 200, 0.3);
    heat.tol = 1e-15;
    CHECK(max_step_gap(collect(heat, pde::solve_heat_standard), collect(heat, pde::solve_heat_isvd)) <= 1e-11);
    FracConfig wave = testing::example2(7, 200, 1.7);
    wave.tol = 1e-15;
    CHECK(max_step_gap(collect(wave, pde::solve_wave_standard), collect(wave, pde::solve_wave_isvd)) <= 1e-11);

    // A looser tolerance still tracks the full history closely.
    heat.tol = 1e-11;
    wave.tol = 1e-11;
    CHECK(max_step_gap(collect(heat, pde::solve_heat_standard), collect(heat, pde::solve_heat_isvd)) <= 1e-9);
    CHECK(max_step_gap(collect(wave, pde::solve_wave_standard), collect(wave, pde::solve_wave_isvd)) <= 1e-9);
}

TEST_CASE("compressed history reproduces the mass-weighted snapshots") {
    const FracConfig c = testing::example1(8, 200);
    const DenseMatrix snaps = collect(c, pde::solve_heat_standard);
    const auto mass = fem::assemble_mass(fem::Grid2D(8));
    isvd::IncrementalSvd svd(snaps.col(0), isvd::IsvdOptions{c.tol, c.min_flush_width});
    for (Eigen::Index j = 1; j < snaps.cols(); ++j) {
        svd.update(snaps.col(j));
    }
    const auto f = svd.factors();
    const DenseMatrix mq = linalg::spmm(mass, f.u);
    const DenseMatrix coeff = f.sigma.asDiagonal() * f.v.transpose();
    for (Eigen::Index j = 0; j < snaps.cols(); ++j) {
        const Vector want = linalg::spmv(mass, svd.reconstruct_column(static_cast<std::size_t>(j + 1)));
        CHECK((mq * coeff.col(j) - want).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("peak compressed bytes obey the memory law") {
    for (std::size_t n : {8u, 16u}) {
        const FracConfig heat = testing::example1(n, 1000);
        const auto r = pde::solve_heat_isvd(heat);
        const std::size_t m = (n - 1) * (n - 1);
        const std::size_t k = r.max_rank;
        CHECK(r.history_bytes > 0);
        CHECK(r.history_bytes <= 8 * (m * k + 1000 * k + k * k + k * r.max_queue));
        const FracConfig wave = testing::example2(n, 300);
        const auto w = pde::solve_wave_isvd(wave);
        const std::size_t kw = w.max_rank;
        CHECK(w.history_bytes <= 8 * (m * kw + 302 * kw + kw * kw + kw * w.max_queue));
    }
}

TEST_CASE("runs are deterministic") {
    const FracConfig c = testing::example1(8, 300);
    CHECK(pde::solve_heat_isvd(c).solution == pde::solve_heat_isvd(c).solution);
    CHECK(pde::solve_heat_standard(c).solution == pde::solve_heat_standard(c).solution);
    const FracConfig w = testing::example2(8, 300);
    CHECK(pde::solve_wave_isvd(w).solution == pde::solve_wave_isvd(w).solution);
}

TEST_CASE("conjugate gradient backend gives the same answer") {
    FracConfig c = testing::example1(8, 100);
    const auto chol = pde::solve_heat_standard(c);
    c.backend = linalg::SolverBackend::conjugate_gradient;
    const auto cg = pde::solve_heat_isvd(c);
    CHECK((chol.solution - cg.solution).cwiseAbs().maxCoeff() <= 1e-11);
}
