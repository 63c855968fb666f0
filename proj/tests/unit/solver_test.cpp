#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include <crossdiff/diagnostics.hpp>
#include <crossdiff/errors.hpp>
#include <crossdiff/sampling.hpp>
#include <crossdiff/solver.hpp>

namespace crossdiff {
namespace {

Model reference_maxwell_stefan() { return make_maxwell_stefan(1.0 / 0.168, 1.0 / 0.68, 1.0 / 0.883); }

StateField test_case_one(const Mesh& mesh) {
  return cell_averages([](const Point& x) { return std::vector<double>{x[0] < 0.5 ? 0.8 : 0.0, 0.2}; }, mesh);
}

StateField random_state(std::size_t n, std::size_t cells, Rng& rng) {
  StateField u(n, cells);
  for (std::size_t k = 0; k < cells; ++k) {
    const auto p = rng.simplex_point(n);
    std::copy(p.begin(), p.end(), u.cell(k).begin());
  }
  return u;
}

StateField constant_state(std::vector<double> values, std::size_t cells) {
  StateField u(values.size(), cells);
  for (std::size_t k = 0; k < cells; ++k) std::copy(values.begin(), values.end(), u.cell(k).begin());
  return u;
}

Model frozen_model() {
  Model m = make_two_species_euler_limit();
  m.name = "frozen";
  m.a_sigma = [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); };
  return m;
}

TEST(Residual, TwoCellAnchor) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 2);
  StateField u_new(2, 2), u_old(2, 2);
  u_new(0, 0) = 0.6, u_new(0, 1) = 0.2, u_new(1, 0) = 0.1, u_new(1, 1) = 0.5;
  u_old(0, 0) = 0.5, u_old(0, 1) = 0.3, u_old(1, 0) = 0.2, u_old(1, 1) = 0.4;
  const auto r = assemble_residual(u_new, u_old, 0.1, mesh, make_two_species_euler_limit());
  const double expected[] = {1.3752827257490048476, -1.2463269348966133716, -1.3752827257490048476,
                             1.2463269348966133716};
  ASSERT_EQ(r.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(r[i], expected[i], 1e-14) << i;
}

TEST(Residual, ConstantStateIsExactlyZero) {
  const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 4, 3);
  const StateField u = constant_state({0.3, 0.25}, mesh.num_cells());
  for (const Model& m : {reference_maxwell_stefan(), make_tumor(4.0, 1.0), make_two_species_euler_limit()}) {
    const auto r = assemble_residual(u, u, 1e-3, mesh, m);
    for (double v : r) ASSERT_EQ(v, 0.0) << m.name;
  }
}

TEST(Residual, LocalConservation) {
  const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 5, 4);
  const Model model = make_thin_film_long_time();
  Rng rng(41);
  const double dt = 1e-3;
  for (int rep = 0; rep < 20; ++rep) {
    const StateField u_new = random_state(2, mesh.num_cells(), rng);
    const StateField u_old = random_state(2, mesh.num_cells(), rng);
    const auto r = assemble_residual(u_new, u_old, dt, mesh, model);
    for (std::size_t i = 0; i < 2; ++i) {
      double total = 0.0, expected = 0.0, scale = 0.0;
      for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
        double f[2];
        model.source(u_new.cell(k), f);
        const double m = mesh.cells()[k].measure;
        total += r[k * 2 + i];
        expected += m * (u_new(k, i) - u_old(k, i)) / dt - m * f[i];
        scale += std::abs(r[k * 2 + i]);
      }
      ASSERT_NEAR(total, expected, 1e-13 * scale);
    }
  }
}

TEST(Flux, AntisymmetricAtRandomStates) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 2);
  const ImplicitEulerSystem system(mesh, reference_maxwell_stefan());
  Rng rng(42);
  for (int s = 0; s < 1000; ++s) {
    const auto uK = rng.simplex_point(2);
    const auto uL = rng.simplex_point(2);
    const double tau = rng.uniform(0.1, 10.0);
    double fK[2], fL[2];
    system.edge_flux(uK, uL, tau, fK);
    system.edge_flux(uL, uK, tau, fL);
    ASSERT_EQ(fK[0] + fL[0], 0.0);
    ASSERT_EQ(fK[1] + fL[1], 0.0);
  }
}

SparseMatrix dense_fd_jacobian(const StateField& u, const StateField& u_old, double dt, const Mesh& mesh,
                               const Model& model) {
  const auto base = assemble_residual(u, u_old, dt, mesh, model);
  const std::size_t N = base.size();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  StateField pert = u;
  for (std::size_t c = 0; c < N; ++c) {
    const double h = fd_increment(u.values()[c]);
    pert.values()[c] = u.values()[c] + h;
    const auto r = assemble_residual(pert, u_old, dt, mesh, model);
    for (std::size_t row = 0; row < N; ++row)
      J(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c)) = (r[row] - base[row]) / h;
    pert.values()[c] = u.values()[c];
  }
  return J.sparseView(0.0, 0.0);
}

TEST(Jacobian, ColoredEqualsDenseOnFourCells) {
  Rng rng(43);
  const Mesh interval = build_interval_mesh(0.0, 1.0, 4);
  const Mesh square = build_rectangle_mesh(1.0, 1.0, 2, 2);
  for (const Mesh* mesh : {&interval, &square}) {
    for (const Model& model : {reference_maxwell_stefan(), make_thin_film_long_time(), make_tumor(4.0, 1.0, 0.01)}) {
      const StateField u = random_state(2, 4, rng);
      const StateField u_old = random_state(2, 4, rng);
      const Eigen::MatrixXd colored = assemble_jacobian(u, u_old, 1e-3, *mesh, model);
      const Eigen::MatrixXd dense = dense_fd_jacobian(u, u_old, 1e-3, *mesh, model);
      ASSERT_EQ((colored - dense).cwiseAbs().maxCoeff(), 0.0) << model.name;
    }
  }
}

TEST(Jacobian, DecoupledModelIsBlockDiagonalAcrossSpecies) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 6);
  const Model model = make_thin_film({0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  Rng rng(44);
  const StateField u = random_state(2, 6, rng);
  const Eigen::MatrixXd J = assemble_jacobian(u, u, 1e-2, mesh, model);
  for (Eigen::Index r = 0; r < J.rows(); ++r)
    for (Eigen::Index c = 0; c < J.cols(); ++c)
      if (r % 2 != c % 2) {
        EXPECT_NEAR(J(r, c), 0.0, 1e-6) << r << "," << c;
      }
}

TEST(Jacobian, WithoutDiffusionIsMassOverDt) {
  const Mesh mesh = build_interval_mesh(0.0, 2.0, 4);
  Rng rng(45);
  const StateField u = random_state(2, 4, rng);
  const Eigen::MatrixXd J = assemble_jacobian(u, u, 0.25, mesh, frozen_model());
  EXPECT_LE((J - 2.0 * Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Coloring, DistanceTwoProperty) {
  for (const Mesh& mesh : {build_interval_mesh(0.0, 1.0, 17), build_rectangle_mesh(1.0, 1.0, 7, 5)}) {
    const auto color = distance2_coloring(mesh);
    for (std::size_t k = 0; k < mesh.num_cells(); ++k)
      for (std::size_t l : mesh.neighbors(k)) {
        ASSERT_NE(color[k], color[l]);
        for (std::size_t m : mesh.neighbors(l))
          if (m != k) {
            ASSERT_NE(color[k], color[m]);
          }
      }
  }
  EXPECT_EQ(std::ranges::max(distance2_coloring(build_interval_mesh(0.0, 1.0, 100))), 2);
}

TEST(FdIncrement, RepresentableStep) {
  EXPECT_EQ(fd_increment(0.0), 1e-8);
  EXPECT_EQ(fd_increment(0.5), (0.5 + 1e-8) - 0.5);
  EXPECT_EQ(fd_increment(3.0), (3.0 + 3e-8) - 3.0);
}

TEST(Newton, ConstantStateIsFixedPoint) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 8);
  const StateField u = constant_state({0.3, 0.25}, 8);
  const NewtonResult res = newton_solve(u, 1e-3, mesh, reference_maxwell_stefan(), SolverConfig{});
  EXPECT_EQ(res.iterations, 1);
  EXPECT_LE(res.residual_norm, 1e-10);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(res.state.values()[i], u.values()[i], 1e-15);
}

TEST(Newton, TestCaseOneFirstStep) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 40);
  const StateField u0 = test_case_one(mesh);
  const NewtonResult res = newton_solve(u0, 1e-5, mesh, reference_maxwell_stefan(), SolverConfig{});
  EXPECT_LE(res.residual_norm, 1e-10);
  EXPECT_TRUE(is_admissible(res.state));
  const auto r = assemble_residual(res.state, u0, 1e-5, mesh, reference_maxwell_stefan());
  EXPECT_LE(std::ranges::max(r, {}, [](double v) { return std::abs(v); }), 1e-10);
  const double min_u = *std::ranges::min_element(res.state.values());
  EXPECT_GT(min_u, 0.0);
}

TEST(Newton, HugeStepOnStiffStateFailsFromOldState) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 40);
  const StateField u0 = test_case_one(mesh);
  SolverConfig cfg;
  cfg.linearized_predictor = false;
  EXPECT_THROW(newton_solve(u0, 1e30, mesh, reference_maxwell_stefan(), cfg), NewtonDiverged);
}

TEST(Admissibility, Bounds) {
  StateField u = constant_state({0.5, 0.5}, 2);
  EXPECT_TRUE(is_admissible(u));
  u(1, 1) = 0.5 + 2e-12;
  EXPECT_FALSE(is_admissible(u));
  u(1, 1) = -1e-300;
  EXPECT_FALSE(is_admissible(u));
}

TEST(StepSize, GrowShrinkAndClamp) {
  const SolverConfig cfg;
  const StepSizeController ctl{cfg};
  EXPECT_DOUBLE_EQ(ctl.after_reject(1e-3), 2e-4);
  EXPECT_DOUBLE_EQ(ctl.after_accept(1e-5), 1.1e-5);
  EXPECT_EQ(ctl.after_accept(0.0095), 1e-2);
  EXPECT_EQ(ctl.after_accept(1e-9), 1e-8);
  EXPECT_THROW(ctl.after_reject(4e-8), DtUnderflow);
}

TEST(SolverConfigCheck, RejectsInconsistentValues) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.dt_initial = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SolverConfig{};
  cfg.dt_grow = 0.9;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SolverConfig{};
  cfg.adaptive = false;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Adaptive, FrozenModelGrowsToMaxStep) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 4);
  const StateField u = test_case_one(mesh);
  std::vector<StepReport> reports;
  SimulationOptions opts;
  opts.observers.push_back([&](const StateField&, const StepReport& r) { reports.push_back(r); });
  const StateField out = advance_adaptive(u, mesh, frozen_model(), SolverConfig{}, 0.5, opts);
  EXPECT_EQ(out.time(), 0.5);
  ASSERT_GT(reports.size(), 100u);
  for (const auto& r : reports) EXPECT_EQ(r.rejected_attempts, 0);
  EXPECT_EQ(reports.front().dt_used, 1e-5);
  for (const auto& r : reports) EXPECT_EQ(r.newton_iterations, 1);
  EXPECT_EQ(reports[reports.size() - 2].dt_used, 1e-2);
}

TEST(Adaptive, LandsExactlyOnFinalTime) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 20);
  const StateField u = test_case_one(mesh);
  const double t_end = 0.0137;
  const SimulationResult res = simulate(u, mesh, reference_maxwell_stefan(), SolverConfig{}, t_end);
  EXPECT_EQ(res.final_state.time(), t_end);
  EXPECT_EQ(res.reports.back().t, t_end);
  for (std::size_t k = 1; k < res.reports.size(); ++k) EXPECT_GT(res.reports[k].t, res.reports[k - 1].t);
}

TEST(Simulate, ZeroLengthReturnsInitial) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 8);
  const StateField u = test_case_one(mesh);
  const SimulationResult res = simulate(u, mesh, reference_maxwell_stefan(), SolverConfig{}, 0.0);
  EXPECT_EQ(res.final_state, u);
  ASSERT_EQ(res.reports.size(), 1u);
}

TEST(Simulate, FixedStepNeedsExactDivision) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 8);
  SolverConfig cfg;
  cfg.adaptive = false;
  cfg.fixed_dt = 3e-3;
  EXPECT_THROW(simulate(test_case_one(mesh), mesh, reference_maxwell_stefan(), cfg, 1e-2), ConfigError);
}

TEST(Simulate, TestCaseOneStructurePreserved) {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 40);
  const Model model = reference_maxwell_stefan();
  SolverConfig cfg;
  cfg.adaptive = false;
  cfg.fixed_dt = 1e-6;
  const StateField u0 = test_case_one(mesh);
  const SimulationResult res = simulate(u0, mesh, model, cfg, 1e-2);
  ASSERT_EQ(res.reports.size(), 10001u);
  EXPECT_EQ(res.final_state.time(), 1e-2);
  const double H0 = res.reports[0].entropy;
  EXPECT_NEAR(H0, 1.4995975764618121205, 1e-14);
  for (std::size_t k = 1; k < res.reports.size(); ++k) {
    const auto& r = res.reports[k];
    ASSERT_LE(r.entropy, res.reports[k - 1].entropy + 1e-8 * std::max(1.0, H0)) << k;
    ASSERT_GT(r.min_concentration, 0.0) << k;
    ASSERT_LE(r.max_species_sum, 1.0 + 1e-12) << k;
    ASSERT_LE(r.residual_norm, cfg.newton_tol);
    for (std::size_t i = 0; i < 2; ++i)
      ASSERT_NEAR(r.mass[i], res.reports[0].mass[i], 1e-10 * res.reports[0].mass[i]);
  }
}

TEST(Simulate, SteadyReactionStateStaysPut) {
  const Mesh mesh = build_rectangle_mesh(1.0, 1.0, 4, 4);
  const auto steady = thin_film_steady_state();
  const StateField u = constant_state(steady, mesh.num_cells());
  SimulationOptions opts;
  opts.steady_state = steady;
  const SimulationResult res = simulate(u, mesh, make_thin_film_long_time(), SolverConfig{}, 1.0, opts);
  EXPECT_EQ(res.final_state.time(), 1.0);
  for (const auto& r : res.reports) {
    ASSERT_TRUE(r.relative_entropy.has_value());
    ASSERT_LE(*r.relative_entropy, 1e-10) << r.t;
  }
}

}  // namespace
}  // namespace crossdiff
