#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gmsfem/error.hpp"
#include "gmsfem/studies.hpp"

using namespace gmsfem;

namespace {

// Mean over omega_n from the mass matrix: 1^T M u / 1^T M 1.
double mass_mean(const FineMesh& m, const CellBox& box, const Vector& u) {
  const SparseMatrix M = assemble_mass(m, CoefficientField::constant(m.nx(), m.ny(), 1.0), box);
  Vector loc(box.node_count());
  for (int l = 0; l < box.node_count(); ++l) loc[l] = u[m.global_node(box, l)];
  const Vector one = Vector::Ones(box.node_count());
  return one.dot(M * loc) / one.dot(M * one);
}

RunConfig small_config(double alpha) {
  return parse_config(R"({
    "mesh": {"nx": 20, "ny": 20, "Nx": 4, "Ny": 4},
    "field": {"source": "exponential_pair", "eta": 1e2, "alpha": )" + std::to_string(alpha) + R"(},
    "bc": "zero",
    "snapshots": {"kind": "local_spectral", "count": 6},
    "selection": {"ladder": [0, 2]},
    "study": {"kind": "nonlinear", "nonlinear": {"lo": 0.0, "hi": 0.1, "samples": 5}}
  })");
}

}  // namespace

TEST(BlockAverage, ConstantAndLinear) {
  const FineMesh m(8, 8);
  const CoarseMesh c(m, 2, 2);
  for (double a : block_average(m, c, Vector::Constant(m.node_count(), 2.5))) EXPECT_NEAR(a, 2.5, 1e-14);

  const FineMesh g(6, 6);
  const CoarseMesh one(g, 1, 1);
  const Vector x = interpolate(g, [](Point p) { return p.x; });
  for (double a : block_average(g, one, x)) EXPECT_NEAR(a, 0.5, 1e-14);
  for (double a : cell_average(g, one, x)) EXPECT_NEAR(a, 0.5, 1e-14);
}

TEST(BlockAverage, RandomFieldMatchesMassQuadrature) {
  const FineMesh m(12, 12);
  const CoarseMesh c(m, 3, 3);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vector u(m.node_count());
  for (int n = 0; n < u.size(); ++n) u[n] = U(rng);
  const auto avg = block_average(m, c, u);
  for (int n = 0; n < c.node_count(); ++n) EXPECT_NEAR(avg[n], mass_mean(m, c.neighborhood(n), u), 1e-13);
  const auto cell = cell_average(m, c, u);
  for (int K = 0; K < c.block_count(); ++K) EXPECT_NEAR(cell[K], mass_mean(m, c.block_box(K), u), 1e-13);
}

TEST(Frozen, BlockParametersAndCoefficient) {
  const FineMesh m(8, 8);
  const CoarseMesh c(m, 2, 2);
  const Vector x = interpolate(m, [](Point p) { return p.x; });
  const auto avg = block_average(m, c, x);
  const auto node_mode = block_parameters(m, c, x, avg, FreezeMode::node_average);
  const auto cell_mode = block_parameters(m, c, x, avg, FreezeMode::cell_average);
  for (int K = 0; K < c.block_count(); ++K) {
    double mean = 0.0;
    for (int n : c.block_corners(K)) mean += avg[n] / 4.0;
    EXPECT_NEAR(node_mode[K], mean, 1e-15);
  }
  EXPECT_NEAR(cell_mode[c.block(0, 0)], 0.25, 1e-14);
  EXPECT_NEAR(cell_mode[c.block(1, 0)], 0.75, 1e-14);

  const AffineCoefficient aff = exponential_pair(m, 10.0, 1.0);
  const CoefficientField k = frozen_coefficient(aff, c, std::vector<double>(4, 0.3));
  EXPECT_EQ(k.k11, evaluate(aff, {0.3}).k11);
}

TEST(Picard, AlphaZeroIsTheLinearPipeline) {
  const RunConfig cfg = small_config(0.0);
  const Problem pb = build_problem(cfg);
  const OfflineStage off = run_offline(pb, cfg);
  const Selection sel = cfg.selection.online;
  const PicardResult r = picard_solve(pb, cfg, off, sel);
  ASSERT_GE(r.state.iterations, 1);
  EXPECT_EQ(r.state.update_norms[0], 0.0);
  EXPECT_TRUE(r.state.converged);

  const PartitionOfUnity pou = online_pou(pb, cfg, off);
  const auto spaces = select_spaces(run_online(pb, cfg, off, pou), sel);
  const GmsResult lin = solve_with_spaces(pb, cfg, fine_system(pb, pb.kappa, &pou), spaces, pou);
  ASSERT_EQ(lin.u.size(), r.state.u.size());
  for (int n = 0; n < lin.u.size(); ++n) ASSERT_EQ(lin.u[n], r.state.u[n]) << n;
}

TEST(Picard, MatchesFineOracleOnSmallMesh) {
  const RunConfig cfg = small_config(1.0);
  const Problem pb = build_problem(cfg);
  const OfflineStage off = run_offline(pb, cfg);
  const PicardResult fine = picard_fine(pb, cfg);
  ASSERT_TRUE(fine.state.converged);
  EXPECT_EQ(fine.state.clamped, 0);

  double prev = std::numeric_limits<double>::infinity();
  for (int rung : cfg.selection.ladder) {
    const PicardResult r = picard_solve(pb, cfg, off, rung_selection(cfg.selection.online, rung));
    EXPECT_TRUE(r.state.converged);
    EXPECT_LE(r.state.iterations, 5);
    EXPECT_EQ(r.state.clamped, 0);
    for (size_t k = 1; k < r.state.update_norms.size(); ++k)
      EXPECT_LT(r.state.update_norms[k], r.state.update_norms[k - 1]);
    // Gap to the fine Picard solution is that of a linear solve with the same spaces
    // at the converged frozen coefficient, up to the Picard tolerance.
    const FineSystem fs = fine_system(pb, r.kappa);
    const Vector ref = fine_solve(fs);
    const double picard_gap = std::sqrt(relative_errors(r.state.u, fine.state.u, fs.A_kappa, fs.M_kappa).energy);
    const double linear_gap = std::sqrt(relative_errors(r.state.u, ref, fs.A_kappa, fs.M_kappa).energy);
    EXPECT_LT(std::abs(picard_gap - linear_gap), 0.05 * linear_gap + 1e-4);
    EXPECT_LT(picard_gap, prev);
    prev = picard_gap;
  }
}

TEST(Picard, RejectsMultiParameterFields) {
  RunConfig cfg = small_config(1.0);
  cfg.field.source = FieldSource::affine_four;
  const Problem pb = build_problem(cfg);
  EXPECT_THROW(picard_fine(pb, cfg), ConfigError);
}
