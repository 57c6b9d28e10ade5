#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gmsfem/fem.hpp"
#include "gmsfem/spaces.hpp"

using namespace gmsfem;

namespace {

CoefficientField field(const FineMesh& m, double eta) {
  return generate_inclusions_channels(m, {{0.2, 0.8, 0.4, 0.45}, {0.6, 0.7, 0.6, 0.7}}, eta);
}

}  // namespace

TEST(Snapshots, FineGridIsIdentity) {
  const SnapshotSpace s = fine_grid_snapshots(CellBox{0, 3, 0, 2}, 5);
  EXPECT_EQ(s.size(), 12);
  EXPECT_EQ(s.R, Matrix(Matrix::Identity(12, 12)));
  EXPECT_EQ(s.node, 5);
}

TEST(Snapshots, HarmonicHaveDeltaTracesAndSumToOne) {
  const FineMesh m(12, 12);
  const CellBox box{2, 8, 3, 9};
  const CoefficientField k = field(m, 1e3);
  const SnapshotSpace s = harmonic_snapshots(m, box, {k});
  int boundary = 0;
  for (int l = 0; l < box.node_count(); ++l) boundary += box.on_boundary(l);
  ASSERT_EQ(s.size(), boundary);
  // The constant is kappa-harmonic with unit trace.
  const Vector total = s.R.rowwise().sum();
  EXPECT_LT((total.array() - 1.0).abs().maxCoeff(), 1e-10);
  const SparseMatrix A = assemble_stiffness(m, k, box);
  for (int q = 0; q < s.size(); ++q) {
    const Vector r = A * s.R.col(q);
    double trace = 0.0;
    for (int l = 0; l < box.node_count(); ++l) {
      if (box.on_boundary(l)) trace += s.R(l, q);
      else EXPECT_NEAR(r[l], 0.0, 1e-8 * 1e3);
    }
    EXPECT_NEAR(trace, 1.0, 1e-14);
  }
}

TEST(Snapshots, SpectralAreLeadingPencilModes) {
  const FineMesh m(10, 10);
  const CellBox box{0, 10, 0, 10};
  const CoefficientField k = field(m, 100.0);
  const SnapshotSpace s = spectral_snapshots(m, box, {k, CoefficientField::constant(10, 10, 1.0)}, 4);
  EXPECT_EQ(s.size(), 8);
  const SparseMatrix M = assemble_mass(m, k, box), K = assemble_stiffness(m, k, box);
  // First mode of each sample is the constant (kernel of the stiffness).
  const Vector c0 = s.R.col(0);
  EXPECT_LT((K * c0).norm(), 1e-8 * c0.norm() * 100);
  EXPECT_NEAR(c0.dot(M * c0), 1.0, 1e-10);
}

TEST(Selection, Rules) {
  const double inf = std::numeric_limits<double>::infinity();
  Vector lam(6);
  lam << inf, inf, 40.0, 10.0, 1.0, 0.1;
  EXPECT_EQ(selected_count(lam, Selection::keep_all()), 6);
  EXPECT_EQ(selected_count(lam, Selection::keep_count(3)), 3);
  EXPECT_EQ(selected_count(lam, Selection::keep_count(9)), 6);
  EXPECT_EQ(selected_count(lam, Selection::keep_threshold(0.2)), 4);
  EXPECT_EQ(selected_count(lam, Selection::unbounded_plus(2.0, 0)), 4);
  EXPECT_EQ(selected_count(lam, Selection::unbounded_plus(20.0, 1)), 4);
  EXPECT_EQ(selected_count(lam, Selection::unbounded_plus(20.0, 10)), 6);
}

TEST(Reduce, OrthonormalSortedAndNested) {
  const FineMesh m(10, 10);
  const CellBox box{0, 10, 0, 10};
  const CoefficientField k = field(m, 1e4);
  const LocalForms forms = assemble_local_forms(m, box, box, box, AForm::kappa_mass, k);
  const SnapshotSpace snap = fine_grid_snapshots(box);
  const ReducedSpace full = build_offline(snap, forms, Selection::keep_all());
  const ReducedSpace five = build_offline(snap, forms, Selection::keep_count(5));
  EXPECT_EQ(full.size(), box.node_count());
  EXPECT_EQ(five.size(), 5);
  const Matrix G = five.R.transpose() * forms.A * five.R;
  EXPECT_LT((G - Matrix::Identity(5, 5)).norm(), 1e-9);
  for (int q = 1; q < full.lambda.size(); ++q) EXPECT_GE(full.lambda[q - 1], full.lambda[q]);
  EXPECT_DOUBLE_EQ(five.lambda_star, full.lambda[5]);
  // Online spectrum of an offline space built from the same forms is the same.
  const ReducedSpace on = build_online(full, forms, Selection::keep_count(5));
  for (int q = 0; q < 5; ++q) {
    if (std::isinf(full.lambda[q])) EXPECT_TRUE(std::isinf(on.lambda[q]));
    else EXPECT_NEAR(on.lambda[q], full.lambda[q], 1e-8 * full.lambda[q] + 1e-12);
  }
  const ReducedSpace t = full.truncated(3);
  EXPECT_EQ(t.size(), 3);
  EXPECT_EQ(t.R, full.R.leftCols(3));
}

TEST(Forms, EmbedAndRestrict) {
  const FineMesh m(8, 8);
  const CellBox box{0, 8, 0, 8}, region{2, 5, 1, 4};
  const CoefficientField k = field(m, 5.0);
  const SparseMatrix local = assemble_stiffness(m, k, region);
  const Matrix big = Matrix(embed(local, region, box));
  EXPECT_NEAR(big.sum(), Matrix(local).sum(), 1e-12);
  EXPECT_EQ(big(box.local_node(2, 1), box.local_node(2, 1)), Matrix(local)(0, 0));
  Matrix R = Matrix::Zero(box.node_count(), 1);
  R(box.local_node(3, 2), 0) = 7.0;
  const Matrix r = restrict_rows(R, box, region);
  EXPECT_EQ(r(region.local_node(3, 2), 0), 7.0);
  EXPECT_EQ(r.sum(), 7.0);
}

TEST(Forms, AFormsOnKnownInputs) {
  const FineMesh m(6, 6);
  const CellBox box{0, 6, 0, 6};
  const CoefficientField k = CoefficientField::constant(6, 6, 2.0);
  const LocalForms km = assemble_local_forms(m, box, box, box, AForm::kappa_mass, k);
  const Vector one = Vector::Ones(box.node_count());
  EXPECT_NEAR(one.dot(km.A * one), 2.0, 1e-12);
  EXPECT_LT((km.S * one).norm(), 1e-12);
  std::vector<double> tk(m.triangle_count(), 3.0);
  FormInputs in;
  in.tilde_kappa = &tk;
  const LocalForms tm = assemble_local_forms(m, box, box, box, AForm::tilde_kappa_mass, k, in);
  EXPECT_NEAR(one.dot(tm.A * one), 3.0, 1e-12);
  EXPECT_THROW(assemble_local_forms(m, box, box, box, AForm::tilde_kappa_mass, k), std::exception);
}

TEST(Forms, ParseNames) {
  for (auto f : {AForm::pou_stiffness, AForm::tilde_kappa_mass, AForm::kappa_mass, AForm::kappa_stiffness})
    EXPECT_EQ(parse_a_form(to_string(f)), f);
  for (auto s : {SnapshotKind::harmonic, SnapshotKind::fine_grid, SnapshotKind::local_spectral})
    EXPECT_EQ(parse_snapshot_kind(to_string(s)), s);
  EXPECT_ANY_THROW(parse_a_form("a7"));
}
