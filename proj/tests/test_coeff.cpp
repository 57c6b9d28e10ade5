#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "gmsfem/coeff.hpp"
#include "gmsfem/error.hpp"

using namespace gmsfem;

TEST(Theta, ClosedSet) {
  const std::vector<double> mu = {0.25, 0.5};
  EXPECT_DOUBLE_EQ(Theta::constant_value(3.0)(mu), 3.0);
  EXPECT_DOUBLE_EQ(Theta::component(1)(mu), 0.5);
  EXPECT_DOUBLE_EQ(Theta::one_minus(0)(mu), 0.75);
  EXPECT_DOUBLE_EQ(Theta::exponential(1, 2.0)(mu), std::exp(1.0));
  EXPECT_THROW(Theta::component(2)(mu), ConfigError);
}

TEST(Affine, CombineIsCellwiseSum) {
  AffineCoefficient aff;
  aff.p = 1;
  aff.lo = {0.0};
  aff.hi = {1.0};
  CoefficientField a = CoefficientField::constant(2, 2, 1.0), b = CoefficientField::constant(2, 2, 0.0);
  b.k11 = {1.0, 2.0, 3.0, 4.0};
  aff.terms = {{Theta::one_minus(0), a}, {Theta::component(0), b}};
  const CoefficientField k = evaluate(aff, {0.25});
  for (int c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(k.k11[c], 0.75 + 0.25 * b.k11[c]);
  EXPECT_THROW(evaluate(aff, {1.5}), ConfigError);
  EXPECT_THROW(combine(aff, {0.0, 0.0}), ConfigError);
}

TEST(Generator, CoversCellCenters) {
  const FineMesh m(10, 10);
  const CoefficientField k = generate_inclusions_channels(m, {{0.2, 0.4, 0.0, 0.1}}, 50.0);
  int high = 0;
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 10; ++i) {
      const bool in = (i == 2 || i == 3) && j == 0;
      EXPECT_DOUBLE_EQ(k.k11[m.cell(i, j)], in ? 50.0 : 1.0);
      high += in;
    }
  EXPECT_EQ(high, 2);
  EXPECT_DOUBLE_EQ(k.contrast(), 50.0);
}

TEST(Generator, PresetsKeepOffBoundaryBlockEdges) {
  // On the 100x100 / 10x10 layout no high cell of a boundary block touches that block's edges.
  const FineMesh m(100, 100);
  for (const auto& name : preset_names()) {
    const CoefficientField k = generate_inclusions_channels(m, preset_geometry(name), 1e6);
    for (int j = 0; j < 100; ++j)
      for (int i = 0; i < 100; ++i) {
        const int I = i / 10, J = j / 10;
        const bool boundary_block = I == 0 || I == 9 || J == 0 || J == 9;
        const bool edge_cell = i % 10 == 0 || i % 10 == 9 || j % 10 == 0 || j % 10 == 9;
        if (boundary_block && edge_cell) {
          EXPECT_EQ(k.k11[m.cell(i, j)], 1.0) << name << " cell " << i << "," << j;
        }
      }
  }
  EXPECT_THROW(preset_geometry("nope"), ConfigError);
}

TEST(Generator, AffineFamiliesArePositive) {
  const FineMesh m(50, 50);
  const AffineCoefficient four = affine_four(m, 1e5);
  EXPECT_EQ(four.terms.size(), 4u);
  const CoefficientField mid = evaluate(four, {0.5, 0.5, 0.5, 0.5});
  for (double v : mid.k11) EXPECT_GT(v, 0.0);

  const AffineCoefficient an = anisotropic_pair(m, 1e4);
  const CoefficientField k = evaluate(an, {0.3});
  ASSERT_TRUE(k.is_tensor());
  for (int c = 0; c < k.cell_count(); ++c) EXPECT_DOUBLE_EQ(k.yy(c), 1.0);

  const AffineCoefficient ex = exponential_pair(m, 1e4, 0.0);
  const CoefficientField e0 = evaluate(ex, {0.7});
  const CoefficientField e1 = evaluate(ex, {0.1});
  EXPECT_EQ(e0.k11, e1.k11);
}

TEST(FieldIo, RoundTrip) {
  CoefficientField k = CoefficientField::constant(3, 2, 1.0);
  k.k11 = {1.0, 2.5, 1e6, 0.125, 3.0, 7.0};
  k.k22 = {1.0, 1.0, 2.0, 2.0, 3.0, 3.0};
  const auto path = (std::filesystem::temp_directory_path() / "gmsfem_field_rt.txt").string();
  write_field(path, k);
  const CoefficientField r = read_field(path);
  EXPECT_EQ(r.nx, 3);
  EXPECT_EQ(r.ny, 2);
  EXPECT_EQ(r.k11, k.k11);
  EXPECT_EQ(r.k22, k.k22);
  std::filesystem::remove(path);
  EXPECT_THROW(read_field(path), ConfigError);
}
