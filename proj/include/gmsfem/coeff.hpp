#pragma once

#include <string>
#include <vector>

#include "gmsfem/mesh.hpp"

namespace gmsfem {

/// Cellwise-constant conductivity: scalar (k22 empty) or diagonal tensor.
struct CoefficientField {
  int nx = 0;
  int ny = 0;
  std::vector<double> k11;
  std::vector<double> k22;

  static CoefficientField constant(int nx, int ny, double value);

  bool is_tensor() const { return !k22.empty(); }
  int cell_count() const { return nx * ny; }
  double xx(int c) const { return k11[c]; }
  double yy(int c) const { return is_tensor() ? k22[c] : k11[c]; }
  /// Isotropic weight used by weighted mass forms: k11, or (k11+k22)/2 for tensors.
  double mean(int c) const { return is_tensor() ? 0.5 * (k11[c] + k22[c]) : k11[c]; }
  /// max/min over all entries.
  double contrast() const;
  void check_compatible(const FineMesh& mesh) const;
};

enum class ThetaKind { constant, mu, one_minus_mu, exp_mu };

/// Parameter function from the closed set {c, mu_j, 1 - mu_j, exp(alpha mu_j)}.
struct Theta {
  ThetaKind kind = ThetaKind::constant;
  double c = 1.0;
  int j = 0;
  double alpha = 0.0;

  double operator()(const std::vector<double>& mu) const;
  static Theta constant_value(double c) { return {ThetaKind::constant, c, 0, 0.0}; }
  static Theta component(int j) { return {ThetaKind::mu, 1.0, j, 0.0}; }
  static Theta one_minus(int j) { return {ThetaKind::one_minus_mu, 1.0, j, 0.0}; }
  static Theta exponential(int j, double alpha) { return {ThetaKind::exp_mu, 1.0, j, alpha}; }
};

struct AffineTerm {
  Theta theta;
  CoefficientField field;
};

/// kappa(x; mu) = sum_q Theta_q(mu) kappa_q(x) with mu in the box [lo, hi].
struct AffineCoefficient {
  std::vector<AffineTerm> terms;
  int p = 0;
  std::vector<double> lo;
  std::vector<double> hi;

  std::vector<double> thetas(const std::vector<double>& mu) const;
  bool admissible(const std::vector<double>& mu) const;
};

AffineCoefficient single_term(CoefficientField field);

/// Cellwise sum_q theta[q] * kappa_q; rejects non-positive cells by index.
CoefficientField combine(const AffineCoefficient& aff, const std::vector<double>& theta);
CoefficientField evaluate(const AffineCoefficient& aff, const std::vector<double>& mu);

/// Rectangle in unit-square coordinates; covers the cells whose centers lie inside.
struct Rect {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
};

/// Background 1, value eta on every cell covered by a rectangle.
CoefficientField generate_inclusions_channels(const FineMesh& mesh, const std::vector<Rect>& geometry,
                                              double eta);
/// diag(k11, 1).
CoefficientField anisotropic_from_scalar(const CoefficientField& k11);

/// Named geometries shipped with the runner: channels_inclusions, centered_block,
/// inclusions, channels, shifted_inclusions.
std::vector<Rect> preset_geometry(const std::string& name);
std::vector<std::string> preset_names();

/// Four-term affine family (alternating channel segments, one term per family).
AffineCoefficient affine_four(const FineMesh& mesh, double eta);
/// k11(mu) = (1 - mu) kappa0 + mu kappa1, k22 = 1.
AffineCoefficient anisotropic_pair(const FineMesh& mesh, double eta);
/// kappa1 + exp(alpha mu) kappa2 with the two scalar fields of anisotropic_pair.
AffineCoefficient exponential_pair(const FineMesh& mesh, double eta, double alpha);

/// Text format: "nx ny scalar|tensor" then one line per cell, row-major.
CoefficientField read_field(const std::string& path);
void write_field(const std::string& path, const CoefficientField& field);
/// Nodal dump: "nx ny nodal" then (nx+1)(ny+1) values, row-major.
void write_nodal(const std::string& path, int nx, int ny, const std::vector<double>& values);

}  // namespace gmsfem
