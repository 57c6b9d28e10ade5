#include "gmsfem/coeff.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "gmsfem/error.hpp"

namespace gmsfem {

CoefficientField CoefficientField::constant(int nx, int ny, double value) {
  CoefficientField f;
  f.nx = nx;
  f.ny = ny;
  f.k11.assign(static_cast<size_t>(nx) * ny, value);
  return f;
}

double CoefficientField::contrast() const {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double v : k11) lo = std::min(lo, v), hi = std::max(hi, v);
  for (double v : k22) lo = std::min(lo, v), hi = std::max(hi, v);
  return hi / lo;
}

void CoefficientField::check_compatible(const FineMesh& mesh) const {
  if (nx != mesh.nx() || ny != mesh.ny() || static_cast<int>(k11.size()) != mesh.cell_count() ||
      (is_tensor() && k22.size() != k11.size())) {
    throw ConfigError("coefficient field " + std::to_string(nx) + "x" + std::to_string(ny) +
                      " does not match mesh " + std::to_string(mesh.nx()) + "x" +
                      std::to_string(mesh.ny()));
  }
}

double Theta::operator()(const std::vector<double>& mu) const {
  if (kind == ThetaKind::constant) return c;
  if (j < 0 || j >= static_cast<int>(mu.size())) {
    throw ConfigError("parameter function refers to mu_" + std::to_string(j) + " but p = " +
                      std::to_string(mu.size()));
  }
  switch (kind) {
    case ThetaKind::mu: return c * mu[j];
    case ThetaKind::one_minus_mu: return c * (1.0 - mu[j]);
    case ThetaKind::exp_mu: return c * std::exp(alpha * mu[j]);
    default: return c;
  }
}

std::vector<double> AffineCoefficient::thetas(const std::vector<double>& mu) const {
  std::vector<double> t;
  t.reserve(terms.size());
  for (const auto& term : terms) t.push_back(term.theta(mu));
  return t;
}

bool AffineCoefficient::admissible(const std::vector<double>& mu) const {
  if (static_cast<int>(mu.size()) != p) return false;
  for (int j = 0; j < p; ++j) {
    if (!lo.empty() && mu[j] < lo[j]) return false;
    if (!hi.empty() && mu[j] > hi[j]) return false;
  }
  return true;
}

AffineCoefficient single_term(CoefficientField field) {
  AffineCoefficient aff;
  aff.terms.push_back({Theta::constant_value(1.0), std::move(field)});
  return aff;
}

CoefficientField combine(const AffineCoefficient& aff, const std::vector<double>& theta) {
  if (aff.terms.empty()) throw ConfigError("affine coefficient has no terms");
  if (theta.size() != aff.terms.size()) throw ConfigError("theta vector length != term count");
  const CoefficientField& first = aff.terms.front().field;
  bool tensor = false;
  for (const auto& term : aff.terms) {
    if (term.field.nx != first.nx || term.field.ny != first.ny) {
      throw ConfigError("affine terms live on different grids");
    }
    tensor = tensor || term.field.is_tensor();
  }
  CoefficientField out = CoefficientField::constant(first.nx, first.ny, 0.0);
  if (tensor) out.k22.assign(out.k11.size(), 0.0);
  for (size_t q = 0; q < aff.terms.size(); ++q) {
    const CoefficientField& f = aff.terms[q].field;
    for (int c = 0; c < out.cell_count(); ++c) {
      out.k11[c] += theta[q] * f.xx(c);
      if (tensor) out.k22[c] += theta[q] * f.yy(c);
    }
  }
  for (int c = 0; c < out.cell_count(); ++c) {
    if (!(out.k11[c] > 0.0) || (tensor && !(out.k22[c] > 0.0))) {
      throw ConfigError("coefficient is not positive at cell " + std::to_string(c));
    }
  }
  return out;
}

CoefficientField evaluate(const AffineCoefficient& aff, const std::vector<double>& mu) {
  if (!aff.admissible(mu)) throw ConfigError("parameter point outside the admissible box");
  return combine(aff, aff.thetas(mu));
}

CoefficientField generate_inclusions_channels(const FineMesh& mesh, const std::vector<Rect>& geometry,
                                              double eta) {
  if (!(eta >= 1.0)) throw ConfigError("contrast must be >= 1");
  CoefficientField f = CoefficientField::constant(mesh.nx(), mesh.ny(), 1.0);
  for (const Rect& r : geometry) {
    if (r.x0 < 0.0 || r.y0 < 0.0 || r.x1 > 1.0 || r.y1 > 1.0 || r.x0 > r.x1 || r.y0 > r.y1) {
      throw ConfigError("geometry rectangle outside the unit square");
    }
    for (int j = 0; j < mesh.ny(); ++j) {
      const double y = (j + 0.5) * mesh.hy();
      if (y < r.y0 || y > r.y1) continue;
      for (int i = 0; i < mesh.nx(); ++i) {
        const double x = (i + 0.5) * mesh.hx();
        if (x >= r.x0 && x <= r.x1) f.k11[mesh.cell(i, j)] = eta;
      }
    }
  }
  return f;
}

CoefficientField anisotropic_from_scalar(const CoefficientField& k11) {
  if (k11.is_tensor()) throw ConfigError("anisotropic_from_scalar expects a scalar field");
  CoefficientField t = k11;
  t.k22.assign(t.k11.size(), 1.0);
  return t;
}

CoefficientField read_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field file " + path);
  CoefficientField f;
  std::string kind;
  if (!(in >> f.nx >> f.ny >> kind) || f.nx < 1 || f.ny < 1) {
    throw ConfigError("bad field header in " + path);
  }
  if (kind != "scalar" && kind != "tensor") throw ConfigError("unknown field kind '" + kind + "'");
  const bool tensor = kind == "tensor";
  const int n = f.nx * f.ny;
  f.k11.resize(n);
  if (tensor) f.k22.resize(n);
  for (int c = 0; c < n; ++c) {
    if (!(in >> f.k11[c]) || (tensor && !(in >> f.k22[c]))) {
      throw ConfigError("field file " + path + " ends early at cell " + std::to_string(c));
    }
    if (!(f.k11[c] > 0.0) || (tensor && !(f.k22[c] > 0.0))) {
      throw ConfigError("non-positive conductivity at cell " + std::to_string(c) + " in " + path);
    }
  }
  return f;
}

void write_field(const std::string& path, const CoefficientField& field) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << field.nx << ' ' << field.ny << ' ' << (field.is_tensor() ? "tensor" : "scalar") << '\n';
  out << std::setprecision(17);
  for (int c = 0; c < field.cell_count(); ++c) {
    out << field.k11[c];
    if (field.is_tensor()) out << ' ' << field.k22[c];
    out << '\n';
  }
}

void write_nodal(const std::string& path, int nx, int ny, const std::vector<double>& values) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << nx << ' ' << ny << " nodal\n" << std::setprecision(17);
  for (double v : values) out << v << '\n';
}

}  // namespace gmsfem
