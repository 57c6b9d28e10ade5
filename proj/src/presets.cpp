#include <map>

#include "gmsfem/coeff.hpp"
#include "gmsfem/error.hpp"

namespace gmsfem {

namespace {

// Small square of side s centered at (cx, cy).
Rect square(double cx, double cy, double s) { return {cx - s / 2, cx + s / 2, cy - s / 2, cy + s / 2}; }

// Everything stays inside [0.1, 0.9]^2 so no feature touches a coarse edge of a
// boundary block.
std::vector<Rect> channels_inclusions() {
  return {
      {0.10, 0.90, 0.22, 0.24},  // long horizontal channels
      {0.15, 0.90, 0.56, 0.58},
      {0.15, 0.80, 0.83, 0.85},
      {0.32, 0.68, 0.37, 0.39},
      {0.72, 0.74, 0.30, 0.90},  // vertical channels crossing them
      {0.26, 0.28, 0.10, 0.45},
      {0.46, 0.48, 0.62, 0.90},
      square(0.15, 0.45, 0.04),  square(0.45, 0.30, 0.04), square(0.55, 0.75, 0.04),
      square(0.85, 0.15, 0.04),  square(0.35, 0.65, 0.04), square(0.65, 0.45, 0.04),
      square(0.15, 0.75, 0.04),  square(0.88, 0.66, 0.04), square(0.52, 0.12, 0.04),
      square(0.20, 0.60, 0.04),  square(0.60, 0.20, 0.04), square(0.40, 0.50, 0.04),
      square(0.80, 0.40, 0.04),  square(0.30, 0.80, 0.04), square(0.62, 0.68, 0.04),
  };
}

std::vector<Rect> inclusions() {
  std::vector<Rect> r;
  for (int b = 0; b < 5; ++b) {
    for (int a = 0; a < 5; ++a) r.push_back(square(0.13 + 0.2 * a, 0.13 + 0.2 * b, 0.04));
  }
  return r;
}

std::vector<Rect> channels() {
  return {{0.12, 0.88, 0.14, 0.16}, {0.12, 0.88, 0.44, 0.46}, {0.12, 0.88, 0.74, 0.76}};
}

std::vector<Rect> shifted_inclusions() {
  std::vector<Rect> r;
  for (int b = 0; b < 4; ++b) {
    for (int a = 0; a < 4; ++a) r.push_back(square(0.17 + 0.2 * a, 0.17 + 0.2 * b, 0.04));
  }
  return r;
}

const std::map<std::string, std::vector<Rect> (*)()>& registry() {
  static const std::map<std::string, std::vector<Rect> (*)()> presets = {
      {"channels_inclusions", &channels_inclusions},
      {"centered_block", [] { return std::vector<Rect>{{0.45, 0.55, 0.45, 0.55}}; }},
      {"inclusions", &inclusions},
      {"channels", &channels},
      {"shifted_inclusions", &shifted_inclusions},
      {"empty", [] { return std::vector<Rect>{}; }},
  };
  return presets;
}

}  // namespace

std::vector<Rect> preset_geometry(const std::string& name) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw ConfigError("unknown geometry preset '" + name + "'");
  return it->second();
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

AffineCoefficient affine_four(const FineMesh& mesh, double eta) {
  // Term 0: horizontal channels, term 1: vertical channels, terms 2 and 3:
  // short bars straddling the vertical and horizontal coarse lines.
  std::vector<std::vector<Rect>> parts(4);
  for (double y : {0.24, 0.64}) parts[0].push_back({0.12, 0.88, y, y + 0.02});
  for (double x : {0.34, 0.74}) parts[1].push_back({x, x + 0.02, 0.12, 0.88});
  for (double x : {0.2, 0.4, 0.6, 0.8}) {
    for (double y : {0.15, 0.55}) parts[2].push_back({x - 0.05, x + 0.05, y - 0.01, y + 0.01});
  }
  for (double y : {0.2, 0.4, 0.6, 0.8}) {
    for (double x : {0.15, 0.55}) parts[3].push_back({x - 0.01, x + 0.01, y - 0.05, y + 0.05});
  }
  AffineCoefficient aff;
  aff.p = 4;
  aff.lo.assign(4, 0.0);
  aff.hi.assign(4, 1.0);
  for (int q = 0; q < 4; ++q) {
    aff.terms.push_back({Theta::component(q), generate_inclusions_channels(mesh, parts[q], eta)});
  }
  return aff;
}

AffineCoefficient anisotropic_pair(const FineMesh& mesh, double eta) {
  AffineCoefficient aff;
  aff.p = 1;
  aff.lo = {0.0};
  aff.hi = {1.0};
  aff.terms.push_back({Theta::one_minus(0), anisotropic_from_scalar(generate_inclusions_channels(
                                               mesh, inclusions(), eta))});
  aff.terms.push_back(
      {Theta::component(0), anisotropic_from_scalar(generate_inclusions_channels(mesh, channels(), eta))});
  return aff;
}

AffineCoefficient exponential_pair(const FineMesh& mesh, double eta, double alpha) {
  AffineCoefficient aff;
  aff.p = 1;
  aff.terms.push_back({Theta::constant_value(1.0), generate_inclusions_channels(mesh, inclusions(), eta)});
  aff.terms.push_back({Theta::exponential(0, alpha), generate_inclusions_channels(mesh, channels(), eta)});
  return aff;
}

}  // namespace gmsfem
