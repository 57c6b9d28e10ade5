#include "gmsfem/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gmsfem/error.hpp"

namespace gmsfem {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class E>
void read_enum(const json& j, const char* key, E& out, const std::string& where,
               std::initializer_list<std::pair<const char*, E>> names) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_string()) throw ConfigError(where + "." + key + ": expected a string");
  const std::string v = j.at(key).get<std::string>();
  for (const auto& [name, value] : names) {
    if (v == name) {
      out = value;
      return;
    }
  }
  throw ConfigError(where + "." + key + ": unknown value '" + v + "'");
}

const std::initializer_list<std::pair<const char*, FieldSource>> kFieldSources = {
    {"preset", FieldSource::preset},
    {"file", FieldSource::file},
    {"affine_four", FieldSource::affine_four},
    {"anisotropic_pair", FieldSource::anisotropic_pair},
    {"exponential_pair", FieldSource::exponential_pair}};
const std::initializer_list<std::pair<const char*, OfflineMode>> kOfflineModes = {
    {"average", OfflineMode::average}, {"union", OfflineMode::union_of_samples}};
const std::initializer_list<std::pair<const char*, PouStage>> kPouStages = {
    {"online", PouStage::online}, {"offline", PouStage::offline}};
const std::initializer_list<std::pair<const char*, CouplingKind>> kCouplings = {
    {"galerkin", CouplingKind::galerkin},
    {"petrov_galerkin", CouplingKind::petrov_galerkin},
    {"dg", CouplingKind::dg}};
const std::initializer_list<std::pair<const char*, SolverKind>> kSolvers = {
    {"direct", SolverKind::direct}, {"pcg", SolverKind::pcg}};
const std::initializer_list<std::pair<const char*, StudyKind>> kStudies = {
    {"none", StudyKind::none},
    {"convergence", StudyKind::convergence},
    {"precond", StudyKind::precond},
    {"eigendecay", StudyKind::eigendecay},
    {"nonlinear", StudyKind::nonlinear}};
const std::initializer_list<std::pair<const char*, BoundaryKind>> kBoundaries = {
    {"x+y", BoundaryKind::linear_xy}, {"zero", BoundaryKind::zero}};
const std::initializer_list<std::pair<const char*, FreezeMode>> kFreeze = {
    {"node_average", FreezeMode::node_average}, {"cell_average", FreezeMode::cell_average}};

template <class E>
std::string name_of(E value, std::initializer_list<std::pair<const char*, E>> names) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "?";
}

Selection parse_selection(const json& j, const std::string& where) {
  check_keys(j, where, {"rule", "count", "delta", "tau", "extra"});
  Selection s;
  read_enum(j, "rule", s.rule, where,
            {{"count", Selection::Rule::count},
             {"all", Selection::Rule::all},
             {"threshold", Selection::Rule::threshold},
             {"unbounded_plus", Selection::Rule::unbounded_plus}});
  read(j, "count", s.count, where);
  read(j, "delta", s.delta, where);
  read(j, "tau", s.tau, where);
  read(j, "extra", s.extra, where);
  if (s.rule == Selection::Rule::count && s.count < 1) throw ConfigError(where + ".count must be >= 1");
  if (s.rule == Selection::Rule::threshold && !(s.delta >= 0.0 && s.delta <= 1.0))
    throw ConfigError(where + ".delta must lie in [0, 1]");
  if (s.rule == Selection::Rule::unbounded_plus && (!(s.tau > 0.0) || s.extra < 0))
    throw ConfigError(where + ": tau must be positive and extra non-negative");
  return s;
}

json selection_json(const Selection& s) {
  json j;
  j["rule"] = name_of(s.rule, {{"count", Selection::Rule::count},
                               {"all", Selection::Rule::all},
                               {"threshold", Selection::Rule::threshold},
                               {"unbounded_plus", Selection::Rule::unbounded_plus}});
  switch (s.rule) {
    case Selection::Rule::count: j["count"] = s.count; break;
    case Selection::Rule::threshold: j["delta"] = s.delta; break;
    case Selection::Rule::unbounded_plus:
      j["tau"] = s.tau;
      j["extra"] = s.extra;
      break;
    default: break;
  }
  return j;
}

void check_window(const double* w, const std::string& where) {
  if (!(0.0 <= w[0] && w[0] < w[1] && w[1] <= 1.0 && 0.0 <= w[2] && w[2] < w[3] && w[3] <= 1.0))
    throw ConfigError(where + ": window must satisfy 0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1");
}

void read_window(const json& j, const char* key, double* w, const std::string& where) {
  if (!j.contains(key)) return;
  std::vector<double> v;
  read(j, key, v, where);
  if (v.size() != 4) throw ConfigError(where + "." + key + ": expected [x0, x1, y0, y1]");
  for (int k = 0; k < 4; ++k) w[k] = v[k];
}

void validate(RunConfig& c) {
  const auto& m = c.mesh;
  if (m.nx < 1 || m.ny < 1 || m.Nx < 1 || m.Ny < 1) throw ConfigError("mesh: sizes must be >= 1");
  if (m.nx % m.Nx || m.ny % m.Ny) throw ConfigError("mesh: nx must be divisible by Nx and ny by Ny");
  if (m.pad < 0) throw ConfigError("mesh.pad must be >= 0");
  if (!(c.field.eta >= 1.0)) throw ConfigError("field.eta must be >= 1");
  if (c.field.source == FieldSource::file) {
    if (c.field.path.empty()) throw ConfigError("field.path is required for source 'file'");
    if (!std::filesystem::exists(c.field.path))
      throw ConfigError("field.path '" + c.field.path + "' does not exist");
  }
  auto& p = c.params;
  if (!p.weights.empty()) {
    if (p.weights.size() != p.samples.size())
      throw ConfigError("parameters.weights must match parameters.samples in length");
    double sum = 0.0;
    for (double t : p.weights) {
      if (t < 0.0) throw ConfigError("parameters.weights must be non-negative");
      sum += t;
    }
    if (!(sum > 0.0)) throw ConfigError("parameters.weights must have a positive sum");
  }
  for (const auto& s : p.samples) {
    if (!p.samples.empty() && s.size() != p.samples.front().size())
      throw ConfigError("parameters.samples must all have the same dimension");
  }
  if (c.snapshots.count < 1) throw ConfigError("snapshots.count must be >= 1");
  if (c.forms.s_extended && m.pad == 0) throw ConfigError("forms.s_extended needs mesh.pad > 0");
  auto& lad = c.selection.ladder;
  if (lad.empty()) throw ConfigError("selection.ladder must not be empty");
  for (size_t k = 0; k < lad.size(); ++k) {
    if (lad[k] < 0) throw ConfigError("selection.ladder entries must be non-negative");
    if (k > 0 && lad[k] <= lad[k - 1]) throw ConfigError("selection.ladder must be strictly increasing");
  }
  if (!(c.coupling.penalty > 0.0)) throw ConfigError("coupling.penalty must be positive");
  if (c.solver.overlap < 1) throw ConfigError("solver.overlap must be >= 1");
  if (!(c.solver.tol > 0.0) || c.solver.max_it < 1) throw ConfigError("solver: tol > 0 and max_it >= 1");
  for (double e : c.study.precond.etas) {
    if (!(e >= 1.0)) throw ConfigError("study.precond.etas must be >= 1");
  }
  for (const auto& f : c.study.precond.families) {
    if (f != "multiscale" && f != "spectral")
      throw ConfigError("study.precond.families: unknown family '" + f + "'");
  }
  check_window(c.study.eigendecay.target, "study.eigendecay.target");
  check_window(c.study.eigendecay.extended, "study.eigendecay.extended");
  const auto& nl = c.study.nonlinear;
  if (!(nl.lo < nl.hi)) throw ConfigError("study.nonlinear: lo < hi required");
  if (nl.samples < 2) throw ConfigError("study.nonlinear.samples must be >= 2");
  if (!(nl.tol > 0.0) || nl.max_it < 1) throw ConfigError("study.nonlinear: tol > 0 and max_it >= 1");
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  check_keys(j, "config", {"mesh", "field", "parameters", "snapshots", "forms", "pou", "selection",
                           "coupling", "solver", "bc", "source", "study"});
  if (j.contains("mesh")) {
    const json& m = j["mesh"];
    check_keys(m, "mesh", {"nx", "ny", "Nx", "Ny", "pad"});
    read(m, "nx", c.mesh.nx, "mesh");
    read(m, "ny", c.mesh.ny, "mesh");
    read(m, "Nx", c.mesh.Nx, "mesh");
    read(m, "Ny", c.mesh.Ny, "mesh");
    read(m, "pad", c.mesh.pad, "mesh");
  }
  if (j.contains("field")) {
    const json& f = j["field"];
    check_keys(f, "field", {"source", "preset", "path", "eta", "tensor", "alpha"});
    read_enum(f, "source", c.field.source, "field", kFieldSources);
    read(f, "preset", c.field.preset, "field");
    read(f, "path", c.field.path, "field");
    read(f, "eta", c.field.eta, "field");
    read(f, "tensor", c.field.tensor, "field");
    read(f, "alpha", c.field.alpha, "field");
    if (!c.field.path.empty() && std::filesystem::path(c.field.path).is_relative())
      c.field.path = (std::filesystem::path(base_dir) / c.field.path).lexically_normal().string();
  }
  if (j.contains("parameters")) {
    const json& p = j["parameters"];
    check_keys(p, "parameters", {"samples", "weights", "online", "offline_mode", "pou_stage"});
    read(p, "samples", c.params.samples, "parameters");
    read(p, "weights", c.params.weights, "parameters");
    read(p, "online", c.params.online, "parameters");
    read_enum(p, "offline_mode", c.params.offline_mode, "parameters", kOfflineModes);
    read_enum(p, "pou_stage", c.params.pou_stage, "parameters", kPouStages);
  }
  if (j.contains("snapshots")) {
    const json& s = j["snapshots"];
    check_keys(s, "snapshots", {"kind", "count"});
    if (s.contains("kind")) c.snapshots.kind = parse_snapshot_kind(s["kind"].get<std::string>());
    read(s, "count", c.snapshots.count, "snapshots");
  }
  if (j.contains("forms")) {
    const json& f = j["forms"];
    check_keys(f, "forms", {"a", "s_extended"});
    if (f.contains("a")) c.forms.a = parse_a_form(f["a"].get<std::string>());
    read(f, "s_extended", c.forms.s_extended, "forms");
  }
  if (j.contains("pou")) {
    if (!j["pou"].is_string()) throw ConfigError("pou: expected a string");
    c.pou = parse_pou_kind(j["pou"].get<std::string>());
  }
  if (j.contains("selection")) {
    const json& s = j["selection"];
    check_keys(s, "selection", {"offline", "online", "ladder"});
    if (s.contains("offline")) c.selection.offline = parse_selection(s["offline"], "selection.offline");
    if (s.contains("online")) c.selection.online = parse_selection(s["online"], "selection.online");
    read(s, "ladder", c.selection.ladder, "selection");
  }
  if (j.contains("coupling")) {
    const json& s = j["coupling"];
    check_keys(s, "coupling", {"kind", "penalty"});
    read_enum(s, "kind", c.coupling.kind, "coupling", kCouplings);
    read(s, "penalty", c.coupling.penalty, "coupling");
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    check_keys(s, "solver", {"kind", "overlap", "tol", "max_it"});
    read_enum(s, "kind", c.solver.kind, "solver", kSolvers);
    read(s, "overlap", c.solver.overlap, "solver");
    read(s, "tol", c.solver.tol, "solver");
    read(s, "max_it", c.solver.max_it, "solver");
  }
  read_enum(j, "bc", c.bc, "config", kBoundaries);
  read(j, "source", c.source, "config");
  if (j.contains("study")) {
    const json& s = j["study"];
    check_keys(s, "study", {"kind", "precond", "eigendecay", "nonlinear"});
    read_enum(s, "kind", c.study.kind, "study", kStudies);
    if (s.contains("precond")) {
      const json& p = s["precond"];
      check_keys(p, "study.precond", {"etas", "families"});
      read(p, "etas", c.study.precond.etas, "study.precond");
      read(p, "families", c.study.precond.families, "study.precond");
    }
    if (s.contains("eigendecay")) {
      const json& e = s["eigendecay"];
      check_keys(e, "study.eigendecay", {"target", "extended", "force_size", "force_spacing", "ranks",
                                           "forces_outside_extended"});
      read_window(e, "target", c.study.eigendecay.target, "study.eigendecay");
      read_window(e, "extended", c.study.eigendecay.extended, "study.eigendecay");
      read(e, "force_size", c.study.eigendecay.force_size, "study.eigendecay");
      read(e, "force_spacing", c.study.eigendecay.force_spacing, "study.eigendecay");
      read(e, "ranks", c.study.eigendecay.ranks, "study.eigendecay");
      read(e, "forces_outside_extended", c.study.eigendecay.forces_outside_extended, "study.eigendecay");
    }
    if (s.contains("nonlinear")) {
      const json& n = s["nonlinear"];
      check_keys(n, "study.nonlinear", {"lo", "hi", "samples", "tol", "max_it", "freeze"});
      read(n, "lo", c.study.nonlinear.lo, "study.nonlinear");
      read(n, "hi", c.study.nonlinear.hi, "study.nonlinear");
      read(n, "samples", c.study.nonlinear.samples, "study.nonlinear");
      read(n, "tol", c.study.nonlinear.tol, "study.nonlinear");
      read(n, "max_it", c.study.nonlinear.max_it, "study.nonlinear");
      read_enum(n, "freeze", c.study.nonlinear.freeze, "study.nonlinear", kFreeze);
    }
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

std::string canonical_json(const RunConfig& c) {
  json j;
  j["mesh"] = {{"nx", c.mesh.nx}, {"ny", c.mesh.ny}, {"Nx", c.mesh.Nx}, {"Ny", c.mesh.Ny}, {"pad", c.mesh.pad}};
  j["field"] = {{"source", to_string(c.field.source)}, {"preset", c.field.preset}, {"path", c.field.path},
                {"eta", c.field.eta}, {"tensor", c.field.tensor}, {"alpha", c.field.alpha}};
  j["parameters"] = {{"samples", c.params.samples},
                     {"weights", c.params.weights},
                     {"online", c.params.online},
                     {"offline_mode", name_of(c.params.offline_mode, kOfflineModes)},
                     {"pou_stage", name_of(c.params.pou_stage, kPouStages)}};
  j["snapshots"] = {{"kind", to_string(c.snapshots.kind)}, {"count", c.snapshots.count}};
  j["forms"] = {{"a", to_string(c.forms.a)}, {"s_extended", c.forms.s_extended}};
  j["pou"] = to_string(c.pou);
  j["selection"] = {{"offline", selection_json(c.selection.offline)},
                    {"online", selection_json(c.selection.online)},
                    {"ladder", c.selection.ladder}};
  j["coupling"] = {{"kind", name_of(c.coupling.kind, kCouplings)}, {"penalty", c.coupling.penalty}};
  j["solver"] = {{"kind", name_of(c.solver.kind, kSolvers)},
                 {"overlap", c.solver.overlap},
                 {"tol", c.solver.tol},
                 {"max_it", c.solver.max_it}};
  j["bc"] = name_of(c.bc, kBoundaries);
  j["source"] = c.source;
  const auto& e = c.study.eigendecay;
  const auto& n = c.study.nonlinear;
  j["study"] = {
      {"kind", to_string(c.study.kind)},
      {"precond", {{"etas", c.study.precond.etas}, {"families", c.study.precond.families}}},
      {"eigendecay",
       {{"target", std::vector<double>(e.target, e.target + 4)},
        {"extended", std::vector<double>(e.extended, e.extended + 4)},
        {"force_size", e.force_size},
        {"force_spacing", e.force_spacing},
        {"ranks", e.ranks},
        {"forces_outside_extended", e.forces_outside_extended}}},
      {"nonlinear",
       {{"lo", n.lo},
        {"hi", n.hi},
        {"samples", n.samples},
        {"tol", n.tol},
        {"max_it", n.max_it},
        {"freeze", name_of(n.freeze, kFreeze)}}}};
  return j.dump();
}

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical_json(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string to_string(FieldSource s) { return name_of(s, kFieldSources); }
std::string to_string(StudyKind s) { return name_of(s, kStudies); }

}  // namespace gmsfem
