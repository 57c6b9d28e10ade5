#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "gmsfem/error.hpp"
#include "gmsfem/io.hpp"
#include "gmsfem/studies.hpp"

using namespace gmsfem;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  int workers = 0;
  unsigned seed = 0;
};

std::string out_path(const Options& o, const std::string& name) { return (fs::path(o.out) / name).string(); }

void announce(const std::string& path) { std::printf("wrote %s\n", path.c_str()); }

void write_table(const Options& o, const std::string& name, const Table& t) {
  const std::string p = out_path(o, name);
  t.write(p);
  announce(p);
}

RunConfig load(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  return load_config(o.config);
}

int mesh_info(const Options& o) {
  const RunConfig cfg = load(o);
  const Problem pb = build_problem(cfg);
  const std::string hash = config_hash(cfg);
  Table t{{"quantity", "value", "config_hash"}, {}};
  t.add({"fine_cells", fmt(pb.mesh.cell_count()), hash});
  t.add({"fine_nodes", fmt(pb.mesh.node_count()), hash});
  t.add({"fine_free_nodes", fmt(pb.mesh.node_count() - static_cast<int>(pb.mesh.boundary_nodes().size())), hash});
  t.add({"coarse_blocks", fmt(pb.coarse.block_count()), hash});
  t.add({"coarse_nodes", fmt(pb.coarse.node_count()), hash});
  t.add({"interior_coarse_nodes", fmt(static_cast<int>(pb.coarse.interior_nodes().size())), hash});
  t.add({"block_cells_x", fmt(pb.coarse.block_cells_x()), hash});
  t.add({"block_cells_y", fmt(pb.coarse.block_cells_y()), hash});
  t.add({"contrast", fmt(pb.kappa.contrast()), hash});
  std::cout << t.to_csv();
  write_table(o, "mesh_info.csv", t);
  return 0;
}

int gen_field(const Options& o) {
  const RunConfig cfg = load(o);
  const Problem pb = build_problem(cfg);
  const std::string p = out_path(o, "field.txt");
  write_field(p, pb.kappa);
  announce(p);
  if (pb.aff.terms.size() > 1) {
    for (size_t q = 0; q < pb.aff.terms.size(); ++q) {
      const std::string tp = out_path(o, "field_term" + std::to_string(q) + ".txt");
      write_field(tp, pb.aff.terms[q].field);
      announce(tp);
    }
  }
  return 0;
}

int snapshots(const Options& o) {
  const RunConfig cfg = load(o);
  const Problem pb = build_problem(cfg);
  std::vector<CoefficientField> fields;
  for (const auto& mu : offline_samples(pb, cfg)) fields.push_back(evaluate(pb.aff, mu));
  const std::string hash = config_hash(cfg);
  const auto& nodes = pb.coarse.interior_nodes();
  std::vector<int> cols(nodes.size());
  parallel_for(static_cast<int>(nodes.size()), [&](int k) { cols[k] = node_snapshots(pb, cfg, nodes[k], fields).size(); });
  Table t{{"node_index", "snapshot_columns", "config_hash"}, {}};
  for (size_t k = 0; k < nodes.size(); ++k) t.add({fmt(nodes[k]), fmt(cols[k]), hash});
  write_table(o, "snapshots.csv", t);
  return 0;
}

Table dims_table(const std::vector<ReducedSpace>& spaces, const std::string& hash) {
  Table t{{"node_index", "dim", "deflated", "lambda_star", "config_hash"}, {}};
  for (const auto& s : spaces) t.add({fmt(s.node), fmt(s.size()), fmt(s.deflated), fmt(s.lambda_star), hash});
  return t;
}

int offline(const Options& o) {
  const RunConfig cfg = load(o);
  const Problem pb = build_problem(cfg);
  const OfflineStage off = run_offline(pb, cfg);
  const std::string hash = config_hash(cfg);
  write_table(o, "offline_eigenvalues.csv", eigenvalue_table(off.spaces, hash));
  write_table(o, "offline_dims.csv", dims_table(off.spaces, hash));
  return 0;
}

int online(const Options& o) {
  const RunConfig cfg = load(o);
  const Problem pb = build_problem(cfg);
  const OfflineStage off = run_offline(pb, cfg);
  const PartitionOfUnity pou = online_pou(pb, cfg, off);
  const auto full = run_online(pb, cfg, off, pou);
  const int rung = cfg.selection.ladder.empty() ? 0 : cfg.selection.ladder.front();
  const auto sel = select_spaces(full, rung_selection(cfg.selection.online, rung));
  const std::string hash = config_hash(cfg);
  write_table(o, "online_eigenvalues.csv", eigenvalue_table(full, hash));
  write_table(o, "online_dims.csv", dims_table(sel, hash));
  return 0;
}

int solve(const Options& o) {
  const RunConfig cfg = load(o);
  const Problem pb = build_problem(cfg);
  const OfflineStage off = run_offline(pb, cfg);
  const PartitionOfUnity pou = online_pou(pb, cfg, off);
  const auto full = run_online(pb, cfg, off, pou);
  const int rung = cfg.selection.ladder.empty() ? 0 : cfg.selection.ladder.front();
  double lambda_star = 0.0;
  const auto spaces = select_spaces(full, rung_selection(cfg.selection.online, rung), &lambda_star);
  const FineSystem fsys = fine_system(pb, pb.kappa, &pou);
  const GmsResult g = solve_with_spaces(pb, cfg, fsys, spaces, pou);
  const Vector ref = fine_solve(fsys);
  const ErrorNorms e = relative_errors(g.u, ref, fsys.A_kappa, fsys.M_kappa);
  const std::string hash = config_hash(cfg);

  const std::vector<double> u(g.u.data(), g.u.data() + g.u.size());
  const std::vector<double> r(ref.data(), ref.data() + ref.size());
  write_nodal(out_path(o, "solution.txt"), pb.mesh.nx(), pb.mesh.ny(), u);
  announce(out_path(o, "solution.txt"));
  write_nodal(out_path(o, "reference.txt"), pb.mesh.nx(), pb.mesh.ny(), r);
  announce(out_path(o, "reference.txt"));
  Table t{{"dim", "energy_err", "h1_err", "l2w_err", "lambda_star", "config_hash"}, {}};
  t.add({fmt(g.dim), fmt(std::sqrt(e.energy)), fmt(std::sqrt(e.h1)), fmt(std::sqrt(e.l2w)), fmt(lambda_star), hash});
  std::cout << t.to_csv();
  write_table(o, "coarse_report.csv", t);
  if (g.pcg) write_table(o, "pcg.csv", pcg_table(*g.pcg, hash));
  return 0;
}

int study_convergence(const Options& o) {
  const ConvergenceStudy s = run_convergence_study(load(o));
  std::cout << s.table.to_csv();
  write_table(o, "convergence.csv", s.table);
  write_table(o, "convergence_eigenvalues.csv", s.eigenvalues);
  return 0;
}

int study_precond(const Options& o) {
  const RunConfig cfg = load(o);
  const PrecondStudy s = run_precond_study(cfg);
  std::cout << s.table.to_csv();
  write_table(o, "precond.csv", s.table);
  const std::string hash = config_hash(cfg);
  Table h{{"eta", "family", "iter", "relative_residual", "config_hash"}, {}};
  for (const auto& row : s.rows) {
    for (size_t k = 0; k < row.report.residuals.size(); ++k) {
      h.add({fmt(row.eta), row.family, fmt(static_cast<int>(k)), fmt(row.report.residuals[k]), hash});
    }
  }
  write_table(o, "precond_history.csv", h);
  return 0;
}

int study_eigendecay(const Options& o) {
  const EigendecayStudy s = run_eigendecay_study(load(o));
  std::cout << s.summary.to_csv();
  write_table(o, "eigendecay.csv", s.table);
  write_table(o, "eigendecay_summary.csv", s.summary);
  return 0;
}

int study_nonlinear(const Options& o) {
  const NonlinearStudy s = run_nonlinear_study(load(o));
  std::cout << s.table.to_csv();
  for (const auto& row : s.rows) {
    if (row.clamped) std::fprintf(stderr, "warning: %s clamped %d block averages into the sample range\n", row.label.c_str(), row.clamped);
  }
  write_table(o, "nonlinear.csv", s.table);
  write_table(o, "nonlinear_iterations.csv", s.iterations);
  return 0;
}

// Randomized checks against independent dense computations.
int self_test(const Options& o) {
  std::mt19937 rng(o.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto random = [&](int r, int c) {
    Matrix m(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) m(i, j) = U(rng);
    return m;
  };
  int failures = 0;
  auto report = [&](const char* name, bool ok, const std::string& detail) {
    std::printf("%s %s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    if (!ok) ++failures;
  };

  double worst = 0.0;
  bool counts_ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 30);
    const int rank = 1 + static_cast<int>(rng() % n);
    const Matrix X = random(n, n), Y = random(n, rank);
    const Matrix A = X * X.transpose() + n * Matrix::Identity(n, n);
    const Matrix S = Y * Y.transpose();
    const GenEig d = dense_gen_eig(A, S);
    const GenEig s = semidefinite_gen_eig(A, S);
    counts_ok = counts_ok && d.infinite_count == n - rank && s.infinite_count == n - rank;
    for (int k = 0; k < n; ++k) {
      if (std::isinf(d.lambda[k]) || std::isinf(s.lambda[k])) continue;
      worst = std::max(worst, std::abs(d.lambda[k] - s.lambda[k]) / std::abs(d.lambda[k]));
    }
  }
  report("pencil", worst <= 1e-8 && counts_ok, "max_rel_diff=" + fmt(worst));

  const int nx = 8 + 4 * static_cast<int>(rng() % 3);
  FineMesh mesh(nx, nx);
  CoarseMesh coarse(mesh, 4, 4);
  CoefficientField kappa = CoefficientField::constant(nx, nx, 1.0);
  for (double& v : kappa.k11) v = std::pow(10.0, 3.0 * (0.5 + 0.5 * U(rng)));
  double pou_err = 0.0;
  for (PouKind k : {PouKind::bilinear, PouKind::multiscale, PouKind::energy_min}) {
    const Vector sum = build_pou(k, mesh, coarse, kappa).sum(mesh);
    pou_err = std::max(pou_err, (sum.array() - 1.0).abs().maxCoeff());
  }
  report("partition_of_unity", pou_err <= 1e-10, "max_sum_err=" + fmt(pou_err));

  const int n = 40;
  const Matrix X = random(n, n);
  const Matrix A = X * X.transpose() + Matrix::Identity(n, n);
  const Vector b = random(n, 1);
  const SparseMatrix As = A.sparseView();
  const PcgResult r = pcg(As, b, identity_preconditioner(), 1e-12, 10 * n);
  const double res = (A * r.x - b).norm() / b.norm();
  report("pcg", r.report.converged && res <= 1e-8, "relative_residual=" + fmt(res));

  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized multiscale finite element solver and study runner"};
  app.require_subcommand(1);
  Options o;
  o.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--config", o.config, "JSON run configuration");
  app.add_option("--out", o.out, "Output directory (created if missing)");
  app.add_option("--workers", o.workers, "Worker threads for parallel kernels")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "Seed for the randomized self-test");

  struct Command {
    const char* name;
    const char* help;
    std::function<int(const Options&)> run;
  };
  const std::vector<Command> commands = {
      {"mesh-info", "Coarse and fine mesh summary", mesh_info},
      {"gen-field", "Write the coefficient field (and affine terms)", gen_field},
      {"snapshots", "Snapshot counts per coarse node", snapshots},
      {"offline", "Offline eigenvalues and space sizes", offline},
      {"online", "Online eigenvalues and space sizes", online},
      {"solve", "Coarse solve against the fine reference", solve},
      {"study-convergence", "Error along the enrichment ladder", study_convergence},
      {"study-precond", "Two-level PCG across contrasts", study_precond},
      {"study-eigendecay", "Eigenvalue decay of local form pairs", study_eigendecay},
      {"study-nonlinear", "Picard iteration at several coarse sizes", study_nonlinear},
      {"self-test", "Randomized pencil, POU and PCG checks", self_test}};
  app.fallthrough();
  for (const auto& c : commands) app.add_subcommand(c.name, c.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_workers(o.workers);
    fs::create_directories(o.out);
    for (const auto& c : commands) {
      if (app.got_subcommand(c.name)) return c.run(o);
    }
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 3;
  }
}
