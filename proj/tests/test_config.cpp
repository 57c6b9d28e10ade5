#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "gmsfem/config.hpp"
#include "gmsfem/error.hpp"

using namespace gmsfem;

TEST(Config, DefaultsFromEmptyObject) {
  const RunConfig c = parse_config("{}");
  EXPECT_EQ(c.mesh.nx, 100);
  EXPECT_EQ(c.mesh.Nx, 10);
  EXPECT_EQ(c.field.preset, "channels_inclusions");
  EXPECT_EQ(c.pou, PouKind::multiscale);
  EXPECT_EQ(c.selection.online.rule, Selection::Rule::unbounded_plus);
  EXPECT_EQ(c.selection.ladder, (std::vector<int>{0, 1, 2, 3, 4}));
  EXPECT_EQ(c.solver.tol, 1e-10);
  EXPECT_EQ(c.study.nonlinear.max_it, 20);
}

TEST(Config, ReadsNestedKeys) {
  const RunConfig c = parse_config(R"({
    "mesh": {"nx": 40, "ny": 20, "Nx": 4, "Ny": 2},
    "field": {"source": "anisotropic_pair", "eta": 1e4},
    "parameters": {"samples": [[0], [1]], "online": [0.5], "offline_mode": "union", "pou_stage": "offline"},
    "selection": {"online": {"rule": "count", "count": 3}, "ladder": [0, 2]},
    "coupling": {"kind": "dg", "penalty": 4},
    "solver": {"kind": "pcg", "overlap": 2},
    "bc": "zero",
    "study": {"kind": "nonlinear", "nonlinear": {"hi": 0.5, "freeze": "cell_average"}}
  })");
  EXPECT_EQ(c.mesh.ny, 20);
  EXPECT_EQ(c.field.source, FieldSource::anisotropic_pair);
  EXPECT_EQ(c.params.samples.size(), 2u);
  EXPECT_EQ(c.params.offline_mode, OfflineMode::union_of_samples);
  EXPECT_EQ(c.params.pou_stage, PouStage::offline);
  EXPECT_EQ(c.selection.online.count, 3);
  EXPECT_EQ(c.coupling.kind, CouplingKind::dg);
  EXPECT_EQ(c.solver.overlap, 2);
  EXPECT_EQ(c.bc, BoundaryKind::zero);
  EXPECT_EQ(c.study.nonlinear.freeze, FreezeMode::cell_average);
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config("{"), ConfigError);
  EXPECT_THROW(parse_config(R"({"colour": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"mesh": {"nx": 10, "Nx": 3}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"pou": "spline"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"selection": {"ladder": [0, 2, 2]}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"selection": {"ladder": []}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"field": {"eta": 0.5}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"field": {"source": "file", "path": "missing.txt"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"mesh": {"nx": "ten"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"parameters": {"samples": [[0], [1]], "weights": [1]}})"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, HashIsCanonical) {
  const RunConfig a = parse_config(R"({"mesh": {"nx": 40, "Nx": 4}, "bc": "zero"})");
  const RunConfig b = parse_config(R"({"bc": "zero", "mesh": {"Nx": 4, "nx": 40, "ny": 100}})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  EXPECT_NE(config_hash(a), config_hash(parse_config(R"({"mesh": {"nx": 40, "Nx": 4}})")));
  // The canonical form parses back to the same configuration.
  EXPECT_EQ(config_hash(parse_config(canonical_json(a))), config_hash(a));
}

TEST(Config, RelativeFieldPathResolvesAgainstConfigDir) {
  const auto dir = std::filesystem::temp_directory_path() / "gmsfem_cfg_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "k.txt") << "1 1 scalar\n3\n";
  std::ofstream(dir / "run.json") << R"({"mesh": {"nx": 1, "ny": 1, "Nx": 1, "Ny": 1}, "field": {"source": "file", "path": "k.txt"}})";
  const RunConfig c = load_config((dir / "run.json").string());
  EXPECT_TRUE(std::filesystem::exists(c.field.path));
  std::filesystem::remove_all(dir);
}

TEST(Config, ShippedConfigsParse) {
  for (const auto& e : std::filesystem::directory_iterator(GMSFEM_CONFIG_DIR)) {
    if (e.path().extension() == ".json") {
      EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
    }
  }
}
