#include <filesystem>

#include <doctest.h>

#include "pinncal/config.hpp"
#include "pinncal/errors.hpp"
#include "pinncal/study.hpp"

using namespace pinncal;
using nlohmann::json;

namespace {

const std::filesystem::path kConfigs = std::filesystem::path(PINNCAL_SOURCE_DIR) / "configs";

json base() {
  return json::parse(R"({
    "name": "t", "case": "plate",
    "material": {"E_true": 210000, "nu_true": 0.3},
    "study": {"kind": "estimate_sensitivity", "E_factors": [0.5, 1], "nu_factors": [1, 1.2, 1.4]},
    "profiles": {"smoke": {"points": {"n_data": 100, "n_collocation": 100}, "study": {"repeats": 7}}}
  })");
}

}  // namespace

TEST_CASE("every shipped config parses under both profiles") {
  int n = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path(), Profile::kPaper));
    CHECK_NOTHROW(load_config(entry.path(), Profile::kSmoke));
    ++n;
  }
  CHECK(n >= 4);
  const auto plate = load_config(kConfigs / "plate-clean.json");
  CHECK(plate.hidden == std::vector<int>{16, 16});
  CHECK(plate.n_data == 4096);
  CHECK(plate.weights.data == 1e5);
  CHECK(load_config(kConfigs / "plate-noise.json").weights.data == 1e3);
  CHECK(load_config(kConfigs / "rod-csv.json").weights.data == 1e4);
}

TEST_CASE("unknown keys and bad values are rejected with their path") {
  auto j = base();
  j["points"] = {{"n_dta", 5}};
  try {
    config_from_json(j);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("points.n_dta") != std::string::npos);
  }
  j = base();
  j["material"]["nu_true"] = 0.5;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = base();
  j["points"] = {{"n_data", "many"}};
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = base();
  j["case"] = "beam";
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("profiles patch the base config") {
  const auto paper = config_from_json(base(), Profile::kPaper);
  const auto smoke = config_from_json(base(), Profile::kSmoke);
  CHECK(paper.n_data == 4096);
  CHECK(smoke.n_data == 100);
  CHECK(paper.study.repeats == 10);
  CHECK(smoke.study.repeats == 3);
}

TEST_CASE("config hash ignores the seed but not the physics") {
  auto a = config_from_json(base());
  auto b = a;
  b.seed = 99;
  b.output_dir = "elsewhere";
  CHECK(config_hash(a) == config_hash(b));
  b.weights.data = 1e3;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_from_json(to_json(a)).n_data == a.n_data);
  CHECK(config_hash(config_from_json(to_json(a))) == config_hash(a));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("study grids expand into labelled cells") {
  const auto cfg = config_from_json(base());
  const auto cells = study_cells(cfg);
  REQUIRE(cells.size() == 6u);
  CHECK(cells[0].label == "E0.5_nu1");
  CHECK(cells[5].config.E_est_factor == 1.0);
  CHECK(cells[5].config.nu_est_factor == 1.4);

  auto j = base();
  j["study"] = {{"kind", "collocation_convergence"}, {"collocation_counts", {512, 2048}}};
  const auto col = study_cells(config_from_json(j));
  REQUIRE(col.size() == 2u);
  CHECK(col[1].config.n_collocation == 2048);
  CHECK(col[1].config.collocation_mode == datagen::CollocationMode::kIndependent);
  j["case"] = "rod_analytical";
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
}
