#include <cmath>
#include <filesystem>

#include <doctest.h>

#include "pinncal/calibration.hpp"
#include "pinncal/checkpoint.hpp"
#include "pinncal/errors.hpp"
#include "pinncal/io.hpp"
#include "pinncal/report.hpp"
#include "pinncal/study.hpp"

using namespace pinncal;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_rod() {
  ExperimentConfig cfg;
  cfg.name = "rod-small";
  cfg.n_data = cfg.n_collocation = 32;
  cfg.n_validation = 64;
  cfg.stop.max_iters = 400;
  cfg.E_est_factor = 2.0;
  return cfg;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("pinncal_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("a short rod calibration recovers E and persists its artifacts") {
  const auto cfg = small_rod();
  const auto data = prepare_case(cfg);
  int rows = 0;
  auto out = run_calibration(cfg, data, 0, [&](const HistoryRow&) { ++rows; });
  CHECK(std::abs(out.result.re_E) < 1.0);
  CHECK(std::isnan(out.result.nu));
  CHECK(out.result.rl2.size() == 1u);
  CHECK(rows == out.result.iterations + 1);
  CHECK(out.result.estimates[0] == 420000.0);

  const auto dir = scratch("run");
  write_run(dir, "r", out);
  CHECK(fs::exists(dir / "r_history.csv"));
  const auto back = calibration_result_from_json(nlohmann::json::parse(read_text(dir / "r.json")));
  CHECK(back.E == out.result.E);
  CHECK(back.config_hash == config_hash(cfg));
  CHECK(std::isnan(back.nu));

  const auto ckpt = load_checkpoint(dir / "r_checkpoint.json");
  CHECK(ckpt.correction_factors == out.checkpoint.correction_factors);
  CHECK(ckpt.nets[0].net.parameters() == out.checkpoint.nets[0].net.parameters());

  auto j = nlohmann::json::parse(read_text(dir / "r.json"));
  j["schema_version"] = 99;
  CHECK_THROWS_AS(calibration_result_from_json(j), DataError);
  fs::remove_all(dir);
}

TEST_CASE("the same seed gives a bit-identical run") {
  auto cfg = small_rod();
  cfg.stop.max_iters = 60;
  cfg.noise_sigma = 1e-4;
  const auto data = prepare_case(cfg);
  const auto a = run_calibration(cfg, data, 4), b = run_calibration(cfg, data, 4), c = run_calibration(cfg, data, 5);
  CHECK(a.result.E == b.result.E);
  CHECK(a.result.final_loss.total == b.result.final_loss.total);
  CHECK(a.result.E != c.result.E);
}

TEST_CASE("studies record per-run results and reports merge them") {
  auto cfg = small_rod();
  cfg.stop.max_iters = 40;
  cfg.study.kind = StudyKind::kEstimateSensitivity;
  cfg.study.E_factors = {0.5, 2.0};
  cfg.study.repeats = 2;
  const auto dir = scratch("study");
  StudyOptions opts;
  opts.output_dir = dir;
  const auto rep = run_study(cfg, opts);
  REQUIRE(rep.cells.size() == 2u);
  CHECK(rep.cells[0].runs == 2);
  CHECK(rep.cells[0].failures == 0);
  CHECK(rep.runs[1][1].seed == 1u);
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "runs" / "E2" / "seed_1.json"));

  const auto summary = write_report(dir, dir / "report", false);
  CHECK(summary.runs == 4);
  CHECK(summary.cells == 2);
  const auto cells = read_text(dir / "report" / "cells.csv");
  CHECK(cells.find("E0.5,0.5,") != std::string::npos);
  CHECK(fs::exists(dir / "report" / "loss_history.csv"));

  // A result from another config is refused unless forced.
  auto other = small_rod();
  other.weights.data = 1e3;
  other.stop.max_iters = 5;
  auto out = run_calibration(other, prepare_case(other), 0);
  write_run(dir / "extra", "x", out);
  CHECK_THROWS_AS(write_report(dir, dir / "report2", false), DataError);
  CHECK(write_report(dir, dir / "report2", true).runs == 5);

  write_text_atomic(dir / "broken.json", "{not json");
  CHECK(write_report(dir, dir / "report3", true).problems.size() == 1u);

  const auto empty = scratch("empty");
  fs::create_directories(empty);
  CHECK_THROWS_AS(write_report(empty, empty / "r", false), DataError);
  fs::remove_all(dir);
  fs::remove_all(empty);
}

TEST_CASE("standard mode starts from raw parameters") {
  auto cfg = small_rod();
  cfg.mode = CalibrationMode::kStandard;
  cfg.weights = {1.0, 1.0, 1.0};
  cfg.stop.max_iters = 20;
  const auto out = run_calibration(cfg, prepare_case(cfg), 0);
  CHECK(out.result.estimates[0] == 1.0);
}
