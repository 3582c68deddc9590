// pinncal: data generation, calibration, studies and reports.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pinncal/calibration.hpp"
#include "pinncal/config.hpp"
#include "pinncal/datagen/csv_io.hpp"
#include "pinncal/datagen/sampling.hpp"
#include "pinncal/errors.hpp"
#include "pinncal/io.hpp"
#include "pinncal/report.hpp"
#include "pinncal/study.hpp"

namespace fs = std::filesystem;
using namespace pinncal;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string profile = "paper";
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Run seed (overrides the config)");
  cmd->add_option("--out", c.out, "Output directory (overrides the config)");
  cmd->add_option("--profile", c.profile, "smoke or paper")->check(CLI::IsMember({"smoke", "paper"}));
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = load_config(c.config, profile_from_string(c.profile));
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

std::string fmt(double v, const char* f = "%.6g") {
  if (std::isnan(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string matrix_csv(const char* header, const Eigen::MatrixXd& points, const Eigen::MatrixXd& values) {
  std::string s = std::string(header) + "\n";
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    for (Eigen::Index r = 0; r < points.rows(); ++r) s += format_double(points(r, i)) + ",";
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
      s += format_double(values(r, i));
      s += r + 1 < values.rows() ? "," : "\n";
    }
  }
  return s;
}

int cmd_generate(const Common& c) {
  const ExperimentConfig cfg = load(c);
  const CaseData data = prepare_case(cfg);
  const RunData run = build_run_data(cfg, data, cfg.seed);
  const fs::path out = cfg.output_dir;
  if (cfg.dim() == 1) {
    datagen::Rod1DData rod;
    rod.x = run.set.data_points.row(0).transpose();
    rod.u = run.set.data_values.row(0).transpose();
    rod.traction = data.rod.traction;
    rod.length = data.rod.length;
    rod.width = std::sqrt(data.rod.area);
    write_text_atomic(out / "training.csv", datagen::format_1d_csv(rod));
    write_text_atomic(out / "validation.csv", matrix_csv("x_mm,u_mm", run.validation_points, run.validation_values));
  } else {
    write_text_atomic(out / "fem_nodes.csv", datagen::fem_nodes_csv(*data.fem, data.fem->displacements));
    write_text_atomic(out / "fem_metadata.json", datagen::fem_metadata(*data.fem, data.plate).dump(2) + "\n");
    write_text_atomic(out / "training.csv",
                      matrix_csv("x_mm,y_mm,ux_mm,uy_mm", run.set.data_points, run.set.data_values));
    write_text_atomic(out / "validation.csv",
                      matrix_csv("x_mm,y_mm,ux_mm,uy_mm", run.validation_points, run.validation_values));
    std::cout << "FE mesh: " << data.fem->mesh.num_nodes() << " nodes, max strain "
              << fmt(100.0 * data.fem->max_strain, "%.4f") << " %\n";
  }
  std::cout << "wrote data for seed " << cfg.seed << " to " << out.string() << "\n";
  return 0;
}

int cmd_calibrate(const Common& c, bool quiet) {
  const ExperimentConfig cfg = load(c);
  const CaseData data = prepare_case(cfg);
  int last_print = -1;
  RunOutcome outcome = run_calibration(cfg, data, cfg.seed, [&](const HistoryRow& row) {
    if (quiet || row.iter - last_print < 500) return;
    last_print = row.iter;
    std::cout << "iter " << row.iter << "  loss " << fmt(row.loss.total, "%.4e") << "\n" << std::flush;
  });
  const std::string stem = cfg.name + "_seed" + std::to_string(cfg.seed);
  write_run(cfg.output_dir, stem, outcome);
  const auto& r = outcome.result;
  std::cout << "E  = " << fmt(r.E, "%.2f") << " N/mm^2 (RE " << fmt(r.re_E, "%.4g") << " %)\n";
  if (!std::isnan(r.nu)) {
    std::cout << "nu = " << fmt(r.nu, "%.5f") << " (RE " << fmt(r.re_nu, "%.4g") << " %)\n";
    std::cout << "K  = " << fmt(r.K, "%.2f") << ", G = " << fmt(r.G, "%.2f") << "\n";
  }
  std::cout << "rL2:";
  for (double v : r.rl2) std::cout << " " << fmt(v, "%.3e");
  std::cout << "\n" << r.iterations << " iterations (" << r.status << "), " << fmt(r.wall_time_s, "%.1f") << " s\n";
  std::cout << "result: " << (cfg.output_dir / (stem + ".json")).string() << "\n";
  return 0;
}

int cmd_sweep(const Common& c, const std::string& study, int jobs) {
  ExperimentConfig cfg = load(c);
  if (!study.empty()) cfg.study.kind = study_kind_from_string(study);
  if (!cfg.study.kind) throw ConfigError("no study selected: set study.kind in the config or pass --study");
  if (jobs > 0) cfg.jobs = jobs;
  cfg.validate();
  StudyOptions opts;
  opts.output_dir = cfg.output_dir;
  opts.jobs = cfg.jobs;
  opts.log = [](const std::string& m) { std::cout << m << "\n" << std::flush; };
  const StudyReport rep = run_study(cfg, opts);
  std::cout << "\ncell                 runs  fail   MARE_E %   MARE_nu %\n";
  for (const auto& cell : rep.cells) {
    std::printf("%-20s %4d  %4d  %9s  %10s\n", cell.label.c_str(), cell.runs, cell.failures,
                cell.E.n ? fmt(cell.E.mare, "%.4g").c_str() : "-", cell.nu.n ? fmt(cell.nu.mare, "%.4g").c_str() : "-");
  }
  std::cout << "summary: " << (cfg.output_dir / "summary.csv").string() << "\n";
  return 0;
}

int cmd_report(const std::string& results, const std::string& out, bool force) {
  const fs::path out_dir = out.empty() ? fs::path(results) / "report" : fs::path(out);
  const ReportSummary s = write_report(results, out_dir, force);
  std::cout << s.runs << " runs in " << s.cells << " cells\n";
  for (const auto& f : s.files) std::cout << "wrote " << f.string() << "\n";
  for (const auto& p : s.problems) std::cerr << "skipped: " << p << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibrate linear-elastic material parameters from displacement data with physics-informed networks"};
  app.require_subcommand(1);

  Common gen, cal, sw;
  auto* g = app.add_subcommand("generate", "Write synthetic training and validation data");
  add_common(g, gen);

  bool quiet = false;
  auto* c = app.add_subcommand("calibrate", "Run one calibration and store its result");
  add_common(c, cal);
  c->add_flag("-q,--quiet", quiet, "Do not print loss progress");

  std::string study;
  int jobs = 0;
  auto* s = app.add_subcommand("sweep", "Run a study over a grid of cells with repeated seeds");
  add_common(s, sw);
  s->add_option("--study", study, "estimate_sensitivity, collocation_convergence or noise_sensitivity");
  s->add_option("--jobs", jobs, "Concurrent runs")->check(CLI::PositiveNumber);

  std::string results, report_out;
  bool force = false;
  auto* r = app.add_subcommand("report", "Merge run results into plot-ready tables");
  r->add_option("results", results, "Results directory")->required();
  r->add_option("--out", report_out, "Report directory (default: <results>/report)");
  r->add_flag("--force", force, "Merge results of different configs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (g->parsed()) return cmd_generate(gen);
    if (c->parsed()) return cmd_calibrate(cal, quiet);
    if (s->parsed()) return cmd_sweep(sw, study, jobs);
    if (r->parsed()) return cmd_report(results, report_out, force);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
