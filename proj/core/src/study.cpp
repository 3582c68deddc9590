#include "pinncal/study.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "pinncal/errors.hpp"
#include "pinncal/io.hpp"

namespace pinncal {

using nlohmann::json;

namespace {

std::string fixed(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

std::vector<StudyCell> study_cells(const ExperimentConfig& cfg) {
  if (!cfg.study.kind) throw ConfigError("config has no study.kind");
  std::vector<StudyCell> cells;
  switch (*cfg.study.kind) {
    case StudyKind::kEstimateSensitivity: {
      const std::vector<double> nu_factors = cfg.dim() == 2 ? cfg.study.nu_factors : std::vector<double>{1.0};
      for (double fe : cfg.study.E_factors) {
        for (double fn : nu_factors) {
          StudyCell c;
          c.config = cfg;
          c.config.E_est_factor = fe;
          c.config.nu_est_factor = fn;
          c.label = "E" + fixed(fe, "%.4g");
          c.coords = {{"E_factor", fe}};
          if (cfg.dim() == 2) {
            c.label += "_nu" + fixed(fn, "%.4g");
            c.coords["nu_factor"] = fn;
          }
          cells.push_back(std::move(c));
        }
      }
      break;
    }
    case StudyKind::kCollocationConvergence:
      for (int n : cfg.study.collocation_counts) {
        StudyCell c;
        c.config = cfg;
        c.config.n_collocation = n;
        c.config.collocation_mode = datagen::CollocationMode::kIndependent;
        c.label = "ncol" + std::to_string(n);
        c.coords = {{"n_collocation", n}};
        cells.push_back(std::move(c));
      }
      break;
    case StudyKind::kNoiseSensitivity:
      for (double s : cfg.study.noise_levels) {
        StudyCell c;
        c.config = cfg;
        c.config.noise_sigma = s;
        c.label = "sigma" + fixed(s, "%.3g");
        c.coords = {{"noise_sigma", s}};
        cells.push_back(std::move(c));
      }
      break;
  }
  for (auto& c : cells) c.config.validate();
  return cells;
}

CellSummary summarize_cell(const std::string& label, const json& coords, const std::vector<CalibrationResult>& results,
                           int failures) {
  CellSummary s;
  s.label = label;
  s.coords = coords;
  s.runs = static_cast<int>(results.size()) + failures;
  s.failures = failures;
  std::vector<double> re_E, re_nu;
  double wall = 0.0;
  for (const auto& r : results) {
    re_E.push_back(r.re_E);
    if (!std::isnan(r.re_nu)) re_nu.push_back(r.re_nu);
    if (s.mean_rl2.size() < r.rl2.size()) s.mean_rl2.resize(r.rl2.size(), 0.0);
    for (size_t c = 0; c < r.rl2.size(); ++c) s.mean_rl2[c] += r.rl2[c];
    wall += r.wall_time_s;
  }
  s.E = metrics::summarize(re_E);
  s.nu = metrics::summarize(re_nu);
  if (!results.empty()) {
    for (double& v : s.mean_rl2) v /= static_cast<double>(results.size());
    s.mean_wall_time_s = wall / static_cast<double>(results.size());
  }
  return s;
}

StudyReport run_study(const ExperimentConfig& cfg, const StudyOptions& options) {
  const auto cells = study_cells(cfg);
  const int repeats = cfg.study.repeats;
  const CaseData data = prepare_case(cfg);
  auto log = [&](const std::string& msg) {
    if (options.log) options.log(msg);
  };

  StudyReport report;
  report.study = to_string(*cfg.study.kind);
  report.config_name = cfg.name;
  report.config_hash = config_hash(cfg);
  report.runs.assign(cells.size(), std::vector<RunRecord>(static_cast<size_t>(repeats)));

  const int total = static_cast<int>(cells.size()) * repeats;
  std::atomic<int> next{0};
  std::mutex log_mutex;
  auto worker = [&]() {
    for (int task = next++; task < total; task = next++) {
      const auto ci = static_cast<size_t>(task / repeats);
      const int rep = task % repeats;
      const StudyCell& cell = cells[ci];
      RunRecord& rec = report.runs[ci][static_cast<size_t>(rep)];
      rec.seed = cfg.seed + static_cast<std::uint64_t>(rep);
      try {
        RunOutcome out = run_calibration(cell.config, data, rec.seed);
        out.result.config_hash = report.config_hash;
        out.result.cell = cell.coords;
        out.result.cell["label"] = cell.label;
        if (options.output_dir) {
          write_run(*options.output_dir / "runs" / cell.label, "seed_" + std::to_string(rec.seed), out);
        }
        rec.result = std::move(out.result);
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
      std::lock_guard<std::mutex> lock(log_mutex);
      if (rec.result) {
        const auto& r = *rec.result;
        std::string msg = cell.label + " seed " + std::to_string(rec.seed) + ": RE_E " + fixed(r.re_E, "%.4g") + "%";
        if (!std::isnan(r.re_nu)) msg += ", RE_nu " + fixed(r.re_nu, "%.4g") + "%";
        msg += " (" + r.status + ", " + fixed(r.wall_time_s, "%.1f") + " s)";
        log(msg);
      } else {
        log(cell.label + " seed " + std::to_string(rec.seed) + " failed: " + rec.error);
      }
    }
  };
  const int jobs = std::max(1, std::min(options.jobs, total));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (size_t ci = 0; ci < cells.size(); ++ci) {
    std::vector<CalibrationResult> ok;
    int failures = 0;
    for (const auto& rec : report.runs[ci]) {
      if (rec.result) {
        ok.push_back(*rec.result);
      } else {
        ++failures;
      }
    }
    report.cells.push_back(summarize_cell(cells[ci].label, cells[ci].coords, ok, failures));
  }

  if (options.output_dir) {
    write_text_atomic(*options.output_dir / "summary.csv", study_csv(report.cells));
    write_text_atomic(*options.output_dir / "summary.json", to_json(report).dump(2) + "\n");
  }
  return report;
}

std::string study_csv(const std::vector<CellSummary>& cells) {
  std::ostringstream out;
  out << "cell,E_factor,nu_factor,n_collocation,noise_sigma,runs,failures,"
         "mean_RE_E,MARE_E,SEM_E,max_ARE_E,mean_RE_nu,MARE_nu,SEM_nu,max_ARE_nu,rL2_x,rL2_y,mean_wall_time_s\n";
  auto coord = [](const json& c, const char* key) {
    return c.contains(key) ? format_double(c.at(key).get<double>()) : std::string();
  };
  auto stats = [](const metrics::GroupStats& g) {
    if (g.n == 0) return std::string(",,,");
    return format_double(g.mean_re) + "," + format_double(g.mare) + "," + format_double(g.sem) + "," +
           format_double(g.max_are);
  };
  for (const auto& c : cells) {
    out << c.label << ',' << coord(c.coords, "E_factor") << ',' << coord(c.coords, "nu_factor") << ','
        << coord(c.coords, "n_collocation") << ',' << coord(c.coords, "noise_sigma") << ',' << c.runs << ','
        << c.failures << ',' << stats(c.E) << ',' << stats(c.nu) << ',';
    out << (c.mean_rl2.size() > 0 ? format_double(c.mean_rl2[0]) : "") << ','
        << (c.mean_rl2.size() > 1 ? format_double(c.mean_rl2[1]) : "") << ',' << format_double(c.mean_wall_time_s)
        << '\n';
  }
  return out.str();
}

json to_json(const CellSummary& c) {
  auto stats = [](const metrics::GroupStats& g) -> json {
    if (g.n == 0) return nullptr;
    return {{"n", g.n}, {"mean_RE", g.mean_re}, {"MARE", g.mare}, {"SEM", g.sem}, {"max_ARE", g.max_are}};
  };
  return {{"label", c.label},     {"coords", c.coords},     {"runs", c.runs},
          {"failures", c.failures}, {"E", stats(c.E)},      {"nu", stats(c.nu)},
          {"mean_rL2", c.mean_rl2}, {"mean_wall_time_s", c.mean_wall_time_s}};
}

json to_json(const StudyReport& r) {
  json cells = json::array();
  for (size_t i = 0; i < r.cells.size(); ++i) {
    json c = to_json(r.cells[i]);
    json runs = json::array();
    for (const auto& rec : r.runs[i]) {
      json j = {{"seed", rec.seed}};
      if (rec.result) {
        j["RE_E"] = rec.result->re_E;
        if (!std::isnan(rec.result->re_nu)) j["RE_nu"] = rec.result->re_nu;
        j["status"] = rec.result->status;
      } else {
        j["error"] = rec.error;
      }
      runs.push_back(std::move(j));
    }
    c["run_records"] = std::move(runs);
    cells.push_back(std::move(c));
  }
  return {{"schema_version", kResultSchemaVersion},
          {"study", r.study},
          {"config_name", r.config_name},
          {"config_hash", r.config_hash},
          {"cells", cells}};
}

}  // namespace pinncal
