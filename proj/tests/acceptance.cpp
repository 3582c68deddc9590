// Acceptance checks: one PASS/FAIL line per criterion.
//
// Criteria 1-3 calibrate the rod, 4-7 the plate with a hole, 8 re-runs the
// numerical oracles. The plate criteria are expensive; --only selects a
// subset and --max-iters-2d / --max-seconds-2d override the per-run budget
// of the shipped plate configs. The exit code is non-zero only for harness
// errors, or for failed criteria under --strict.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pinncal/calibration.hpp"
#include "pinncal/config.hpp"
#include "pinncal/datagen/fem.hpp"
#include "pinncal/datagen/sampling.hpp"
#include "pinncal/io.hpp"
#include "pinncal/loss.hpp"
#include "pinncal/mechanics.hpp"
#include "pinncal/metrics.hpp"
#include "pinncal/optimizer.hpp"
#include "pinncal/study.hpp"

namespace fs = std::filesystem;
using namespace pinncal;

namespace {

struct Options {
  fs::path out = "acceptance";
  fs::path configs = fs::path(PINNCAL_SOURCE_DIR) / "configs";
  std::set<int> only;
  std::optional<int> max_iters_2d;
  std::optional<double> max_seconds_2d;
  bool strict = false;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

void log(const std::string& msg) { std::cerr << msg << std::endl; }

/// Runs (and remembers) calibrations keyed by config hash, cell and seed, so
/// criteria sharing a cell reuse its runs.
class Runner {
 public:
  explicit Runner(fs::path out) : out_(std::move(out)) {}

  CalibrationResult run(const ExperimentConfig& cfg, const std::string& group, const std::string& cell,
                        std::uint64_t seed) {
    const std::string key = config_hash(cfg) + "/" + std::to_string(seed);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    if (auto prior = stored(cfg, group, cell, seed)) {
      log("  " + group + "/" + cell + " seed " + std::to_string(seed) + ": reused stored result");
      cache_[key] = *prior;
      return *prior;
    }
    const CaseData& data = case_data(cfg);
    RunOutcome outcome = run_calibration(cfg, data, seed);
    outcome.result.cell = {{"label", cell}};
    write_run(out_ / group / cell, "seed_" + std::to_string(seed), outcome);
    const auto& r = outcome.result;
    std::string msg = "  " + group + "/" + cell + " seed " + std::to_string(seed) + ": RE_E " + fmt("%.4g", r.re_E);
    if (!std::isnan(r.re_nu)) msg += ", RE_nu " + fmt("%.4g", r.re_nu);
    msg += ", rL2";
    for (double v : r.rl2) msg += " " + fmt("%.2e", v);
    msg += " (" + r.status + ", " + fmt("%.1f", r.wall_time_s) + " s)";
    log(msg);
    cache_[key] = outcome.result;
    return outcome.result;
  }

  std::vector<CalibrationResult> repeats(const ExperimentConfig& cfg, const std::string& group,
                                         const std::string& cell, int n) {
    std::vector<CalibrationResult> out;
    for (int s = 0; s < n; ++s) out.push_back(run(cfg, group, cell, cfg.seed + static_cast<std::uint64_t>(s)));
    return out;
  }

 private:
  // A result left by an interrupted run of the same config is reused.
  std::optional<CalibrationResult> stored(const ExperimentConfig& cfg, const std::string& group,
                                          const std::string& cell, std::uint64_t seed) const {
    const fs::path file = out_ / group / cell / ("seed_" + std::to_string(seed) + ".json");
    if (!fs::exists(file)) return std::nullopt;
    try {
      std::ifstream in(file);
      CalibrationResult r = calibration_result_from_json(nlohmann::json::parse(in));
      if (r.config_hash == config_hash(cfg) && r.seed == seed) return r;
    } catch (const std::exception&) {
    }
    return std::nullopt;
  }

  const CaseData& case_data(const ExperimentConfig& cfg) {
    // The FE field depends on the plate geometry and material only.
    const std::string key = to_string(cfg.case_kind) + to_json(cfg).at("plate").dump() +
                            std::to_string(cfg.E_true) + std::to_string(cfg.nu_true) + cfg.csv_path.string();
    auto it = data_.find(key);
    if (it == data_.end()) it = data_.emplace(key, prepare_case(cfg)).first;
    return it->second;
  }

  fs::path out_;
  std::map<std::string, CalibrationResult> cache_;
  std::map<std::string, CaseData> data_;
};

struct CellStats {
  metrics::GroupStats E, nu;
  double max_rl2 = 0.0;
  double max_time = 0.0;
};

CellStats stats(const std::vector<CalibrationResult>& runs) {
  std::vector<double> e, n;
  CellStats s;
  for (const auto& r : runs) {
    e.push_back(r.re_E);
    if (!std::isnan(r.re_nu)) n.push_back(r.re_nu);
    for (double v : r.rl2) s.max_rl2 = std::max(s.max_rl2, v);
    s.max_time = std::max(s.max_time, r.wall_time_s);
  }
  s.E = metrics::summarize(e);
  s.nu = metrics::summarize(n);
  return s;
}

class Acceptance {
 public:
  explicit Acceptance(Options o) : opt_(std::move(o)), runner_(opt_.out) {}

  ExperimentConfig config(const std::string& name, bool plate) const {
    ExperimentConfig cfg = load_config(opt_.configs / (name + ".json"), Profile::kPaper);
    cfg.study.kind.reset();
    if (plate) {
      if (opt_.max_iters_2d) cfg.stop.max_iters = *opt_.max_iters_2d;
      if (opt_.max_seconds_2d) cfg.stop.max_seconds = *opt_.max_seconds_2d;
    }
    return cfg;
  }

  // 1: exact estimate on the analytical rod.
  Verdict c1() {
    auto cfg = config("rod-analytical", false);
    cfg.E_est_factor = 1.0;
    const auto r = runner_.run(cfg, "c1", "E1", cfg.seed);
    const bool ok = std::abs(r.re_E) <= 0.1 && r.rl2[0] <= 1e-4 && r.wall_time_s <= 120.0;
    return {ok, "RE_E = " + fmt("%.3e", r.re_E) + " % (<= 0.1), rL2 = " + fmt("%.2e", r.rl2[0]) +
                    " (<= 1e-4), " + fmt("%.1f", r.wall_time_s) + " s (<= 120)"};
  }

  // 2: the standard formulation fails on the same rod.
  Verdict c2() {
    const auto cfg = config("rod-standard", false);
    const auto r = runner_.run(cfg, "c2", "standard", cfg.seed);
    return {std::abs(r.re_E) >= 50.0,
            "E = " + fmt("%.2f", r.E) + ", RE_E = " + fmt("%.2f", r.re_E) + " % (|RE| >= 50 expected)"};
  }

  // 3: rod estimate sensitivity, 10 seeds per estimate.
  Verdict c3() {
    Verdict v{true, ""};
    for (double f : {0.1, 1.0, 10.0}) {
      auto cfg = config("rod-analytical", false);
      cfg.E_est_factor = f;
      const auto s = stats(runner_.repeats(cfg, "c3", "E" + fmt("%g", f), 10));
      v.pass = v.pass && s.E.mare <= 1.0;
      v.detail += (v.detail.empty() ? "" : ", ") + std::string("MARE_E(") + fmt("%g", 100 * f) +
                  "%) = " + fmt("%.2e", s.E.mare);
    }
    v.detail += " (each <= 1 %)";
    return v;
  }

  ExperimentConfig plate_cell(double fE, double fnu) const {
    auto cfg = config("plate-clean", true);
    cfg.E_est_factor = fE;
    cfg.nu_est_factor = fnu;
    return cfg;
  }

  static std::string cell_label(double fE, double fnu) { return "E" + fmt("%.4g", fE) + "_nu" + fmt("%.4g", fnu); }

  // 4: clean plate, exact estimates, 10 seeds.
  Verdict c4() {
    const auto cfg = plate_cell(1.0, 1.0);
    const auto s = stats(runner_.repeats(cfg, "plate", cell_label(1.0, 1.0), 10));
    const bool ok = s.E.mare <= 2.0 && s.nu.mare <= 0.5 && s.max_rl2 <= 1e-3 && s.max_time <= 1800.0;
    return {ok, "MARE_E = " + fmt("%.3g", s.E.mare) + " % (<= 2), MARE_nu = " + fmt("%.3g", s.nu.mare) +
                    " % (<= 0.5), max rL2 = " + fmt("%.2e", s.max_rl2) + " (<= 1e-3), max run " +
                    fmt("%.0f", s.max_time) + " s (<= 1800)"};
  }

  // 5: 3 x 3 estimate grid, 5 seeds per cell.
  Verdict c5() {
    const double factors[] = {0.6667, 1.0, 1.3333};
    int e_ok = 0, nu_ok = 0;
    double worst_nu = 0.0;
    std::string cells;
    for (double fE : factors) {
      for (double fnu : factors) {
        const auto s = stats(runner_.repeats(plate_cell(fE, fnu), "plate", cell_label(fE, fnu), 5));
        e_ok += s.E.mare <= 3.0;
        nu_ok += s.nu.mare <= 1.5;
        worst_nu = std::max(worst_nu, s.nu.mare);
        cells += (cells.empty() ? "" : " ") + fmt("%.2f", s.E.mare) + "/" + fmt("%.2f", s.nu.mare);
        if (s.E.max_are > 10.0) log("  outlier in " + cell_label(fE, fnu) + ": max ARE_E " + fmt("%.2f", s.E.max_are));
      }
    }
    return {nu_ok == 9 && e_ok >= 8, std::to_string(nu_ok) + "/9 cells MARE_nu <= 1.5 % (worst " +
                                         fmt("%.3g", worst_nu) + "), " + std::to_string(e_ok) +
                                         "/9 cells MARE_E <= 3 % (need 8); MARE_E/MARE_nu per cell: " + cells};
  }

  // 6: collocation convergence.
  Verdict c6() {
    std::vector<double> m;
    std::string d;
    for (int n : {512, 2048, 8192}) {
      auto cfg = plate_cell(1.0, 1.0);
      cfg.n_collocation = n;
      cfg.collocation_mode = datagen::CollocationMode::kIndependent;
      const auto s = stats(runner_.repeats(cfg, "c6", "ncol" + std::to_string(n), 5));
      m.push_back(s.E.mare);
      d += (d.empty() ? "" : ", ") + std::string("N_col ") + std::to_string(n) + ": " + fmt("%.3g", s.E.mare);
    }
    return {m[0] > m[1] && m[1] > m[2], "mean |RE_E| % " + d + " (strictly decreasing)"};
  }

  // 7: noise sensitivity with the reduced data weight.
  Verdict c7() {
    std::vector<CellStats> s;
    std::string d;
    for (double sigma : {1e-5, 1e-4, 5e-4}) {
      auto cfg = config("plate-noise", true);
      cfg.noise_sigma = sigma;
      s.push_back(stats(runner_.repeats(cfg, "c7", "sigma" + fmt("%.0e", sigma), 5)));
      d += (d.empty() ? "" : ", ") + std::string("sigma ") + fmt("%.0e", sigma) + ": " + fmt("%.3g", s.back().E.mare) +
           "/" + fmt("%.3g", s.back().nu.mare);
    }
    const bool mid = s[1].E.mare <= 2.0 && s[1].nu.mare <= 10.0;
    const bool high = s[2].nu.mare <= 50.0;
    const bool monotone = s[0].nu.mare <= s[1].nu.mare && s[1].nu.mare < s[2].nu.mare && s[1].E.mare < s[2].E.mare;
    return {mid && high && monotone, "MARE_E/MARE_nu % " + d +
                                         " (at 1e-4: <= 2 / <= 10; at 5e-4: nu <= 50; nu non-decreasing, "
                                         "both grow from 1e-4 to 5e-4)"};
  }

  // 8: numerical oracles.
  Verdict c8() {
    std::vector<std::pair<std::string, bool>> checks;
    checks.push_back(ad_first_order());
    checks.push_back(ad_second_order());
    checks.push_back(fem_patch());
    checks.push_back(round_trip());
    checks.push_back(rod_work());
    checks.push_back(bfgs_quadratic());
    checks.push_back(bfgs_rosenbrock());
    Verdict v{true, ""};
    for (const auto& [what, ok] : checks) {
      v.pass = v.pass && ok;
      v.detail += (v.detail.empty() ? "" : "; ") + what + (ok ? "" : " [violated]");
    }
    return v;
  }

  int run() {
    const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
        {8, [&] { return c8(); }}, {1, [&] { return c1(); }}, {2, [&] { return c2(); }},
        {3, [&] { return c3(); }}, {4, [&] { return c4(); }}, {5, [&] { return c5(); }},
        {6, [&] { return c6(); }}, {7, [&] { return c7(); }},
    };
    std::map<int, Verdict> verdicts;
    for (const auto& [id, fn] : criteria) {
      if (!opt_.only.empty() && !opt_.only.count(id)) continue;
      log("criterion " + std::to_string(id) + " ...");
      const auto t0 = std::chrono::steady_clock::now();
      try {
        verdicts[id] = fn();
      } catch (const std::exception& e) {
        verdicts[id] = {false, std::string("error: ") + e.what()};
      }
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      const auto& v = verdicts[id];
      const std::string line = "criterion " + std::to_string(id) + ": " + (v.pass ? "PASS" : "FAIL") + "  " +
                               v.detail + "  [" + fmt("%.0f", dt.count()) + " s]";
      std::cout << line << std::endl;
      report_ << line << "\n";
    }
    int passed = 0;
    for (const auto& [id, v] : verdicts) passed += v.pass;
    const std::string summary =
        std::to_string(passed) + " of " + std::to_string(verdicts.size()) + " criteria passed";
    std::cout << summary << std::endl;
    report_ << summary << "\n";
    write_text_atomic(opt_.out / "acceptance.txt", report_.str());
    return opt_.strict && passed != static_cast<int>(verdicts.size()) ? 1 : 0;
  }

 private:
  static std::pair<std::string, bool> check(const std::string& what, double value, double limit) {
    return {what + " " + fmt("%.1e", value) + " < " + fmt("%.0e", limit), value < limit};
  }

  std::pair<std::string, bool> ad_first_order() {
    datagen::PlateCase plate;
    plate.mesh.edge_divisions = 20;
    plate.mesh.radial_divisions = 32;
    const auto sol = datagen::fem_solve_plate(plate);
    datagen::PlateSampling ps;
    ps.n_data = ps.n_collocation = 64;
    ps.n_ext = 8;
    ps.n_validation = 16;
    const auto sc = datagen::sample_training_set(sol, sol.displacements, plate, ps);
    std::vector<int> sizes{2, 8, 8, 1};
    std::vector<NormalizedNetwork> nets;
    for (int c = 0; c < 2; ++c) {
      nets.push_back({glorot_normal_init(sizes, 70 + static_cast<std::uint64_t>(c)),
                      NormalizationSpec::from_data(sc.set.data_points, sc.set.data_values.row(c))});
    }
    const auto kg = mech::to_KG({180000.0, 0.27});
    LossConfig lc;
    lc.weights.data = 10.0;
    LossEvaluator ev(nets, {{{"K", "G"}, {kg.K, kg.G}}, true}, sc.set, lc);
    auto x = ev.initial_parameters();
    x[x.size() - 1] = 0.05;
    Eigen::VectorXd g, scratch;
    ev(x, g);
    double worst = 0.0;
    for (size_t k = 0; k < x.size(); ++k) {
      auto at = [&](double d) {
        auto xs = x;
        xs[k] += d;
        return ev(xs, scratch);
      };
      const double h = 1e-4;
      const double fd = (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
      const double an = g[static_cast<Eigen::Index>(k)];
      worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(an)));
    }
    return check("AD gradient vs FD", worst, 1e-6);
  }

  std::pair<std::string, bool> ad_second_order() {
    std::vector<int> sizes{2, 16, 16, 1};
    NormalizedNetwork nn{glorot_normal_init(sizes, 5), {}};
    nn.spec.x_min = Eigen::Vector2d(0.0, 0.0);
    nn.spec.x_max = Eigen::Vector2d(100.0, 100.0);
    nn.spec.u_min = Eigen::VectorXd::Constant(1, -0.05);
    nn.spec.u_max = Eigen::VectorXd::Constant(1, 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(5.0, 95.0);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const std::array<double, 2> x{u(rng), u(rng)};
      const auto d = evaluate(nn, x).derivatives[0];
      const double h = 1e-2;
      for (int i = 0; i < 2; ++i) {
        std::array<double, 2> xp = x, xm = x;
        xp[static_cast<size_t>(i)] += h;
        xm[static_cast<size_t>(i)] -= h;
        const auto dp = evaluate(nn, xp).derivatives[0], dm = evaluate(nn, xm).derivatives[0];
        const double scale = d.second.cwiseAbs().maxCoeff();
        for (int j = 0; j < 2; ++j) {
          const double fd = (dp.first[j] - dm.first[j]) / (2 * h);
          worst = std::max(worst, std::abs(fd - d.second(j, i)) / scale);
        }
      }
    }
    return check("AD Hessian vs FD", worst, 1e-4);
  }

  static std::pair<std::string, bool> fem_patch() {
    const mech::IsotropicElasticEnu mat{210000.0, 0.3};
    const double s = 100.0, a = 40.0, b = 25.0;
    const auto sol = datagen::fem_solve(datagen::uniaxial_rectangle_problem(a, b, 9, 6, mat, s));
    double err = 0.0;
    for (int i = 0; i < sol.mesh.num_nodes(); ++i) {
      const double x = sol.mesh.nodes(0, i), y = sol.mesh.nodes(1, i);
      err = std::max({err, std::abs(sol.displacements(0, i) - s / mat.E * (x - a)),
                      std::abs(sol.displacements(1, i) + mat.nu * s / mat.E * y)});
    }
    return check("FEM patch test", err / (s / mat.E * a), 1e-8);
  }

  static std::pair<std::string, bool> round_trip() {
    double worst = 0.0;
    for (double E : {1000.0, 210000.0, 7e6}) {
      for (double nu : {-0.9, 0.0, 0.3, 0.49}) {
        const auto back = mech::to_Enu(mech::to_KG({E, nu}));
        worst = std::max({worst, std::abs(back.E - E) / E, std::abs(back.nu - nu)});
      }
    }
    return check("(E,nu)<->(K,G) round trip", worst, 1e-12);
  }

  static std::pair<std::string, bool> rod_work() {
    const datagen::RodCase rod{100.0, 100.0, 210000.0, 1.0};
    const auto sc = datagen::rod_training_set(rod, 4096, 16);
    std::vector<int> sizes{1, 1};
    std::vector<NormalizedNetwork> nets{{make_network(sizes), NormalizationSpec::identity(1, 1)}};
    nets[0].net.weights[0](0, 0) = rod.traction / rod.E;
    return check("rod work balance", std::abs(work_loss(nets, mech::ElasticModel::rod(rod.E), sc.set)), 1e-12);
  }

  static std::pair<std::string, bool> bfgs_quadratic() {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd M(5, 5);
    for (int i = 0; i < M.size(); ++i) M.data()[i] = n01(rng);
    const Eigen::MatrixXd A = M * M.transpose() + 5.0 * Eigen::MatrixXd::Identity(5, 5);
    Eigen::VectorXd b(5);
    for (int i = 0; i < 5; ++i) b[i] = n01(rng);
    opt::StopCriteria st;
    st.max_iters = 30;
    st.loss_change_tol = 1e-300;
    const auto r = opt::bfgs_minimize(
        [&](std::span<const double> x, Eigen::VectorXd& g) {
          Eigen::Map<const Eigen::VectorXd> v(x.data(), 5);
          g = A * v - b;
          return 0.5 * v.dot(A * v) - b.dot(v);
        },
        Eigen::VectorXd::Zero(5), st);
    const double gn = r.state.g.lpNorm<Eigen::Infinity>();
    return {"BFGS quadratic |g| " + fmt("%.1e", gn) + " in " + std::to_string(r.state.iter) + " iterations",
            gn < 1e-10 && r.state.iter <= 30};
  }

  static std::pair<std::string, bool> bfgs_rosenbrock() {
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    const auto r = opt::bfgs_minimize(
        [](std::span<const double> x, Eigen::VectorXd& g) {
          const double a = 1 - x[0], b = x[1] - x[0] * x[0];
          g.resize(2);
          g[0] = -2 * a - 400 * x[0] * b;
          g[1] = 200 * b;
          return a * a + 100 * b * b;
        },
        x0, opt::StopCriteria{});
    const double err = (r.state.x - Eigen::Vector2d(1.0, 1.0)).cwiseAbs().maxCoeff();
    return check("Rosenbrock distance to (1,1)", err, 1e-6);
  }

  Options opt_;
  Runner runner_;
  std::ostringstream report_;
};

void usage() {
  std::cerr << "usage: pinncal_acceptance [--out DIR] [--configs DIR] [--only 1,2,...]\n"
               "                          [--max-iters-2d N] [--max-seconds-2d S] [--strict]\n";
}

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  try {
    for (int i = 1; i < argc; ++i) {
      const std::string a = argv[i];
      auto next = [&]() -> std::string {
        if (i + 1 >= argc) throw std::invalid_argument("missing value for " + a);
        return argv[++i];
      };
      if (a == "--out") {
        opt.out = next();
      } else if (a == "--configs") {
        opt.configs = next();
      } else if (a == "--only") {
        std::stringstream ss(next());
        for (std::string t; std::getline(ss, t, ',');) opt.only.insert(std::stoi(t));
      } else if (a == "--max-iters-2d") {
        opt.max_iters_2d = std::stoi(next());
      } else if (a == "--max-seconds-2d") {
        opt.max_seconds_2d = std::stod(next());
      } else if (a == "--strict") {
        opt.strict = true;
      } else {
        usage();
        return 2;
      }
    }
    fs::create_directories(opt.out);
    return Acceptance(opt).run();
  } catch (const std::exception& e) {
    std::cerr << "acceptance harness error: " << e.what() << "\n";
    return 1;
  }
}
