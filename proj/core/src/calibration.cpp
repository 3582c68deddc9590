#include "pinncal/calibration.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "pinncal/datagen/noise.hpp"
#include "pinncal/datagen/rod.hpp"
#include "pinncal/datagen/sampling.hpp"
#include "pinncal/errors.hpp"
#include "pinncal/io.hpp"
#include "pinncal/metrics.hpp"
#include "pinncal/optimizer.hpp"

namespace pinncal {

using Eigen::MatrixXd;
using nlohmann::json;

namespace {

// Stream ids for derive_seed.
constexpr std::uint64_t kSamplingStream = 100;
constexpr std::uint64_t kNoiseStream = 200;
constexpr std::uint64_t kNetworkStream = 1;

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("result is missing '") + key + "'");
  const auto& v = j.at(key);
  if (v.is_null()) return nan();
  return v.get<double>();
}

MatrixXd predict(const std::vector<NormalizedNetwork>& nets, const MatrixXd& points) {
  int outputs = 0;
  for (const auto& nn : nets) outputs += nn.output_dim();
  MatrixXd out(outputs, points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    const Eigen::VectorXd x = points.col(i);
    int row = 0;
    for (const auto& nn : nets) {
      const auto ev = evaluate(nn, std::span<const double>(x.data(), static_cast<size_t>(x.size())));
      out.block(row, i, nn.output_dim(), 1) = ev.u;
      row += nn.output_dim();
    }
  }
  return out;
}

}  // namespace

CaseData prepare_case(const ExperimentConfig& cfg) {
  CaseData data;
  data.kind = cfg.case_kind;
  data.rod = cfg.rod;
  data.plate = cfg.plate;
  switch (cfg.case_kind) {
    case CaseKind::kRodAnalytical:
      break;
    case CaseKind::kRodCsv:
      data.measured = datagen::ingest_1d_csv(cfg.csv_path);
      data.rod.traction = data.measured->traction;
      data.rod.length = data.measured->length;
      break;
    case CaseKind::kPlate:
      data.fem = datagen::fem_solve_plate(cfg.plate);
      break;
  }
  return data;
}

RunData build_run_data(const ExperimentConfig& cfg, const CaseData& data, std::uint64_t seed) {
  RunData out;
  switch (data.kind) {
    case CaseKind::kRodAnalytical: {
      auto sc = datagen::rod_training_set(data.rod, cfg.n_data, cfg.n_validation);
      if (cfg.noise_sigma > 0.0) {
        sc.set.data_values = datagen::add_noise(sc.set.data_values, {cfg.noise_sigma, derive_seed(seed, kNoiseStream)});
      }
      out.set = std::move(sc.set);
      out.validation_points = std::move(sc.validation_points);
      out.validation_values = std::move(sc.validation_values);
      break;
    }
    case CaseKind::kRodCsv: {
      if (!data.measured) throw ConfigError("rod_csv case data was not loaded");
      out.set = datagen::rod_csv_training_set(*data.measured);
      // The measurement itself is the only reference.
      out.validation_points = out.set.data_points;
      out.validation_values = out.set.data_values;
      break;
    }
    case CaseKind::kPlate: {
      if (!data.fem) throw ConfigError("plate case data was not solved");
      Eigen::Matrix2Xd observed = data.fem->displacements;
      if (cfg.noise_sigma > 0.0) {
        observed = datagen::add_noise(observed, {cfg.noise_sigma, derive_seed(seed, kNoiseStream)});
      }
      datagen::PlateSampling ps{cfg.n_data, cfg.n_collocation, cfg.n_ext, cfg.n_validation, cfg.collocation_mode,
                                derive_seed(seed, kSamplingStream)};
      auto sc = datagen::sample_training_set(*data.fem, observed, data.plate, ps);
      out.set = std::move(sc.set);
      out.validation_points = std::move(sc.validation_points);
      out.validation_values = std::move(sc.validation_values);
      break;
    }
  }
  return out;
}

json to_json(const CalibrationResult& r) {
  json loss = {{"pde", r.final_loss.pde},         {"work", r.final_loss.work},
               {"data_x", r.final_loss.data_x},   {"data_y", number_or_null(r.final_loss.dim == 2 ? r.final_loss.data_y : nan())},
               {"bc", r.final_loss.bc},           {"total", number_or_null(r.final_loss.total)}};
  return {{"schema_version", r.schema_version},
          {"config_name", r.config_name},
          {"config_hash", r.config_hash},
          {"case", r.case_name},
          {"mode", r.mode},
          {"seed", r.seed},
          {"parameter_names", r.parameter_names},
          {"estimates", r.estimates},
          {"correction_factors", r.correction_factors},
          {"identified", r.identified},
          {"E", number_or_null(r.E)},
          {"nu", number_or_null(r.nu)},
          {"K", number_or_null(r.K)},
          {"G", number_or_null(r.G)},
          {"RE_E", number_or_null(r.re_E)},
          {"RE_nu", number_or_null(r.re_nu)},
          {"rL2", r.rl2},
          {"final_loss", loss},
          {"iterations", r.iterations},
          {"evaluations", r.evaluations},
          {"status", r.status},
          {"wall_time_s", r.wall_time_s},
          {"history_path", r.history_path},
          {"checkpoint_path", r.checkpoint_path},
          {"cell", r.cell}};
}

CalibrationResult calibration_result_from_json(const json& j) {
  if (!j.is_object()) throw DataError("result is not a JSON object");
  CalibrationResult r;
  try {
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kResultSchemaVersion) {
      throw DataError("unsupported result schema_version " + std::to_string(r.schema_version));
    }
    r.config_name = j.at("config_name").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.case_name = j.at("case").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.parameter_names = j.at("parameter_names").get<std::vector<std::string>>();
    r.estimates = j.at("estimates").get<std::vector<double>>();
    r.correction_factors = j.at("correction_factors").get<std::vector<double>>();
    r.identified = j.at("identified").get<std::vector<double>>();
    r.E = number_from(j, "E");
    r.nu = number_from(j, "nu");
    r.K = number_from(j, "K");
    r.G = number_from(j, "G");
    r.re_E = number_from(j, "RE_E");
    r.re_nu = number_from(j, "RE_nu");
    r.rl2 = j.at("rL2").get<std::vector<double>>();
    const auto& loss = j.at("final_loss");
    r.final_loss.pde = number_from(loss, "pde");
    r.final_loss.work = number_from(loss, "work");
    r.final_loss.data_x = number_from(loss, "data_x");
    r.final_loss.data_y = number_from(loss, "data_y");
    r.final_loss.bc = number_from(loss, "bc");
    r.final_loss.total = number_from(loss, "total");
    r.final_loss.dim = std::isnan(r.final_loss.data_y) ? 1 : 2;
    if (r.final_loss.dim == 1) r.final_loss.data_y = 0.0;
    r.iterations = j.at("iterations").get<int>();
    r.evaluations = j.at("evaluations").get<int>();
    r.status = j.at("status").get<std::string>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
    r.history_path = j.at("history_path").get<std::string>();
    r.checkpoint_path = j.at("checkpoint_path").get<std::string>();
    r.cell = j.value("cell", json::object());
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed result: ") + e.what());
  }
  return r;
}

RunOutcome run_calibration(const ExperimentConfig& cfg, const CaseData& data, std::uint64_t seed,
                           const ProgressCallback& progress) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunData run = build_run_data(cfg, data, seed);
  const int dim = run.set.dim;
  const bool enhanced = cfg.mode == CalibrationMode::kEnhanced;

  // Networks.
  std::vector<NormalizedNetwork> nets;
  auto make = [&](int outputs, const MatrixXd& values, std::uint64_t stream) {
    std::vector<int> sizes{dim};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(outputs);
    const auto spec = enhanced ? NormalizationSpec::from_data(run.set.data_points, values)
                               : NormalizationSpec::identity(dim, outputs);
    nets.push_back({glorot_normal_init(sizes, derive_seed(seed, stream)), spec});
  };
  if (dim == 2 && cfg.separate_networks) {
    for (int c = 0; c < 2; ++c) make(1, run.set.data_values.row(c), kNetworkStream + static_cast<std::uint64_t>(c));
  } else {
    make(dim, run.set.data_values, kNetworkStream);
  }

  // Material variables.
  MaterialVariables material;
  material.scaled = enhanced;
  const double E_est = cfg.E_true * cfg.E_est_factor;
  if (dim == 1) {
    material.parameterization = {{"E"}, {enhanced ? E_est : cfg.standard_initial}};
  } else {
    const auto kg = mech::to_KG({E_est, cfg.nu_true * cfg.nu_est_factor});
    material.parameterization = {{"K", "G"},
                                 enhanced ? std::vector<double>{kg.K, kg.G}
                                          : std::vector<double>{cfg.standard_initial, cfg.standard_initial}};
  }
  const auto& par = material.parameterization;

  LossConfig lc;
  lc.mode = cfg.mode;
  lc.work_form = cfg.work_form;
  lc.weights = cfg.weights;
  lc.ambient = data.plate.ambient;
  LossEvaluator ev(nets, material, run.set, lc);

  auto correction = [&](std::span<const double> x) {
    const auto vars = ev.material_variables(x);
    if (material.scaled) return vars;
    std::vector<double> a(vars.size());
    for (size_t i = 0; i < vars.size(); ++i) a[i] = vars[i] / par.estimates[i] - 1.0;
    return a;
  };

  RunOutcome outcome;
  auto record = [&](int iter, const Eigen::VectorXd& x) {
    const std::span<const double> xs(x.data(), static_cast<size_t>(x.size()));
    HistoryRow row{iter, ev.breakdown(xs), correction(xs)};
    if (progress) progress(row);
    outcome.history.push_back(std::move(row));
  };

  const auto x0v = ev.initial_parameters();
  Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(x0v.data(), static_cast<Eigen::Index>(x0v.size()));
  record(0, x0);
  const auto res = opt::bfgs_minimize([&](std::span<const double> x, Eigen::VectorXd& g) { return ev(x, g); }, x0,
                                      cfg.stop, [&](const opt::OptimState& s) { record(s.iter, s.x); });
  const Eigen::VectorXd& xf = res.state.x;
  const std::span<const double> xs(xf.data(), static_cast<size_t>(xf.size()));

  CalibrationResult& r = outcome.result;
  r.config_name = cfg.name;
  r.config_hash = config_hash(cfg);
  r.case_name = to_string(cfg.case_kind);
  r.mode = to_string(cfg.mode);
  r.seed = seed;
  r.parameter_names = par.names;
  r.estimates = par.estimates;
  r.correction_factors = correction(xs);
  r.identified = ev.effective_parameters(xs);
  if (dim == 1) {
    r.E = r.identified[0];
    r.nu = r.K = r.G = nan();
    r.re_E = metrics::relative_error(r.E, cfg.E_true);
    r.re_nu = nan();
  } else {
    r.K = r.identified[0];
    r.G = r.identified[1];
    const auto enu = mech::to_Enu({r.K, r.G});
    r.E = enu.E;
    r.nu = enu.nu;
    r.re_E = metrics::relative_error(r.E, cfg.E_true);
    r.re_nu = metrics::relative_error(r.nu, cfg.nu_true);
  }
  const auto trained = ev.networks(xs);
  const Eigen::VectorXd rl2 = metrics::relative_l2(predict(trained, run.validation_points), run.validation_values);
  r.rl2.assign(rl2.data(), rl2.data() + rl2.size());
  r.final_loss = ev.breakdown(xs);
  r.iterations = res.state.iter;
  r.evaluations = res.state.evaluations;
  r.status = opt::to_string(res.state.status);

  outcome.checkpoint = {trained, par.names, par.estimates, r.correction_factors};
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return outcome;
}

void write_run(const std::filesystem::path& dir, const std::string& stem, RunOutcome& outcome) {
  auto& r = outcome.result;
  r.history_path = stem + "_history.csv";
  r.checkpoint_path = stem + "_checkpoint.json";
  write_text_atomic(dir / r.history_path, history_csv(outcome.history, r.parameter_names));
  save_checkpoint(dir / r.checkpoint_path, outcome.checkpoint);
  write_text_atomic(dir / (stem + ".json"), to_json(r).dump(2) + "\n");
}

}  // namespace pinncal
