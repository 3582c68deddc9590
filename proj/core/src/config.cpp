#include "pinncal/config.hpp"

#include <algorithm>
#include <set>

#include "pinncal/errors.hpp"
#include "pinncal/io.hpp"

namespace pinncal {

using nlohmann::json;

CaseKind case_kind_from_string(const std::string& s) {
  if (s == "rod_analytical") return CaseKind::kRodAnalytical;
  if (s == "rod_csv") return CaseKind::kRodCsv;
  if (s == "plate") return CaseKind::kPlate;
  throw ConfigError("unknown case '" + s + "' (expected rod_analytical, rod_csv or plate)");
}

std::string to_string(CaseKind c) {
  switch (c) {
    case CaseKind::kRodAnalytical: return "rod_analytical";
    case CaseKind::kRodCsv: return "rod_csv";
    case CaseKind::kPlate: return "plate";
  }
  return "?";
}

Profile profile_from_string(const std::string& s) {
  if (s == "smoke") return Profile::kSmoke;
  if (s == "paper") return Profile::kPaper;
  throw ConfigError("unknown profile '" + s + "' (expected smoke or paper)");
}

std::string to_string(Profile p) { return p == Profile::kSmoke ? "smoke" : "paper"; }

StudyKind study_kind_from_string(const std::string& s) {
  if (s == "estimate_sensitivity") return StudyKind::kEstimateSensitivity;
  if (s == "collocation_convergence") return StudyKind::kCollocationConvergence;
  if (s == "noise_sensitivity") return StudyKind::kNoiseSensitivity;
  throw ConfigError("unknown study '" + s +
                    "' (expected estimate_sensitivity, collocation_convergence or noise_sensitivity)");
}

std::string to_string(StudyKind s) {
  switch (s) {
    case StudyKind::kEstimateSensitivity: return "estimate_sensitivity";
    case StudyKind::kCollocationConvergence: return "collocation_convergence";
    case StudyKind::kNoiseSensitivity: return "noise_sensitivity";
  }
  return "?";
}

namespace {

// Reads the keys of one JSON object and rejects whatever was not asked for.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  template <class T, class Convert>
  void get_enum(const std::string& key, T& out, Convert convert) {
    std::string s;
    get(key, s);
    if (s.empty()) return;
    try {
      out = convert(s);
    } catch (const ConfigError& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  Reader child(const std::string& key) {
    seen_.insert(key);
    return Reader(j_.at(key), where(key));
  }

  void skip(const std::string& key) { seen_.insert(key); }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError("unknown key '" + where(item.key()) + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void apply_case_defaults(ExperimentConfig& cfg) {
  if (cfg.case_kind == CaseKind::kPlate) {
    cfg.hidden = {16, 16};
    cfg.n_data = cfg.n_collocation = 4096;
    cfg.n_validation = 4096;
  } else if (cfg.case_kind == CaseKind::kRodCsv) {
    cfg.n_data = cfg.n_collocation = 161;
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (name.empty()) throw ConfigError("name must not be empty");
  if (hidden.empty()) throw ConfigError("network.hidden needs at least one layer");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("network.hidden sizes must be positive");
  }
  if (!(E_true > 0.0)) throw ConfigError("material.E_true must be positive");
  if (dim() == 2 && !(nu_true > -1.0 && nu_true < 0.5)) throw ConfigError("material.nu_true must lie in (-1, 0.5)");
  if (!(E_est_factor > 0.0) || !(nu_est_factor > 0.0)) throw ConfigError("estimate factors must be positive");
  if (!(standard_initial > 0.0)) throw ConfigError("material.standard_initial must be positive");
  weights.validate();
  if (n_data < 1 || n_collocation < 1 || n_ext < 1 || n_validation < 1) {
    throw ConfigError("all point counts must be positive");
  }
  if (case_kind == CaseKind::kRodAnalytical && n_collocation != n_data) {
    throw ConfigError("the analytical rod places collocation at the data points (n_collocation == n_data)");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise.sigma must be non-negative");
  if (case_kind == CaseKind::kRodCsv && csv_path.empty()) throw ConfigError("rod_csv needs csv.path");
  if (case_kind != CaseKind::kPlate) rod.validate();
  if (case_kind == CaseKind::kPlate) {
    plate.validate();
    datagen::PlateSampling ps{n_data, n_collocation, n_ext, n_validation, collocation_mode, seed};
    ps.validate();
  }
  if (stop.max_iters < 1) throw ConfigError("optimizer.max_iters must be positive");
  if (study.repeats < 1) throw ConfigError("study.repeats must be positive");
  if (study.kind) {
    if (study.E_factors.empty() || study.nu_factors.empty()) throw ConfigError("study estimate grids must not be empty");
    for (double f : study.E_factors) {
      if (!(f > 0.0)) throw ConfigError("study.E_factors must be positive");
    }
    for (double f : study.nu_factors) {
      if (!(f > 0.0)) throw ConfigError("study.nu_factors must be positive");
    }
    if (*study.kind == StudyKind::kCollocationConvergence) {
      if (case_kind != CaseKind::kPlate) throw ConfigError("collocation_convergence needs the plate case");
      if (study.collocation_counts.empty()) throw ConfigError("study.collocation_counts must not be empty");
      for (int n : study.collocation_counts) {
        if (n < 1) throw ConfigError("study.collocation_counts must be positive");
      }
    }
    if (*study.kind == StudyKind::kNoiseSensitivity) {
      if (case_kind == CaseKind::kRodCsv) throw ConfigError("noise_sensitivity needs synthetic data");
      if (study.noise_levels.empty()) throw ConfigError("study.noise_levels must not be empty");
      for (double s : study.noise_levels) {
        if (!(s >= 0.0)) throw ConfigError("study.noise_levels must be non-negative");
      }
    }
  }
  if (jobs < 1) throw ConfigError("jobs must be positive");
}

ExperimentConfig config_from_json(const json& input, Profile profile, const std::filesystem::path& base_dir) {
  json j = input;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (j.contains("profiles")) {
    const json profiles = j.at("profiles");
    j.erase("profiles");
    Reader pr(profiles, "profiles");
    pr.skip("smoke");
    pr.skip("paper");
    pr.finish();
    const std::string key = to_string(profile);
    if (profiles.contains(key)) {
      if (!profiles.at(key).is_object()) throw ConfigError("profiles." + key + ": expected an object");
      j.merge_patch(profiles.at(key));
    }
  }

  ExperimentConfig cfg;
  Reader r(j, "");
  r.get("name", cfg.name);
  r.get_enum("case", cfg.case_kind, case_kind_from_string);
  apply_case_defaults(cfg);
  r.get_enum("mode", cfg.mode, mode_from_string);
  r.get_enum("work_loss_form", cfg.work_form, work_form_from_string);
  r.get("seed", cfg.seed);
  std::string out_dir = cfg.output_dir.string();
  r.get("output_dir", out_dir);
  cfg.output_dir = out_dir;
  r.get("jobs", cfg.jobs);

  if (r.has("network")) {
    Reader n = r.child("network");
    n.get("hidden", cfg.hidden);
    n.get("separate", cfg.separate_networks);
    n.finish();
  }
  if (r.has("material")) {
    Reader m = r.child("material");
    m.get("E_true", cfg.E_true);
    m.get("nu_true", cfg.nu_true);
    m.get("E_est_factor", cfg.E_est_factor);
    m.get("nu_est_factor", cfg.nu_est_factor);
    m.get("standard_initial", cfg.standard_initial);
    m.finish();
  }
  if (r.has("weights")) {
    Reader w = r.child("weights");
    w.get("data", cfg.weights.data);
    w.get("pde", cfg.weights.pde);
    w.get("bc", cfg.weights.bc);
    w.finish();
  }
  if (r.has("points")) {
    Reader p = r.child("points");
    p.get("n_data", cfg.n_data);
    p.get("n_collocation", cfg.n_collocation);
    p.get("n_ext", cfg.n_ext);
    p.get("n_validation", cfg.n_validation);
    p.get_enum("collocation_mode", cfg.collocation_mode, datagen::collocation_mode_from_string);
    p.finish();
  }
  if (r.has("noise")) {
    Reader nz = r.child("noise");
    nz.get("sigma", cfg.noise_sigma);
    nz.finish();
  }
  if (r.has("rod")) {
    Reader rd = r.child("rod");
    rd.get("length", cfg.rod.length);
    rd.get("traction", cfg.rod.traction);
    rd.get("area", cfg.rod.area);
    rd.finish();
  }
  if (r.has("csv")) {
    Reader c = r.child("csv");
    std::string path;
    c.get("path", path);
    c.finish();
    cfg.csv_path = path;
    if (!cfg.csv_path.empty() && cfg.csv_path.is_relative() && !base_dir.empty()) {
      cfg.csv_path = base_dir / cfg.csv_path;
    }
  }
  if (r.has("plate")) {
    Reader p = r.child("plate");
    p.get("length", cfg.plate.length);
    p.get("radius", cfg.plate.radius);
    p.get("thickness", cfg.plate.thickness);
    std::vector<double> t;
    p.get("traction", t);
    if (!t.empty()) {
      if (t.size() != 2) throw ConfigError("plate.traction: expected two components");
      cfg.plate.traction = {t[0], t[1]};
    }
    p.get_enum("ambient", cfg.plate.ambient, mech::ambient_from_string);
    if (p.has("mesh")) {
      Reader m = p.child("mesh");
      m.get("edge_divisions", cfg.plate.mesh.edge_divisions);
      m.get("radial_divisions", cfg.plate.mesh.radial_divisions);
      m.get("grading", cfg.plate.mesh.grading);
      m.finish();
    }
    p.finish();
  }
  if (r.has("optimizer")) {
    Reader o = r.child("optimizer");
    o.get("max_iters", cfg.stop.max_iters);
    o.get("grad_tol", cfg.stop.grad_tol);
    o.get("loss_change_tol", cfg.stop.loss_change_tol);
    o.get("max_line_search_steps", cfg.stop.max_line_search_steps);
    o.get("max_seconds", cfg.stop.max_seconds);
    o.finish();
  }
  if (r.has("study")) {
    Reader s = r.child("study");
    std::string kind;
    s.get("kind", kind);
    if (!kind.empty()) cfg.study.kind = study_kind_from_string(kind);
    s.get("repeats", cfg.study.repeats);
    s.get("E_factors", cfg.study.E_factors);
    s.get("nu_factors", cfg.study.nu_factors);
    s.get("collocation_counts", cfg.study.collocation_counts);
    s.get("noise_levels", cfg.study.noise_levels);
    s.finish();
  }
  r.finish();

  cfg.plate.material = {cfg.E_true, cfg.nu_true};
  cfg.rod.E = cfg.E_true;
  if (profile == Profile::kSmoke) cfg.study.repeats = std::min(cfg.study.repeats, 3);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, Profile profile) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    return config_from_json(j, profile, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["case"] = to_string(cfg.case_kind);
  j["mode"] = to_string(cfg.mode);
  j["work_loss_form"] = to_string(cfg.work_form);
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir.string();
  j["jobs"] = cfg.jobs;
  j["network"] = {{"hidden", cfg.hidden}, {"separate", cfg.separate_networks}};
  j["material"] = {{"E_true", cfg.E_true},
                   {"nu_true", cfg.nu_true},
                   {"E_est_factor", cfg.E_est_factor},
                   {"nu_est_factor", cfg.nu_est_factor},
                   {"standard_initial", cfg.standard_initial}};
  j["weights"] = {{"data", cfg.weights.data}, {"pde", cfg.weights.pde}, {"bc", cfg.weights.bc}};
  j["points"] = {{"n_data", cfg.n_data},
                 {"n_collocation", cfg.n_collocation},
                 {"n_ext", cfg.n_ext},
                 {"n_validation", cfg.n_validation},
                 {"collocation_mode", datagen::to_string(cfg.collocation_mode)}};
  j["noise"] = {{"sigma", cfg.noise_sigma}};
  j["rod"] = {{"length", cfg.rod.length}, {"traction", cfg.rod.traction}, {"area", cfg.rod.area}};
  j["csv"] = {{"path", cfg.csv_path.string()}};
  j["plate"] = {{"length", cfg.plate.length},
                {"radius", cfg.plate.radius},
                {"thickness", cfg.plate.thickness},
                {"traction", {cfg.plate.traction.x(), cfg.plate.traction.y()}},
                {"ambient", mech::to_string(cfg.plate.ambient)},
                {"mesh",
                 {{"edge_divisions", cfg.plate.mesh.edge_divisions},
                  {"radial_divisions", cfg.plate.mesh.radial_divisions},
                  {"grading", cfg.plate.mesh.grading}}}};
  j["optimizer"] = {{"max_iters", cfg.stop.max_iters},
                    {"grad_tol", cfg.stop.grad_tol},
                    {"loss_change_tol", cfg.stop.loss_change_tol},
                    {"max_line_search_steps", cfg.stop.max_line_search_steps},
                    {"max_seconds", cfg.stop.max_seconds}};
  json study = {{"repeats", cfg.study.repeats},
                {"E_factors", cfg.study.E_factors},
                {"nu_factors", cfg.study.nu_factors},
                {"collocation_counts", cfg.study.collocation_counts},
                {"noise_levels", cfg.study.noise_levels}};
  if (cfg.study.kind) study["kind"] = to_string(*cfg.study.kind);
  j["study"] = std::move(study);
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  json j = to_json(cfg);
  j.erase("seed");
  j.erase("output_dir");
  j.erase("jobs");
  return fnv1a_hex(j.dump());
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined word
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace pinncal
