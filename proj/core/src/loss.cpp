#include "pinncal/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pinncal/errors.hpp"
#include "pinncal/io.hpp"

namespace pinncal {

using Eigen::MatrixXd;
using Eigen::VectorXd;

CalibrationMode mode_from_string(const std::string& s) {
  if (s == "enhanced") return CalibrationMode::kEnhanced;
  if (s == "standard") return CalibrationMode::kStandard;
  throw ConfigError("unknown mode '" + s + "' (expected standard or enhanced)");
}

std::string to_string(CalibrationMode m) { return m == CalibrationMode::kEnhanced ? "enhanced" : "standard"; }

WorkForm work_form_from_string(const std::string& s) {
  if (s == "squared") return WorkForm::kSquared;
  if (s == "signed") return WorkForm::kSigned;
  throw ConfigError("unknown work loss form '" + s + "' (expected squared or signed)");
}

std::string to_string(WorkForm f) { return f == WorkForm::kSquared ? "squared" : "signed"; }

namespace {

void check_points(const MatrixXd& m, int dim, const char* what) {
  if (m.cols() == 0) throw ConfigError(std::string(what) + " is empty");
  if (m.rows() != dim) throw ConfigError(std::string(what) + " has the wrong coordinate dimension");
  if (!m.allFinite()) throw ConfigError(std::string(what) + " contains non-finite values");
}

void check_companion(const MatrixXd& m, const MatrixXd& points, int rows, const char* what) {
  if (m.rows() != rows || m.cols() != points.cols()) {
    throw ConfigError(std::string(what) + " does not match its point set");
  }
  if (!m.allFinite()) throw ConfigError(std::string(what) + " contains non-finite values");
}

mech::FieldSample sample_at(std::span<const NormalizedNetwork> nets, const MatrixXd& points, Eigen::Index p) {
  const VectorXd x = points.col(p);
  return mech::sample_field(nets, std::span<const double>(x.data(), static_cast<size_t>(x.size())));
}

std::array<double, 2> traction_of(const mech::ElasticModel& mat, const mech::FieldSample& s, const VectorXd& n) {
  if (s.dim == 1) return {mat.E * s.grad[0][0] * n[0], 0.0};
  const auto sig = mech::stress(mat.lame, mech::strain_from_gradient(s.grad));
  return {sig.xx * n[0] + sig.xy * n[1], sig.xy * n[0] + sig.yy * n[1]};
}

}  // namespace

void TrainingSet::validate(CalibrationMode mode) const {
  if (dim < 1 || dim > 2) throw ConfigError("training set dimension must be 1 or 2");
  check_points(data_points, dim, "data point set");
  check_companion(data_values, data_points, dim, "observed displacements");
  check_points(pde_points, dim, "collocation point set");
  if (body_force.size() != 0) check_companion(body_force, pde_points, dim, "body force");
  if (mode == CalibrationMode::kEnhanced) {
    check_points(work_points, dim, "internal work point set");
    check_points(ext_points, dim, "external work point set");
    check_companion(ext_tractions, ext_points, dim, "external work tractions");
    if (!(volume > 0.0)) throw ConfigError("domain measure must be positive");
    if (!(boundary_measure > 0.0)) throw ConfigError("boundary measure must be positive");
  } else {
    check_points(neumann_points, dim, "traction boundary point set");
    check_companion(neumann_normals, neumann_points, dim, "boundary normals");
    check_companion(neumann_tractions, neumann_points, dim, "boundary tractions");
  }
}

void LossWeights::validate() const {
  if (!(data >= 0.0) || !(pde >= 0.0) || !(bc >= 0.0)) throw ConfigError("loss weights must be non-negative");
}

VectorXd characteristic_displacement(const MatrixXd& values) {
  if (values.cols() == 0) throw ConfigError("cannot compute characteristic displacements without data");
  return values.rowwise().mean();
}

VectorXd data_loss(std::span<const NormalizedNetwork> nets, const MatrixXd& points, const MatrixXd& values,
                   const VectorXd& u_char) {
  const int dim = static_cast<int>(points.rows());
  check_points(points, dim, "data point set");
  check_companion(values, points, dim, "observed displacements");
  if (u_char.size() != dim) throw ConfigError("characteristic displacement has the wrong length");
  for (int c = 0; c < dim; ++c) {
    if (u_char[c] == 0.0) {
      throw ConfigError("characteristic displacement of component " + std::to_string(c) +
                        " is zero; set an explicit override value");
    }
  }
  VectorXd out = VectorXd::Zero(dim);
  std::vector<std::vector<double>> terms(static_cast<size_t>(dim), std::vector<double>(static_cast<size_t>(points.cols())));
  for (Eigen::Index p = 0; p < points.cols(); ++p) {
    const auto s = sample_at(nets, points, p);
    for (int c = 0; c < dim; ++c) {
      const double r = (s.u[static_cast<size_t>(c)] - values(c, p)) / u_char[c];
      terms[static_cast<size_t>(c)][static_cast<size_t>(p)] = r * r;
    }
  }
  for (int c = 0; c < dim; ++c) {
    out[c] = mech::pairwise_sum(terms[static_cast<size_t>(c)]) / static_cast<double>(points.cols());
  }
  return out;
}

double pde_loss(std::span<const NormalizedNetwork> nets, const mech::ElasticModel& mat, const MatrixXd& points,
                const MatrixXd& body_force) {
  check_points(points, mat.dim, "collocation point set");
  if (body_force.size() != 0) check_companion(body_force, points, mat.dim, "body force");
  std::vector<double> terms(static_cast<size_t>(points.cols()));
  for (Eigen::Index p = 0; p < points.cols(); ++p) {
    const auto s = sample_at(nets, points, p);
    std::array<double, 2> r =
        s.dim == 1 ? std::array<double, 2>{mat.E * s.hess[0][0][0], 0.0} : mech::divergence(mat.lame, s.hess);
    if (body_force.size() != 0) {
      for (int c = 0; c < mat.dim; ++c) r[static_cast<size_t>(c)] += body_force(c, p);
    }
    terms[static_cast<size_t>(p)] = r[0] * r[0] + r[1] * r[1];
  }
  return mech::pairwise_sum(terms) / static_cast<double>(points.cols());
}

double work_loss(std::span<const NormalizedNetwork> nets, const mech::ElasticModel& mat, const TrainingSet& set) {
  return mech::internal_work(nets, mat, set.work_points, set.volume) -
         mech::external_work(nets, set.ext_points, set.ext_tractions, set.boundary_measure);
}

double bc_neumann_loss(std::span<const NormalizedNetwork> nets, const mech::ElasticModel& mat,
                       const MatrixXd& points, const MatrixXd& normals, const MatrixXd& tractions) {
  check_points(points, mat.dim, "traction boundary point set");
  check_companion(normals, points, mat.dim, "boundary normals");
  check_companion(tractions, points, mat.dim, "boundary tractions");
  std::vector<double> terms(static_cast<size_t>(points.cols()));
  for (Eigen::Index p = 0; p < points.cols(); ++p) {
    const auto s = sample_at(nets, points, p);
    const auto t = traction_of(mat, s, normals.col(p));
    double r2 = 0.0;
    for (int c = 0; c < mat.dim; ++c) {
      const double r = t[static_cast<size_t>(c)] - tractions(c, p);
      r2 += r * r;
    }
    terms[static_cast<size_t>(p)] = r2;
  }
  return mech::pairwise_sum(terms) / static_cast<double>(points.cols());
}

LossBreakdown total_loss(CalibrationMode mode, WorkForm form, const LossWeights& weights, LossBreakdown parts) {
  weights.validate();
  if (mode == CalibrationMode::kEnhanced) {
    parts.work_objective = form == WorkForm::kSquared ? parts.work * parts.work : parts.work;
    parts.total = parts.pde + parts.work_objective + weights.data * (parts.data_x + parts.data_y);
  } else {
    parts.work_objective = 0.0;
    parts.total = weights.pde * parts.pde + weights.bc * parts.bc + weights.data * (parts.data_x + parts.data_y);
  }
  return parts;
}

std::vector<double> MaterialVariables::initial() const {
  if (scaled) return std::vector<double>(parameterization.estimates.size(), 0.0);
  return parameterization.estimates;
}

std::vector<double> MaterialVariables::effective(std::span<const double> vars) const {
  if (scaled) return mech::effective_parameters(parameterization, vars);
  if (static_cast<int>(vars.size()) != parameterization.size()) throw ConfigError("material variable count mismatch");
  return {vars.begin(), vars.end()};
}

struct LossEvaluator::Recording {
  explicit Recording(int n) : tape(n) {}
  ad::Tape tape;
  ad::Var total, pde, work, work_objective, bc;
  std::array<ad::Var, 2> data;
};

LossEvaluator::LossEvaluator(std::vector<NormalizedNetwork> nets, MaterialVariables material, TrainingSet set,
                             LossConfig config)
    : nets_(std::move(nets)), material_(std::move(material)), set_(std::move(set)), config_(std::move(config)) {
  if (nets_.empty()) throw ConfigError("no displacement networks");
  set_.validate(config_.mode);
  config_.weights.validate();
  material_.parameterization.validate();
  const int dim = set_.dim;
  if (material_.parameterization.size() != (dim == 1 ? 1 : 2)) {
    throw ConfigError(dim == 1 ? "a rod calibration identifies exactly one modulus"
                               : "a plane calibration identifies exactly a bulk and a shear modulus");
  }
  int outputs = 0;
  for (const auto& nn : nets_) {
    nn.net.validate();
    nn.spec.validate();
    if (nn.input_dim() != dim) throw ConfigError("network input dimension differs from the training set");
    outputs += nn.output_dim();
    num_network_parameters_ += nn.net.num_parameters();
  }
  if (outputs != dim) throw ConfigError("networks must provide one output per displacement component");
  num_parameters_ = num_network_parameters_ + material_.parameterization.size();

  if (config_.u_char.size() != 0) {
    u_char_ = config_.u_char;
  } else if (config_.mode == CalibrationMode::kStandard) {
    u_char_ = VectorXd::Ones(dim);
  } else {
    u_char_ = characteristic_displacement(set_.data_values);
  }
  if (u_char_.size() != dim) throw ConfigError("characteristic displacement has the wrong length");
  for (int c = 0; c < dim; ++c) {
    if (u_char_[c] == 0.0 || !std::isfinite(u_char_[c])) {
      throw ConfigError("characteristic displacement of component " + std::to_string(c) +
                        " is zero; set an explicit override value");
    }
  }
}

LossEvaluator::~LossEvaluator() = default;

std::vector<double> LossEvaluator::initial_parameters() const {
  std::vector<double> x;
  x.reserve(static_cast<size_t>(num_parameters_));
  for (const auto& nn : nets_) {
    const auto p = nn.net.parameters();
    x.insert(x.end(), p.begin(), p.end());
  }
  const auto m = material_.initial();
  x.insert(x.end(), m.begin(), m.end());
  return x;
}

std::vector<NormalizedNetwork> LossEvaluator::networks(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != num_parameters_) throw ConfigError("parameter vector has the wrong length");
  std::vector<NormalizedNetwork> out = nets_;
  size_t off = 0;
  for (auto& nn : out) {
    const auto n = static_cast<size_t>(nn.net.num_parameters());
    nn.net.set_parameters(x.subspan(off, n));
    off += n;
  }
  return out;
}

std::vector<double> LossEvaluator::material_variables(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != num_parameters_) throw ConfigError("parameter vector has the wrong length");
  const auto tail = x.subspan(static_cast<size_t>(num_network_parameters_));
  return {tail.begin(), tail.end()};
}

std::vector<double> LossEvaluator::effective_parameters(std::span<const double> x) const {
  return material_.effective(material_variables(x));
}

void LossEvaluator::record(std::span<const double> x) {
  rec_ = std::make_unique<Recording>(num_parameters_);
  ad::Tape& tape = rec_->tape;
  const int dim = set_.dim;
  const bool enhanced = config_.mode == CalibrationMode::kEnhanced;

  // Point sets that coincide share one forward pass at the highest order any
  // of their uses needs.
  struct Group {
    const MatrixXd* points;
    int order;
    std::vector<FieldJets> comps;
  };
  std::vector<Group> groups;
  auto group_of = [&](const MatrixXd& m, int order) {
    for (size_t i = 0; i < groups.size(); ++i) {
      const MatrixXd& g = *groups[i].points;
      if (g.rows() == m.rows() && g.cols() == m.cols() && g == m) {
        groups[i].order = std::max(groups[i].order, order);
        return i;
      }
    }
    groups.push_back({&m, order, {}});
    return groups.size() - 1;
  };
  const size_t g_data = group_of(set_.data_points, 0);
  const size_t g_pde = group_of(set_.pde_points, 2);
  size_t g_work = 0, g_ext = 0, g_bc = 0;
  if (enhanced) {
    g_work = group_of(set_.work_points, 1);
    g_ext = group_of(set_.ext_points, 0);
  } else {
    g_bc = group_of(set_.neumann_points, 1);
  }
  for (auto& g : groups) {
    int offset = 0;
    for (const auto& nn : nets_) {
      auto jets = record_field_jets(tape, nn, x, offset, *g.points, g.order);
      g.comps.insert(g.comps.end(), jets.begin(), jets.end());
      offset += nn.net.num_parameters();
    }
  }

  // Material parameters.
  const auto& par = material_.parameterization;
  std::vector<ad::Var> kappa;
  for (int i = 0; i < par.size(); ++i) {
    ad::Var v = tape.parameter(x, num_network_parameters_ + i, 1, 1);
    kappa.push_back(material_.scaled ? (v + 1.0) * par.estimates[static_cast<size_t>(i)] : v);
  }
  mech::Lame<ad::Var> lame{};
  if (dim == 2) lame = mech::lame_from_KG(kappa[0], kappa[1], config_.ambient);

  auto row_const = [&](const MatrixXd& m, int r) { return tape.constant(MatrixXd(m.row(r))); };

  // Data.
  {
    const auto& comps = groups[g_data].comps;
    for (int c = 0; c < dim; ++c) {
      ad::Var diff = (comps[static_cast<size_t>(c)].value - row_const(set_.data_values, c)) * (1.0 / u_char_[c]);
      rec_->data[static_cast<size_t>(c)] = mean(square(diff));
    }
  }

  // PDE residual.
  {
    const auto& comps = groups[g_pde].comps;
    std::array<ad::Var, 2> r;
    if (dim == 1) {
      r[0] = kappa[0] * comps[0].second[0][0];
    } else {
      mech::Hessian2D<ad::Var> h;
      for (size_t c = 0; c < 2; ++c)
        for (size_t j = 0; j < 2; ++j)
          for (size_t k = 0; k < 2; ++k) h[c][j][k] = comps[c].second[j][k];
      r = mech::divergence(lame, h);
    }
    if (set_.body_force.size() != 0) {
      for (int c = 0; c < dim; ++c) r[static_cast<size_t>(c)] = r[static_cast<size_t>(c)] + row_const(set_.body_force, c);
    }
    ad::Var r2 = square(r[0]);
    if (dim == 2) r2 = r2 + square(r[1]);
    rec_->pde = mean(r2);
  }

  auto stress_at = [&](const std::vector<FieldJets>& comps) {
    mech::Gradient2D<ad::Var> g;
    for (size_t c = 0; c < 2; ++c)
      for (size_t j = 0; j < 2; ++j) g[c][j] = comps[c].first[j];
    const auto eps = mech::strain_from_gradient(g);
    return std::make_pair(mech::stress(lame, eps), eps);
  };

  if (enhanced) {
    const auto& wc = groups[g_work].comps;
    ad::Var density;
    if (dim == 1) {
      density = kappa[0] * square(wc[0].first[0]);
    } else {
      const auto [sig, eps] = stress_at(wc);
      density = mech::energy_density(sig, eps);
    }
    const double n_int = static_cast<double>(set_.work_points.cols());
    ad::Var w_int = sum(density) * (mech::kWorkFactor * set_.volume / n_int);

    const auto& ec = groups[g_ext].comps;
    ad::Var tu = row_const(set_.ext_tractions, 0) * ec[0].value;
    if (dim == 2) tu = tu + row_const(set_.ext_tractions, 1) * ec[1].value;
    const double n_ext = static_cast<double>(set_.ext_points.cols());
    ad::Var w_ext = sum(tu) * (mech::kWorkFactor * set_.boundary_measure / n_ext);

    rec_->work = w_int - w_ext;
    rec_->work_objective = config_.work_form == WorkForm::kSquared ? square(rec_->work) : rec_->work;

    ad::Var data = rec_->data[0];
    if (dim == 2) data = data + rec_->data[1];
    rec_->total = rec_->pde + rec_->work_objective + data * config_.weights.data;
  } else {
    const auto& bc = groups[g_bc].comps;
    ad::Var r2;
    if (dim == 1) {
      ad::Var r = kappa[0] * bc[0].first[0] * row_const(set_.neumann_normals, 0) - row_const(set_.neumann_tractions, 0);
      r2 = square(r);
    } else {
      const auto [sig, eps] = stress_at(bc);
      ad::Var nx = row_const(set_.neumann_normals, 0), ny = row_const(set_.neumann_normals, 1);
      ad::Var rx = sig.xx * nx + sig.xy * ny - row_const(set_.neumann_tractions, 0);
      ad::Var ry = sig.xy * nx + sig.yy * ny - row_const(set_.neumann_tractions, 1);
      r2 = square(rx) + square(ry);
    }
    rec_->bc = mean(r2);
    ad::Var data = rec_->data[0];
    if (dim == 2) data = data + rec_->data[1];
    rec_->total = rec_->pde * config_.weights.pde + rec_->bc * config_.weights.bc + data * config_.weights.data;
  }
}

bool LossEvaluator::evaluate(std::span<const double> x) {
  if (static_cast<int>(x.size()) != num_parameters_) throw ConfigError("parameter vector has the wrong length");
  last_x_.assign(x.begin(), x.end());
  const auto eff = effective_parameters(x);
  if (!mech::feasible(material_.parameterization, eff)) {
    const double inf = std::numeric_limits<double>::infinity();
    last_ = LossBreakdown{};
    last_.dim = set_.dim;
    last_.total = inf;
    last_.work_objective = inf;
    return false;
  }
  if (!rec_) {
    record(x);
  } else {
    rec_->tape.replay(x);
  }
  LossBreakdown b;
  b.dim = set_.dim;
  b.pde = rec_->pde.scalar();
  b.data_x = rec_->data[0].scalar();
  if (set_.dim == 2) b.data_y = rec_->data[1].scalar();
  if (rec_->work.valid()) {
    b.work = rec_->work.scalar();
    b.work_objective = rec_->work_objective.scalar();
  }
  if (rec_->bc.valid()) b.bc = rec_->bc.scalar();
  b.total = rec_->total.scalar();
  last_ = b;
  return true;
}

double LossEvaluator::operator()(std::span<const double> x, VectorXd& grad) {
  if (!evaluate(x)) {
    grad = VectorXd::Zero(num_parameters_);
    return last_.total;
  }
  grad = rec_->tape.gradient(rec_->total);
  return last_.total;
}

LossBreakdown LossEvaluator::breakdown(std::span<const double> x) {
  if (last_x_.size() == x.size() && std::equal(x.begin(), x.end(), last_x_.begin())) return last_;
  evaluate(x);
  return last_;
}

std::string history_csv(std::span<const HistoryRow> rows, const std::vector<std::string>& parameter_names) {
  std::ostringstream out;
  out << "iter,pde,work,data_x,data_y,total";
  for (const auto& n : parameter_names) out << ",alpha_" << n;
  out << '\n';
  for (const auto& r : rows) {
    out << r.iter << ',' << format_double(r.loss.pde) << ',' << format_double(r.loss.work) << ','
        << format_double(r.loss.data_x) << ',';
    if (r.loss.dim == 2) out << format_double(r.loss.data_y);
    out << ',' << format_double(r.loss.total);
    for (double a : r.material_vars) out << ',' << format_double(a);
    out << '\n';
  }
  return out.str();
}

}  // namespace pinncal
