#include "pinncal/autodiff/tape.hpp"

#include <cmath>
#include <string>

namespace pinncal::ad {

namespace {

using Eigen::MatrixXd;

bool is_scalar(const MatrixXd& m) { return m.rows() == 1 && m.cols() == 1; }

// Reduce an adjoint of the broadcast result back onto an operand's shape.
MatrixXd reduce_to(const MatrixXd& adj, const MatrixXd& operand) {
  if (is_scalar(operand) && !is_scalar(adj)) {
    return MatrixXd::Constant(1, 1, adj.sum());
  }
  return adj;
}

void accumulate(MatrixXd& slot, MatrixXd contribution) {
  if (slot.size() == 0) {
    slot = std::move(contribution);
  } else {
    slot += contribution;
  }
}

template <class F>
MatrixXd broadcast(const MatrixXd& a, const MatrixXd& b, F&& f) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) {
    return f(a.array(), b.array()).matrix();
  }
  if (is_scalar(a)) {
    return f(MatrixXd::Constant(b.rows(), b.cols(), a(0, 0)).array(), b.array()).matrix();
  }
  return f(a.array(), MatrixXd::Constant(a.rows(), a.cols(), b(0, 0)).array()).matrix();
}

// tanh through the vectorized exp: sign(z) (1 - e) / (1 + e) with e = exp(-2|z|).
// The absolute error stays at a few ulp for every z.
template <class Derived>
Eigen::ArrayXXd fast_tanh(const Eigen::ArrayBase<Derived>& z) {
  const Eigen::ArrayXXd e = (-2.0 * z.abs()).exp();
  return z.sign() * (1.0 - e) / (1.0 + e);
}

}  // namespace

const Eigen::MatrixXd& Var::value() const {
  if (!valid()) throw ContractError("use of an unbound Var");
  return tape_->value(*this);
}

double Var::scalar() const {
  const auto& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw ContractError("Var::scalar on a non-scalar node");
  return v(0, 0);
}

Tape::Tape(int num_parameters) : num_parameters_(num_parameters) {
  if (num_parameters < 0) throw ContractError("negative parameter count");
  nodes_.reserve(64);
}

int Tape::own(Var v) const {
  if (v.tape_ != this || v.id_ < 0 || v.id_ >= size()) {
    throw ContractError("Var does not belong to this tape");
  }
  return v.id_;
}

Var Tape::push(Node node) {
  node.active = node.op == Op::kParam;
  for (int k : node.in) {
    if (k >= 0 && nodes_[static_cast<size_t>(k)].active) node.active = true;
  }
  compute(node);
  nodes_.push_back(std::move(node));
  return Var(this, size() - 1);
}

const Eigen::MatrixXd& Tape::value(Var v) const { return nodes_[static_cast<size_t>(own(v))].value; }

Var Tape::parameter(std::span<const double> params, int offset, int rows, int cols) {
  if (static_cast<int>(params.size()) != num_parameters_) {
    throw ContractError("parameter span length differs from the tape's parameter count");
  }
  if (offset < 0 || rows < 1 || cols < 1 || offset + rows * cols > num_parameters_) {
    throw ContractError("parameter leaf out of range");
  }
  params_ = params;
  Node n;
  n.op = Op::kParam;
  n.geom = {offset, rows, cols, 0};
  return push(std::move(n));
}

Var Tape::constant(Eigen::MatrixXd value) {
  Node n;
  n.op = Op::kConst;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::constant(double value) { return constant(MatrixXd::Constant(1, 1, value)); }

Var Tape::binary(Op op, Var a, Var b) {
  Node n;
  n.op = op;
  n.in = {own(a), own(b), -1};
  const auto& va = nodes_[static_cast<size_t>(n.in[0])].value;
  const auto& vb = nodes_[static_cast<size_t>(n.in[1])].value;
  const bool same = va.rows() == vb.rows() && va.cols() == vb.cols();
  if (!same && !is_scalar(va) && !is_scalar(vb)) {
    throw ContractError("shape mismatch: " + std::to_string(va.rows()) + "x" +
                        std::to_string(va.cols()) + " vs " + std::to_string(vb.rows()) + "x" +
                        std::to_string(vb.cols()));
  }
  return push(std::move(n));
}

Var Tape::unary(Op op, Var a, double c) {
  Node n;
  n.op = op;
  n.in = {own(a), -1, -1};
  n.c = c;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) { return binary(Op::kAdd, a, b); }
Var Tape::sub(Var a, Var b) { return binary(Op::kSub, a, b); }
Var Tape::mul(Var a, Var b) { return binary(Op::kMul, a, b); }
Var Tape::div(Var a, Var b) { return binary(Op::kDiv, a, b); }
Var Tape::neg(Var a) { return unary(Op::kNeg, a); }
Var Tape::scale(Var a, double c) { return unary(Op::kScale, a, c); }
Var Tape::shift(Var a, double c) { return unary(Op::kShift, a, c); }
Var Tape::square(Var a) { return unary(Op::kSquare, a); }
Var Tape::tanh(Var a) { return unary(Op::kTanh, a); }
Var Tape::sum(Var a) { return unary(Op::kSum, a); }
Var Tape::mean(Var a) { return unary(Op::kMean, a); }

Var Tape::affine(Var weights, Var input, Var bias, int value_cols) {
  Node n;
  n.op = Op::kAffine;
  n.in = {own(weights), own(input), own(bias)};
  const auto& w = nodes_[static_cast<size_t>(n.in[0])].value;
  const auto& x = nodes_[static_cast<size_t>(n.in[1])].value;
  const auto& b = nodes_[static_cast<size_t>(n.in[2])].value;
  if (w.cols() != x.rows() || b.rows() != w.rows() || b.cols() != 1 || value_cols < 0 ||
      value_cols > x.cols()) {
    throw ContractError("affine: inconsistent shapes");
  }
  n.geom = {value_cols, 0, 0, 0};
  return push(std::move(n));
}

Var Tape::jet_tanh(Var z, JetLayout layout) {
  Node n;
  n.op = Op::kJetTanh;
  n.in = {own(z), -1, -1};
  n.layout = layout;
  if (nodes_[static_cast<size_t>(n.in[0])].value.cols() != layout.components() * layout.points) {
    throw ContractError("jet_tanh: column count does not match the jet layout");
  }
  return push(std::move(n));
}

Var Tape::block(Var a, int row, int col, int rows, int cols) {
  Node n;
  n.op = Op::kBlock;
  n.in = {own(a), -1, -1};
  const auto& v = nodes_[static_cast<size_t>(n.in[0])].value;
  if (row < 0 || col < 0 || rows < 1 || cols < 1 || row + rows > v.rows() || col + cols > v.cols()) {
    throw ContractError("block out of range");
  }
  n.geom = {row, col, rows, cols};
  return push(std::move(n));
}

void Tape::compute(Node& node) {
  auto in = [&](int k) -> const MatrixXd& { return nodes_[static_cast<size_t>(node.in[k])].value; };
  switch (node.op) {
    case Op::kParam: {
      using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
      node.value = Eigen::Map<const RowMajor>(params_.data() + node.geom[0], node.geom[1], node.geom[2]);
      break;
    }
    case Op::kConst:
      break;
    case Op::kAdd:
      node.value = broadcast(in(0), in(1), [](const auto& a, const auto& b) { return a + b; });
      break;
    case Op::kSub:
      node.value = broadcast(in(0), in(1), [](const auto& a, const auto& b) { return a - b; });
      break;
    case Op::kMul:
      node.value = broadcast(in(0), in(1), [](const auto& a, const auto& b) { return a * b; });
      break;
    case Op::kDiv:
      node.value = broadcast(in(0), in(1), [](const auto& a, const auto& b) { return a / b; });
      break;
    case Op::kNeg:
      node.value = -in(0);
      break;
    case Op::kScale:
      node.value = in(0) * node.c;
      break;
    case Op::kShift:
      node.value = (in(0).array() + node.c).matrix();
      break;
    case Op::kSquare:
      node.value = in(0).array().square().matrix();
      break;
    case Op::kTanh:
      node.value = fast_tanh(in(0).array()).matrix();
      break;
    case Op::kSum:
      node.value = MatrixXd::Constant(1, 1, in(0).sum());
      break;
    case Op::kMean:
      node.value = MatrixXd::Constant(1, 1, in(0).mean());
      break;
    case Op::kAffine: {
      node.value.noalias() = in(0) * in(1);
      const int n = node.geom[0];
      if (n > 0) node.value.leftCols(n).colwise() += in(2).col(0);
      break;
    }
    case Op::kJetTanh:
      forward_jet_tanh(node);
      break;
    case Op::kBlock:
      node.value = in(0).block(node.geom[0], node.geom[1], node.geom[2], node.geom[3]);
      break;
  }
}

void Tape::replay(std::span<const double> params) {
  if (static_cast<int>(params.size()) != num_parameters_) {
    throw ContractError("replay: parameter span length differs from the tape's parameter count");
  }
  params_ = params;
  for (auto& node : nodes_) compute(node);
}

// Jet nodes are processed point by point: for one point the value and all
// derivative blocks of a column are a few cache lines apart, and the inner
// loops over the hidden units vectorize.
void Tape::forward_jet_tanh(Node& node) const {
  const auto& z = nodes_[static_cast<size_t>(node.in[0])].value;
  const JetLayout& L = node.layout;
  const Eigen::Index n = L.points, R = z.rows();
  node.value.resize(R, z.cols());
  node.value.leftCols(n) = fast_tanh(z.leftCols(n).array()).matrix();
  if (L.order == 0) return;

  std::vector<double> t1(static_cast<size_t>(R)), t2(static_cast<size_t>(R));
  auto zc = [&](int comp, Eigen::Index p) { return z.data() + (comp * n + p) * R; };
  auto yc = [&](int comp, Eigen::Index p) { return node.value.data() + (comp * n + p) * R; };
  for (Eigen::Index p = 0; p < n; ++p) {
    const double* t = yc(0, p);
    for (Eigen::Index r = 0; r < R; ++r) {
      t1[r] = 1.0 - t[r] * t[r];
      t2[r] = -2.0 * t[r] * t1[r];
    }
    for (int i = 0; i < L.dim; ++i) {
      const double* zi = zc(L.first(i), p);
      double* yi = yc(L.first(i), p);
      for (Eigen::Index r = 0; r < R; ++r) yi[r] = t1[r] * zi[r];
    }
    if (L.order < 2) continue;
    for (int i = 0; i < L.dim; ++i) {
      for (int j = i; j < L.dim; ++j) {
        const int c = L.second(i, j);
        const double* zi = zc(L.first(i), p);
        const double* zj = zc(L.first(j), p);
        const double* zij = zc(c, p);
        double* y = yc(c, p);
        for (Eigen::Index r = 0; r < R; ++r) y[r] = t2[r] * zi[r] * zj[r] + t1[r] * zij[r];
      }
    }
  }
}

void Tape::backward_jet_tanh(const Node& node, const MatrixXd& adj, MatrixXd& out) const {
  const auto& z = nodes_[static_cast<size_t>(node.in[0])].value;
  const auto& y = node.value;
  const JetLayout& L = node.layout;
  const Eigen::Index n = L.points, R = z.rows();
  out.resize(z.rows(), z.cols());

  std::vector<double> t1(static_cast<size_t>(R)), t2(static_cast<size_t>(R)), t3(static_cast<size_t>(R));
  auto zc = [&](int comp, Eigen::Index p) { return z.data() + (comp * n + p) * R; };
  auto ac = [&](int comp, Eigen::Index p) { return adj.data() + (comp * n + p) * R; };
  auto oc = [&](int comp, Eigen::Index p) { return out.data() + (comp * n + p) * R; };
  for (Eigen::Index p = 0; p < n; ++p) {
    const double* t = y.data() + p * R;
    for (Eigen::Index r = 0; r < R; ++r) {
      t1[r] = 1.0 - t[r] * t[r];
      t2[r] = -2.0 * t[r] * t1[r];
      t3[r] = -2.0 * t1[r] * t1[r] - 2.0 * t[r] * t2[r];
    }
    double* dv = oc(0, p);
    const double* a0 = ac(0, p);
    for (Eigen::Index r = 0; r < R; ++r) dv[r] = a0[r] * t1[r];
    if (L.order == 0) continue;
    for (int i = 0; i < L.dim; ++i) {
      const double* ai = ac(L.first(i), p);
      const double* zi = zc(L.first(i), p);
      double* oi = oc(L.first(i), p);
      for (Eigen::Index r = 0; r < R; ++r) {
        dv[r] += ai[r] * zi[r] * t2[r];
        oi[r] = ai[r] * t1[r];
      }
    }
    if (L.order < 2) continue;
    for (int i = 0; i < L.dim; ++i) {
      for (int j = i; j < L.dim; ++j) {
        const int c = L.second(i, j);
        const double* a = ac(c, p);
        const double* zi = zc(L.first(i), p);
        const double* zj = zc(L.first(j), p);
        const double* zij = zc(c, p);
        double* o = oc(c, p);
        double* oi = oc(L.first(i), p);
        double* oj = oc(L.first(j), p);
        for (Eigen::Index r = 0; r < R; ++r) {
          dv[r] += a[r] * (t3[r] * zi[r] * zj[r] + t2[r] * zij[r]);
          o[r] = a[r] * t1[r];
          oi[r] += a[r] * t2[r] * zj[r];
          oj[r] += a[r] * t2[r] * zi[r];
        }
      }
    }
  }
}

Eigen::VectorXd Tape::gradient(Var loss) const {
  const int root = own(loss);
  if (!is_scalar(nodes_[static_cast<size_t>(root)].value)) {
    throw ContractError("gradient requested for a non-scalar node");
  }
  std::vector<MatrixXd> adj(static_cast<size_t>(root) + 1);
  adj[static_cast<size_t>(root)] = MatrixXd::Ones(1, 1);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(num_parameters_);

  for (int id = root; id >= 0; --id) {
    const MatrixXd& a = adj[static_cast<size_t>(id)];
    const Node& node = nodes_[static_cast<size_t>(id)];
    if (a.size() == 0 || !node.active) continue;
    auto in = [&](int k) -> const MatrixXd& { return nodes_[static_cast<size_t>(node.in[k])].value; };
    auto slot = [&](int k) -> MatrixXd& { return adj[static_cast<size_t>(node.in[k])]; };
    auto live = [&](int k) { return nodes_[static_cast<size_t>(node.in[k])].active; };

    switch (node.op) {
      case Op::kParam: {
        const int offset = node.geom[0], rows = node.geom[1], cols = node.geom[2];
        for (int r = 0; r < rows; ++r) {
          for (int c = 0; c < cols; ++c) grad[offset + r * cols + c] += a(r, c);
        }
        break;
      }
      case Op::kConst:
        break;
      case Op::kAdd:
        if (live(0)) accumulate(slot(0), reduce_to(a, in(0)));
        if (live(1)) accumulate(slot(1), reduce_to(a, in(1)));
        break;
      case Op::kSub:
        if (live(0)) accumulate(slot(0), reduce_to(a, in(0)));
        if (live(1)) accumulate(slot(1), reduce_to(-a, in(1)));
        break;
      case Op::kMul:
        if (live(0)) {
          accumulate(slot(0), reduce_to(broadcast(a, in(1), [](const auto& x, const auto& y) { return x * y; }), in(0)));
        }
        if (live(1)) {
          accumulate(slot(1), reduce_to(broadcast(a, in(0), [](const auto& x, const auto& y) { return x * y; }), in(1)));
        }
        break;
      case Op::kDiv:
        // d(a/b)/da = 1/b ; d(a/b)/db = -(a/b)/b
        if (live(0)) {
          accumulate(slot(0), reduce_to(broadcast(a, in(1), [](const auto& x, const auto& y) { return x / y; }), in(0)));
        }
        if (live(1)) {
          const MatrixXd q = broadcast(node.value, in(1), [](const auto& x, const auto& y) { return x / y; });
          accumulate(slot(1), reduce_to(broadcast(a, q, [](const auto& x, const auto& y) { return -x * y; }), in(1)));
        }
        break;
      case Op::kNeg:
        accumulate(slot(0), -a);
        break;
      case Op::kScale:
        accumulate(slot(0), a * node.c);
        break;
      case Op::kShift:
        accumulate(slot(0), a);
        break;
      case Op::kSquare:
        accumulate(slot(0), (2.0 * a.array() * in(0).array()).matrix());
        break;
      case Op::kTanh:
        accumulate(slot(0), (a.array() * (1.0 - node.value.array().square())).matrix());
        break;
      case Op::kSum:
        accumulate(slot(0), MatrixXd::Constant(in(0).rows(), in(0).cols(), a(0, 0)));
        break;
      case Op::kMean:
        accumulate(slot(0), MatrixXd::Constant(in(0).rows(), in(0).cols(),
                                               a(0, 0) / static_cast<double>(in(0).size())));
        break;
      case Op::kAffine: {
        if (live(0)) accumulate(slot(0), a * in(1).transpose());
        if (live(1)) accumulate(slot(1), in(0).transpose() * a);
        if (live(2)) {
          const int n = node.geom[0];
          if (n > 0) accumulate(slot(2), a.leftCols(n).rowwise().sum());
          else accumulate(slot(2), MatrixXd::Zero(in(2).rows(), 1));
        }
        break;
      }
      case Op::kJetTanh: {
        MatrixXd dz;
        backward_jet_tanh(node, a, dz);
        accumulate(slot(0), std::move(dz));
        break;
      }
      case Op::kBlock: {
        MatrixXd& s = slot(0);
        if (s.size() == 0) s.setZero(in(0).rows(), in(0).cols());
        s.block(node.geom[0], node.geom[1], node.geom[2], node.geom[3]) += a;
        break;
      }
    }
  }
  return grad;
}

namespace {
Tape& tape_of(Var a) {
  if (!a.valid()) throw ContractError("use of an unbound Var");
  return *a.tape();
}
}  // namespace

Var operator+(Var a, Var b) { return tape_of(a).add(a, b); }
Var operator-(Var a, Var b) { return tape_of(a).sub(a, b); }
Var operator*(Var a, Var b) { return tape_of(a).mul(a, b); }
Var operator/(Var a, Var b) { return tape_of(a).div(a, b); }
Var operator-(Var a) { return tape_of(a).neg(a); }
Var operator+(Var a, double c) { return tape_of(a).shift(a, c); }
Var operator+(double c, Var a) { return tape_of(a).shift(a, c); }
Var operator-(Var a, double c) { return tape_of(a).shift(a, -c); }
Var operator-(double c, Var a) { return tape_of(a).shift(tape_of(a).neg(a), c); }
Var operator*(Var a, double c) { return tape_of(a).scale(a, c); }
Var operator*(double c, Var a) { return tape_of(a).scale(a, c); }
Var operator/(Var a, double c) { return tape_of(a).scale(a, 1.0 / c); }
Var operator/(double c, Var a) { return tape_of(a).div(tape_of(a).constant(c), a); }

Var square(Var a) { return tape_of(a).square(a); }
Var tanh(Var a) { return tape_of(a).tanh(a); }
Var sum(Var a) { return tape_of(a).sum(a); }
Var mean(Var a) { return tape_of(a).mean(a); }

}  // namespace pinncal::ad
