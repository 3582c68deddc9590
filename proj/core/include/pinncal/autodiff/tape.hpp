#pragma once

// Reverse-mode tape over matrix-valued nodes.
//
// Every node holds a dense matrix. Elementwise binary operations broadcast a
// 1x1 operand against any shape. Network layers are recorded as whole-batch
// affine maps and truncated-Taylor ("jet") tanh nodes, so one node carries the
// value and the input derivatives of a layer for all points at once.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace pinncal::ad {

/// Raised when an operation is used outside its contract (shape mismatch,
/// non-scalar loss, foreign tape).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Column layout of a batched jet: `components()` blocks of `points` columns.
/// Block 0 holds values, blocks 1..dim first derivatives, then the upper
/// triangle of second derivatives in row-major pair order (00, 01, 11, ...).
struct JetLayout {
  int dim = 1;
  int order = 0;
  int points = 0;

  int components() const {
    int n = 1;
    if (order >= 1) n += dim;
    if (order >= 2) n += dim * (dim + 1) / 2;
    return n;
  }
  int first(int i) const { return 1 + i; }
  int second(int i, int j) const {
    if (i > j) std::swap(i, j);
    // offset of row i in the packed upper triangle
    const int row_start = i * dim - i * (i - 1) / 2;
    return 1 + dim + row_start + (j - i);
  }
};

class Tape;

/// Handle to a node on a tape. Cheap to copy; only valid while its tape lives.
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr && id_ >= 0; }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

  const Eigen::MatrixXd& value() const;
  int rows() const { return static_cast<int>(value().rows()); }
  int cols() const { return static_cast<int>(value().cols()); }
  /// Value of a 1x1 node.
  double scalar() const;

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  /// `num_parameters` is the length of the flat parameter vector that
  /// parameter leaves index into and that `gradient` returns.
  explicit Tape(int num_parameters);

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = delete;
  Tape& operator=(Tape&&) = delete;

  int num_parameters() const { return num_parameters_; }
  int size() const { return static_cast<int>(nodes_.size()); }

  /// Leaf reading `rows*cols` entries (row-major) starting at `offset`.
  Var parameter(std::span<const double> params, int offset, int rows, int cols);
  Var constant(Eigen::MatrixXd value);
  Var constant(double value);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var neg(Var a);
  Var scale(Var a, double c);
  Var shift(Var a, double c);
  Var square(Var a);
  Var tanh(Var a);
  Var sum(Var a);
  Var mean(Var a);

  /// W * X with `bias` (rows x 1) added to the first `value_cols` columns.
  Var affine(Var weights, Var input, Var bias, int value_cols);
  /// Elementwise tanh propagated through a batched jet of `layout`.
  Var jet_tanh(Var z, JetLayout layout);
  Var block(Var a, int row, int col, int rows, int cols);

  const Eigen::MatrixXd& value(Var v) const;

  /// d(loss)/d(parameters), flattened in the order parameter leaves index.
  /// Throws ContractError unless `loss` is a 1x1 node of this tape.
  Eigen::VectorXd gradient(Var loss) const;

  /// Recompute every node for a new parameter vector. Constants are kept.
  void replay(std::span<const double> params);

 private:
  enum class Op : std::uint8_t {
    kParam, kConst, kAdd, kSub, kMul, kDiv, kNeg, kScale, kShift, kSquare,
    kTanh, kSum, kMean, kAffine, kJetTanh, kBlock
  };

  struct Node {
    Op op = Op::kConst;
    std::array<int, 3> in{-1, -1, -1};
    double c = 0.0;
    std::array<int, 4> geom{0, 0, 0, 0};
    JetLayout layout;
    /// Depends on at least one parameter leaf.
    bool active = false;
    Eigen::MatrixXd value;
  };

  Var push(Node node);
  int own(Var v) const;
  void compute(Node& node);
  Var binary(Op op, Var a, Var b);
  Var unary(Op op, Var a, double c = 0.0);

  void forward_jet_tanh(Node& node) const;
  void backward_jet_tanh(const Node& node, const Eigen::MatrixXd& adj,
                         Eigen::MatrixXd& out) const;

  int num_parameters_;
  std::vector<Node> nodes_;
  std::span<const double> params_;
};

/// `grad_loss`: gradient of a scalar loss node w.r.t. all parameters.
inline Eigen::VectorXd grad_loss(const Tape& tape, Var loss) { return tape.gradient(loss); }

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var operator/(Var a, Var b);
Var operator-(Var a);
Var operator+(Var a, double c);
Var operator+(double c, Var a);
Var operator-(Var a, double c);
Var operator-(double c, Var a);
Var operator*(Var a, double c);
Var operator*(double c, Var a);
Var operator/(Var a, double c);
Var operator/(double c, Var a);

Var square(Var a);
Var tanh(Var a);
Var sum(Var a);
Var mean(Var a);

}  // namespace pinncal::ad
