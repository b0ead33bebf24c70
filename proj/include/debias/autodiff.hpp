#pragma once

// Minimal tape-based reverse-mode automatic differentiation over dense
// row-major 64-bit tensors of rank 0, 1 or 2.
//
// Besides the usual arithmetic the tape offers two gradient-routing nodes:
//   grad_reverse(x, s)  identity forward, backward multiplies by -s
//   grad_block(x)       identity forward, backward passes nothing
// which is all the debiasing objectives need to express "ascend this term"
// and "do not update that encoder".

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace debias {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

class Tensor {
 public:
  Tensor() : shape_{}, data_(1, 0.0) {}
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(Shape{}, {v}); }
  static Tensor vector(std::vector<double> v);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> v);
  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  // Rank-2 view: a vector is one row, a scalar is 1x1.
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  const double& operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const {
    return data_[r * cols() + c];
  }

  // Value of a one-element tensor.
  double item() const;
  bool all_finite() const noexcept;

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

enum class ParamGroup {
  kPremiseEncoder,
  kHypothesisEncoder,
  kClassifier,
  kHypothesisHead,
};

std::string_view to_string(ParamGroup group);
ParamGroup parse_param_group(std::string_view text);
// Everything except the hypothesis-only head belongs to theta.
inline bool is_theta(ParamGroup group) {
  return group != ParamGroup::kHypothesisHead;
}

class Parameter {
 public:
  Parameter(int id, std::string name, ParamGroup group, Tensor value)
      : value(std::move(value)),
        id_(id),
        name_(std::move(name)),
        group_(group) {}

  int id() const noexcept { return id_; }
  const std::string& name() const noexcept { return name_; }
  ParamGroup group() const noexcept { return group_; }

  Tensor value;

 private:
  int id_;
  std::string name_;
  ParamGroup group_;
};

// Gradient per parameter id.
using Gradients = std::map<int, Tensor>;

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int index) : tape_(tape), index_(index) {}

  Tape& tape() const { return *tape_; }
  int index() const noexcept { return index_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  Tape* tape_ = nullptr;
  int index_ = -1;
};

class Tape {
 public:
  // Propagates the node's accumulated gradient into its parents.
  using BackwardFn = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf for a parameter. Registering the same parameter twice returns the
  // same node, so all uses accumulate into one gradient.
  Var param(const Parameter& p);

  Var record(std::string_view op, Tensor value, std::vector<int> parents,
             BackwardFn backward);

  std::size_t size() const noexcept { return nodes_.size(); }
  const Tensor& value(int node) const { return nodes_[node].value; }
  const std::vector<int>& parents(int node) const {
    return nodes_[node].parents;
  }
  std::string_view op(int node) const { return nodes_[node].op; }

  // Gradient of the last backward() root w.r.t. this node. Nodes the root
  // does not depend on (or reaches only through grad_block) read zero.
  const Tensor& grad(int node) const { return grads_.at(node); }
  // For op implementations: mutable accumulator of a parent during backward.
  Tensor& accumulate(int node);

  // Reverse sweep from a one-element root. Accumulators are reset on every
  // call; a node used several times sums its contributions.
  Gradients backward(Var root);

 private:
  struct Node {
    std::string op;
    Tensor value;
    std::vector<int> parents;
    BackwardFn backward;
    const Parameter* param = nullptr;
  };

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  std::vector<char> touched_;
  std::map<int, int> param_nodes_;  // parameter id -> node index
};

// ---- forward ops ---------------------------------------------------------
// All ops throw Error(kUsage) naming the op and operand shapes on mismatch.

// (m x k)(k x n) -> (m x n); a rank-1 left operand (k) gives (n).
Var matmul(Var a, Var b);
// Elementwise; a rank-0 operand is broadcast against the other.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var abs(Var x);
Var tanh(Var x);
Var scale(Var x, double factor);
// Adds a length-n bias to every row of an (m x n) matrix (or to an n-vector).
Var add_bias(Var x, Var bias);
// Concatenation along the last axis; rank-2 operands must share row count.
Var concat(const std::vector<Var>& parts);
// Stacks rank-1 vectors or rank-2 blocks with equal column counts.
Var vstack(const std::vector<Var>& parts);
// Row-wise log-softmax along the last axis.
Var log_softmax(Var logits);
// -logp[i, target_i] per row; a rank-1 input gives a scalar.
Var nll(Var log_probs, std::span<const int> targets);
Var sum(Var x);
Var mean(Var x);
// Row i = sum (or mean) of table rows listed in bags[i]. Table is (V x d).
Var embedding_bag(Var table, std::span<const std::span<const int>> bags,
                  bool average);
Var embedding_bag(Var table, const std::vector<std::vector<int>>& bags,
                  bool average);

// ---- gradient routing ------------------------------------------------------

// Identity forward; backward multiplies the upstream gradient by `factor`.
Var grad_scale(Var x, double factor);
// Identity forward; parent receives -scale * upstream. Requires scale >= 0.
Var grad_reverse(Var x, double scale);
// Identity forward; parent receives no gradient.
Var grad_block(Var x);

// ---- gradient checking ----------------------------------------------------

struct GradCheckResult {
  // |a - n| / max(1e-12, |a| + |n|) with a, n the analytic and numeric
  // gradients of all checked parameters as one vector (2-norms).
  double rel_error = 0.0;
  // Same ratio for the worst single coordinate. Coordinates whose gradient
  // is near the difference quotient's rounding floor (~1e-11 in double at
  // eps = 1e-5) can show large values here without anything being wrong.
  double max_coord_rel_error = 0.0;
  int param_id = -1;  // worst coordinate
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central differences (f(p+eps) - f(p-eps)) / 2eps per coordinate against
// `analytic` (missing ids count as zero gradients). Parameters are perturbed
// in place and restored. `objective` must be deterministic in the parameter
// values; anything else makes the comparison meaningless.
GradCheckResult finite_diff_check(const std::function<double()>& objective,
                                  std::span<Parameter* const> params,
                                  const Gradients& analytic, double epsilon);

using LossBuilder = std::function<Var(Tape&)>;

// Convenience form: the analytic side comes from backward() on the built
// loss, the numeric side from re-running its forward pass.
GradCheckResult finite_diff_check(const LossBuilder& build,
                                  std::span<Parameter* const> params,
                                  double epsilon);

}  // namespace debias
