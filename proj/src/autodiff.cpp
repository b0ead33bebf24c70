#include "debias/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "debias/error.hpp"

namespace debias {

namespace {

std::size_t shape_product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

[[noreturn]] void shape_fail(std::string_view op, const Shape& a,
                             const Shape& b) {
  throw UsageError(std::string(op) + ": shape mismatch " + shape_string(a) +
                   " vs " + shape_string(b));
}

[[noreturn]] void shape_fail(std::string_view op, const Shape& a,
                             std::string_view why) {
  throw UsageError(std::string(op) + ": " + std::string(why) + ", got " +
                   shape_string(a));
}

Tape& same_tape(std::string_view op, Var a, Var b) {
  if (&a.tape() != &b.tape()) {
    throw UsageError(std::string(op) + ": operands live on different tapes");
  }
  return a.tape();
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

// ---- Tensor ------------------------------------------------------------------

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)), data_(shape_product(shape_), 0.0) {
  if (shape_.size() > 2) {
    throw UsageError("tensor: rank > 2 unsupported, got " +
                     shape_string(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.size() > 2) {
    throw UsageError("tensor: rank > 2 unsupported, got " +
                     shape_string(shape_));
  }
  if (shape_product(shape_) != data_.size()) {
    throw UsageError("tensor: shape " + shape_string(shape_) + " needs " +
                     std::to_string(shape_product(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
}

Tensor Tensor::vector(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor(Shape{n}, std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> v) {
  return Tensor(Shape{rows, cols}, std::move(v));
}

std::size_t Tensor::rows() const noexcept {
  return shape_.size() == 2 ? shape_[0] : 1;
}

std::size_t Tensor::cols() const noexcept {
  if (shape_.empty()) return 1;
  return shape_.back();
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw UsageError("item: tensor " + shape_string(shape_) +
                     " is not a single value");
  }
  return data_[0];
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

// ---- ParamGroup ------------------------------------------------------------

std::string_view to_string(ParamGroup group) {
  switch (group) {
    case ParamGroup::kPremiseEncoder:
      return "theta_premise_enc";
    case ParamGroup::kHypothesisEncoder:
      return "theta_hyp_enc";
    case ParamGroup::kClassifier:
      return "theta_classifier";
    case ParamGroup::kHypothesisHead:
      return "phi_head";
  }
  return "?";
}

ParamGroup parse_param_group(std::string_view text) {
  for (auto g : {ParamGroup::kPremiseEncoder, ParamGroup::kHypothesisEncoder,
                 ParamGroup::kClassifier, ParamGroup::kHypothesisHead}) {
    if (to_string(g) == text) return g;
  }
  throw DataError("unknown parameter group '" + std::string(text) + "'");
}

// ---- Tape --------------------------------------------------------------------

const Tensor& Var::value() const { return tape_->value(index_); }

Var Tape::constant(Tensor value) {
  return record("constant", std::move(value), {}, nullptr);
}

Var Tape::param(const Parameter& p) {
  if (auto it = param_nodes_.find(p.id()); it != param_nodes_.end()) {
    return Var(this, it->second);
  }
  Var v = record("param", p.value, {}, nullptr);
  nodes_[v.index()].param = &p;
  param_nodes_[p.id()] = v.index();
  return v;
}

Var Tape::record(std::string_view op, Tensor value, std::vector<int> parents,
                 BackwardFn backward) {
  const int self = static_cast<int>(nodes_.size());
  for (int p : parents) {
    if (p < 0 || p >= self) {
      throw UsageError(std::string(op) + ": parent index out of order");
    }
  }
  nodes_.push_back(Node{std::string(op), std::move(value), std::move(parents),
                        std::move(backward), nullptr});
  return Var(this, self);
}

Tensor& Tape::accumulate(int node) {
  touched_[node] = 1;
  return grads_[node];
}

Gradients Tape::backward(Var root) {
  if (&root.tape() != this) {
    throw UsageError("backward: root belongs to another tape");
  }
  const Tensor& root_value = nodes_[root.index()].value;
  if (root_value.size() != 1) {
    throw UsageError("backward: root must be scalar, got " +
                     shape_string(root_value.shape()));
  }
  grads_.clear();
  grads_.reserve(nodes_.size());
  for (const Node& n : nodes_) grads_.push_back(Tensor::zeros_like(n.value));
  touched_.assign(nodes_.size(), 0);

  grads_[root.index()][0] = 1.0;
  touched_[root.index()] = 1;
  for (int i = root.index(); i >= 0; --i) {
    if (!touched_[i] || !nodes_[i].backward) continue;
    nodes_[i].backward(*this, i);
  }

  Gradients out;
  for (const auto& [id, node] : param_nodes_) out[id] = grads_[node];
  return out;
}

// ---- ops ---------------------------------------------------------------------

Var matmul(Var a, Var b) {
  Tape& tape = same_tape("matmul", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (bv.rank() != 2 || av.rank() == 0 || av.cols() != bv.rows()) {
    shape_fail("matmul", av.shape(), bv.shape());
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out(av.rank() == 1 ? Shape{n} : Shape{m, n});
  {
    const double* __restrict A = av.data().data();
    const double* __restrict B = bv.data().data();
    double* __restrict C = out.data().data();
    for (std::size_t i = 0; i < m; ++i) {
      double* __restrict crow = C + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double x = A[i * k + p];
        const double* __restrict brow = B + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += x * brow[j];
      }
    }
  }
  return tape.record(
      "matmul", std::move(out), {a.index(), b.index()},
      [ai = a.index(), bi = b.index(), m, k, n](Tape& t, int self) {
        const double* __restrict G = t.grad(self).data().data();
        const double* __restrict A = t.value(ai).data().data();
        const double* __restrict B = t.value(bi).data().data();
        {  // dA = G B^T
          double* __restrict GA = t.accumulate(ai).data().data();
          for (std::size_t i = 0; i < m; ++i) {
            const double* __restrict grow = G + i * n;
            for (std::size_t p = 0; p < k; ++p) {
              const double* __restrict brow = B + p * n;
              double s = 0.0;
              for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
              GA[i * k + p] += s;
            }
          }
        }
        {  // dB = A^T G
          double* __restrict GB = t.accumulate(bi).data().data();
          for (std::size_t i = 0; i < m; ++i) {
            const double* __restrict grow = G + i * n;
            for (std::size_t p = 0; p < k; ++p) {
              const double x = A[i * k + p];
              double* __restrict gbrow = GB + p * n;
              for (std::size_t j = 0; j < n; ++j) gbrow[j] += x * grow[j];
            }
          }
        }
      });
}

namespace {

enum class Binary { kAdd, kSub, kMul };

Var elementwise(std::string_view op, Binary kind, Var a, Var b) {
  Tape& tape = same_tape(op, a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const bool a_scalar = av.rank() == 0 && bv.rank() != 0;
  const bool b_scalar = bv.rank() == 0 && av.rank() != 0;
  if (!a_scalar && !b_scalar && av.shape() != bv.shape()) {
    shape_fail(op, av.shape(), bv.shape());
  }
  const Tensor& big = a_scalar ? bv : av;
  Tensor out = Tensor::zeros_like(big);
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = av[a_scalar ? 0 : i];
    const double y = bv[b_scalar ? 0 : i];
    switch (kind) {
      case Binary::kAdd: out[i] = x + y; break;
      case Binary::kSub: out[i] = x - y; break;
      case Binary::kMul: out[i] = x * y; break;
    }
  }
  return tape.record(
      op, std::move(out), {a.index(), b.index()},
      [ai = a.index(), bi = b.index(), kind, a_scalar, b_scalar, n](
          Tape& t, int self) {
        const Tensor& g = t.grad(self);
        const Tensor& av = t.value(ai);
        const Tensor& bv = t.value(bi);
        Tensor& ga = t.accumulate(ai);
        Tensor& gb = t.accumulate(bi);
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t ia = a_scalar ? 0 : i;
          const std::size_t ib = b_scalar ? 0 : i;
          switch (kind) {
            case Binary::kAdd:
              ga[ia] += g[i];
              gb[ib] += g[i];
              break;
            case Binary::kSub:
              ga[ia] += g[i];
              gb[ib] -= g[i];
              break;
            case Binary::kMul:
              ga[ia] += g[i] * bv[ib];
              gb[ib] += g[i] * av[ia];
              break;
          }
        }
      });
}

}  // namespace

Var add(Var a, Var b) { return elementwise("add", Binary::kAdd, a, b); }
Var sub(Var a, Var b) { return elementwise("sub", Binary::kSub, a, b); }
Var mul(Var a, Var b) { return elementwise("mul", Binary::kMul, a, b); }

Var abs(Var x) {
  const Tensor& xv = x.value();
  Tensor out = Tensor::zeros_like(xv);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::fabs(xv[i]);
  return x.tape().record("abs", std::move(out), {x.index()},
                         [xi = x.index()](Tape& t, int self) {
                           const Tensor& g = t.grad(self);
                           const Tensor& xv = t.value(xi);
                           Tensor& gx = t.accumulate(xi);
                           for (std::size_t i = 0; i < g.size(); ++i) {
                             const double s =
                                 xv[i] > 0.0 ? 1.0 : (xv[i] < 0.0 ? -1.0 : 0.0);
                             gx[i] += s * g[i];
                           }
                         });
}

Var tanh(Var x) {
  const Tensor& xv = x.value();
  Tensor out = Tensor::zeros_like(xv);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(xv[i]);
  return x.tape().record("tanh", std::move(out), {x.index()},
                         [xi = x.index()](Tape& t, int self) {
                           const Tensor& g = t.grad(self);
                           const Tensor& y = t.value(self);
                           Tensor& gx = t.accumulate(xi);
                           for (std::size_t i = 0; i < g.size(); ++i) {
                             gx[i] += g[i] * (1.0 - y[i] * y[i]);
                           }
                         });
}

Var scale(Var x, double factor) {
  const Tensor& xv = x.value();
  Tensor out = Tensor::zeros_like(xv);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * xv[i];
  return x.tape().record("scale", std::move(out), {x.index()},
                         [xi = x.index(), factor](Tape& t, int self) {
                           const Tensor& g = t.grad(self);
                           Tensor& gx = t.accumulate(xi);
                           for (std::size_t i = 0; i < g.size(); ++i) {
                             gx[i] += factor * g[i];
                           }
                         });
}

Var add_bias(Var x, Var bias) {
  Tape& tape = same_tape("add_bias", x, bias);
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  if (xv.rank() == 0 || bv.rank() != 1 || bv.size() != xv.cols()) {
    shape_fail("add_bias", xv.shape(), bv.shape());
  }
  const std::size_t rows = xv.rows(), cols = xv.cols();
  Tensor out = xv;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += bv[c];
  }
  return tape.record(
      "add_bias", std::move(out), {x.index(), bias.index()},
      [xi = x.index(), bi = bias.index(), rows, cols](Tape& t, int self) {
        const Tensor& g = t.grad(self);
        Tensor& gx = t.accumulate(xi);
        Tensor& gb = t.accumulate(bi);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            gx[r * cols + c] += g[r * cols + c];
            gb[c] += g[r * cols + c];
          }
        }
      });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw UsageError("concat: no operands");
  Tape& tape = parts.front().tape();
  const Tensor& first = parts.front().value();
  if (first.rank() == 0) shape_fail("concat", first.shape(), "rank-0 operand");
  const std::size_t rows = first.rows();
  std::vector<std::size_t> widths;
  std::vector<int> parents;
  std::size_t total = 0;
  for (const Var& p : parts) {
    same_tape("concat", parts.front(), p);
    const Tensor& v = p.value();
    if (v.rank() != first.rank() || v.rows() != rows) {
      shape_fail("concat", first.shape(), v.shape());
    }
    widths.push_back(v.cols());
    parents.push_back(p.index());
    total += v.cols();
  }
  Tensor out(first.rank() == 1 ? Shape{total} : Shape{rows, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& v = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(&v[r * widths[k]], widths[k], &out[r * total + offset]);
    }
    offset += widths[k];
  }
  auto pars = parents;
  return tape.record(
      "concat", std::move(out), std::move(pars),
      [parents, widths, rows, total](Tape& t, int self) {
        const Tensor& g = t.grad(self);
        std::size_t offset = 0;
        for (std::size_t k = 0; k < parents.size(); ++k) {
          Tensor& gp = t.accumulate(parents[k]);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < widths[k]; ++c) {
              gp[r * widths[k] + c] += g[r * total + offset + c];
            }
          }
          offset += widths[k];
        }
      });
}

Var vstack(const std::vector<Var>& parts) {
  if (parts.empty()) throw UsageError("vstack: no operands");
  Tape& tape = parts.front().tape();
  const std::size_t cols = parts.front().value().cols();
  std::vector<int> parents;
  std::vector<double> data;
  std::size_t rows = 0;
  for (const Var& p : parts) {
    same_tape("vstack", parts.front(), p);
    const Tensor& v = p.value();
    if (v.rank() == 0 || v.cols() != cols) {
      shape_fail("vstack", parts.front().value().shape(), v.shape());
    }
    parents.push_back(p.index());
    data.insert(data.end(), v.data().begin(), v.data().end());
    rows += v.rows();
  }
  auto pars = parents;
  return tape.record("vstack", Tensor(Shape{rows, cols}, std::move(data)),
                     std::move(pars), [parents](Tape& t, int self) {
                       const Tensor& g = t.grad(self);
                       std::size_t offset = 0;
                       for (int p : parents) {
                         Tensor& gp = t.accumulate(p);
                         for (std::size_t i = 0; i < gp.size(); ++i) {
                           gp[i] += g[offset + i];
                         }
                         offset += gp.size();
                       }
                     });
}

Var log_softmax(Var logits) {
  const Tensor& x = logits.value();
  if (x.rank() == 0) shape_fail("log_softmax", x.shape(), "rank-0 operand");
  const std::size_t rows = x.rows(), cols = x.cols();
  Tensor out = Tensor::zeros_like(x);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = &x[r * cols];
    const double mx = *std::max_element(row, row + cols);
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += std::exp(row[c] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = row[c] - lse;
  }
  return logits.tape().record(
      "log_softmax", std::move(out), {logits.index()},
      [xi = logits.index(), rows, cols](Tape& t, int self) {
        const Tensor& g = t.grad(self);
        const Tensor& y = t.value(self);
        Tensor& gx = t.accumulate(xi);
        for (std::size_t r = 0; r < rows; ++r) {
          double gs = 0.0;
          for (std::size_t c = 0; c < cols; ++c) gs += g[r * cols + c];
          for (std::size_t c = 0; c < cols; ++c) {
            gx[r * cols + c] += g[r * cols + c] - std::exp(y[r * cols + c]) * gs;
          }
        }
      });
}

Var nll(Var log_probs, std::span<const int> targets) {
  const Tensor& lp = log_probs.value();
  if (lp.rank() == 0 || targets.size() != lp.rows()) {
    throw UsageError("nll: " + std::to_string(targets.size()) +
                     " targets for log-probs " + shape_string(lp.shape()));
  }
  const std::size_t rows = lp.rows(), cols = lp.cols();
  std::vector<int> tgt(targets.begin(), targets.end());
  for (int y : tgt) {
    if (y < 0 || static_cast<std::size_t>(y) >= cols) {
      throw UsageError("nll: target " + std::to_string(y) + " outside " +
                       std::to_string(cols) + " classes");
    }
  }
  Tensor out(lp.rank() == 1 ? Shape{} : Shape{rows});
  for (std::size_t r = 0; r < rows; ++r) out[r] = -lp[r * cols + tgt[r]];
  return log_probs.tape().record(
      "nll", std::move(out), {log_probs.index()},
      [li = log_probs.index(), tgt = std::move(tgt), cols](Tape& t, int self) {
        const Tensor& g = t.grad(self);
        Tensor& gl = t.accumulate(li);
        for (std::size_t r = 0; r < tgt.size(); ++r) {
          gl[r * cols + tgt[r]] -= g[r];
        }
      });
}

Var sum(Var x) {
  const Tensor& xv = x.value();
  double s = 0.0;
  for (double v : xv.data()) s += v;
  return x.tape().record("sum", Tensor::scalar(s), {x.index()},
                         [xi = x.index()](Tape& t, int self) {
                           const double g = t.grad(self)[0];
                           Tensor& gx = t.accumulate(xi);
                           for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
                         });
}

Var mean(Var x) {
  const Tensor& xv = x.value();
  const double n = static_cast<double>(xv.size());
  double s = 0.0;
  for (double v : xv.data()) s += v;
  return x.tape().record("mean", Tensor::scalar(s / n), {x.index()},
                         [xi = x.index(), n](Tape& t, int self) {
                           const double g = t.grad(self)[0] / n;
                           Tensor& gx = t.accumulate(xi);
                           for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
                         });
}

Var embedding_bag(Var table, std::span<const std::span<const int>> bags,
                  bool average) {
  const Tensor& tv = table.value();
  if (tv.rank() != 2) shape_fail("embedding_bag", tv.shape(), "table must be rank 2");
  const std::size_t vocab = tv.rows(), dim = tv.cols();
  // Flattened copy for the backward closure: offsets[i]..offsets[i+1].
  std::vector<std::size_t> offsets(bags.size() + 1, 0);
  for (std::size_t i = 0; i < bags.size(); ++i) {
    offsets[i + 1] = offsets[i] + bags[i].size();
  }
  std::vector<int> flat;
  flat.reserve(offsets.back());
  Tensor out(Shape{bags.size(), dim});
  for (std::size_t i = 0; i < bags.size(); ++i) {
    if (bags[i].empty()) throw UsageError("embedding_bag: empty bag at row " + std::to_string(i));
    double* orow = &out[i * dim];
    for (int tok : bags[i]) {
      if (tok < 0 || static_cast<std::size_t>(tok) >= vocab) {
        throw UsageError("embedding_bag: index " + std::to_string(tok) +
                         " outside table " + shape_string(tv.shape()));
      }
      flat.push_back(tok);
      const double* erow = &tv[tok * dim];
      for (std::size_t c = 0; c < dim; ++c) orow[c] += erow[c];
    }
    if (average) {
      const double len = static_cast<double>(bags[i].size());
      for (std::size_t c = 0; c < dim; ++c) orow[c] /= len;
    }
  }
  return table.tape().record(
      "embedding_bag", std::move(out), {table.index()},
      [ti = table.index(), offsets = std::move(offsets), flat = std::move(flat),
       average, dim](Tape& t, int self) {
        const Tensor& g = t.grad(self);
        Tensor& gt = t.accumulate(ti);
        for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
          const double w =
              average ? 1.0 / static_cast<double>(offsets[i + 1] - offsets[i]) : 1.0;
          const double* grow = &g[i * dim];
          for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
            double* trow = &gt[static_cast<std::size_t>(flat[k]) * dim];
            for (std::size_t c = 0; c < dim; ++c) {
              trow[c] += average ? grow[c] * w : grow[c];
            }
          }
        }
      });
}

Var embedding_bag(Var table, const std::vector<std::vector<int>>& bags,
                  bool average) {
  std::vector<std::span<const int>> views(bags.begin(), bags.end());
  return embedding_bag(table, std::span<const std::span<const int>>(views), average);
}

Var grad_scale(Var x, double factor) {
  return x.tape().record("grad_scale", x.value(), {x.index()},
                         [xi = x.index(), factor](Tape& t, int self) {
                           const Tensor& g = t.grad(self);
                           Tensor& gx = t.accumulate(xi);
                           for (std::size_t i = 0; i < g.size(); ++i) {
                             gx[i] += factor * g[i];
                           }
                         });
}

Var grad_reverse(Var x, double scale) {
  if (!(scale >= 0.0)) {
    throw UsageError("grad_reverse: scale must be non-negative, got " +
                     std::to_string(scale));
  }
  const double factor = -scale;
  return x.tape().record("grad_reverse", x.value(), {x.index()},
                         [xi = x.index(), factor](Tape& t, int self) {
                           const Tensor& g = t.grad(self);
                           Tensor& gx = t.accumulate(xi);
                           for (std::size_t i = 0; i < g.size(); ++i) {
                             gx[i] += factor * g[i];
                           }
                         });
}

Var grad_block(Var x) {
  return x.tape().record("grad_block", x.value(), {x.index()}, nullptr);
}

// ---- gradient checking ---------------------------------------------------------

GradCheckResult finite_diff_check(const std::function<double()>& objective,
                                  std::span<Parameter* const> params,
                                  const Gradients& analytic, double epsilon) {
  if (!(epsilon > 0.0)) {
    throw UsageError("finite_diff_check: epsilon must be positive");
  }
  GradCheckResult worst;
  double diff_sq = 0.0, an_sq = 0.0, num_sq = 0.0;
  for (Parameter* p : params) {
    auto it = analytic.find(p->id());
    const Tensor* a = it == analytic.end() ? nullptr : &it->second;
    if (a && a->shape() != p->value.shape()) {
      shape_fail("finite_diff_check", a->shape(), p->value.shape());
    }
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + epsilon;
      const double up = objective();
      p->value[i] = saved - epsilon;
      const double down = objective();
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double an = a ? (*a)[i] : 0.0;
      diff_sq += (an - numeric) * (an - numeric);
      an_sq += an * an;
      num_sq += numeric * numeric;
      const double rel = std::fabs(an - numeric) /
                         std::max(1e-12, std::fabs(an) + std::fabs(numeric));
      if (rel > worst.max_coord_rel_error || worst.param_id < 0) {
        worst.max_coord_rel_error = rel;
        worst.param_id = p->id();
        worst.index = i;
        worst.analytic = an;
        worst.numeric = numeric;
      }
    }
  }
  worst.rel_error = std::sqrt(diff_sq) /
                    std::max(1e-12, std::sqrt(an_sq) + std::sqrt(num_sq));
  return worst;
}

GradCheckResult finite_diff_check(const LossBuilder& build,
                                  std::span<Parameter* const> params,
                                  double epsilon) {
  Gradients analytic;
  {
    Tape tape;
    Var root = build(tape);
    analytic = tape.backward(root);
  }
  auto objective = [&build] {
    Tape tape;
    return build(tape).value().item();
  };
  return finite_diff_check(objective, params, analytic, epsilon);
}

}  // namespace debias
