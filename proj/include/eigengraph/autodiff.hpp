#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "matrix.hpp"
#include "rng.hpp"
#include "sampling.hpp"

namespace eg {

// Reverse-mode tape over the fixed operation set the network needs. Values
// are evaluated eagerly as ops are recorded; backward replays the record in
// reverse and accumulates exact adjoints. One tape per forward pass, confined
// to one thread.
class Tape {
 public:
  using NodeId = std::size_t;

  // Leaf that never receives a gradient (input features, recipe blocks).
  NodeId constant(Matrix value) {
    return push(Node{Op::Leaf}, std::move(value), false);
  }

  // Leaf that accumulates a gradient (trainable parameters).
  NodeId leaf(Matrix value) { return push(Node{Op::Leaf}, std::move(value), true); }

  // x [n,a] * w [a,b] -> [n,b]
  NodeId linear(NodeId x, NodeId w) {
    const Matrix& xv = value(x);
    const Matrix& wv = value(w);
    if (xv.cols != wv.rows)
      throw invalid_argument("linear: shape mismatch (x cols=" + std::to_string(xv.cols) +
                             ", w rows=" + std::to_string(wv.rows) + ")");
    Node n{Op::Linear};
    n.inputs = {x, w};
    return push(std::move(n), matmul(xv, wv), requires_grad(x) || requires_grad(w));
  }

  // x [n,c] + row vector b [1,c] broadcast over rows
  NodeId bias_add(NodeId x, NodeId b) {
    const Matrix& xv = value(x);
    const Matrix& bv = value(b);
    if (bv.rows != 1 || bv.cols != xv.cols)
      throw invalid_argument("bias_add: bias shape [" + std::to_string(bv.rows) + "," +
                             std::to_string(bv.cols) + "] does not broadcast over [" +
                             std::to_string(xv.rows) + "," + std::to_string(xv.cols) + "]");
    Matrix out = xv;
    for (std::size_t r = 0; r < out.rows; ++r)
      for (std::size_t c = 0; c < out.cols; ++c) out(r, c) += bv(0, c);
    Node n{Op::BiasAdd};
    n.inputs = {x, b};
    return push(std::move(n), std::move(out), requires_grad(x) || requires_grad(b));
  }

  NodeId relu(NodeId x) {
    Matrix out = value(x);
    for (double& v : out.v) v = std::max(v, 0.0);
    Node n{Op::Relu};
    n.inputs = {x};
    return push(std::move(n), std::move(out), requires_grad(x));
  }

  NodeId subtract(NodeId a, NodeId b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (!av.same_shape(bv))
      throw invalid_argument("subtract: shape mismatch ([" + std::to_string(av.rows) + "," +
                             std::to_string(av.cols) + "] vs [" + std::to_string(bv.rows) +
                             "," + std::to_string(bv.cols) + "])");
    Matrix out = av;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] -= bv.v[i];
    Node n{Op::Subtract};
    n.inputs = {a, b};
    return push(std::move(n), std::move(out), requires_grad(a) || requires_grad(b));
  }

  NodeId concat_cols(const std::vector<NodeId>& parts) {
    if (parts.empty()) throw invalid_argument("concat_cols: no inputs");
    const std::size_t rows = value(parts[0]).rows;
    std::size_t cols = 0;
    bool grad = false;
    for (NodeId p : parts) {
      if (value(p).rows != rows)
        throw invalid_argument("concat_cols: row mismatch (" + std::to_string(value(p).rows) +
                               " vs " + std::to_string(rows) + ")");
      cols += value(p).cols;
      grad = grad || requires_grad(p);
    }
    Matrix out(rows, cols);
    std::size_t offset = 0;
    for (NodeId p : parts) {
      const Matrix& pv = value(p);
      for (std::size_t r = 0; r < rows; ++r)
        std::copy(pv.row(r).begin(), pv.row(r).end(), out.row(r).begin() + std::ptrdiff_t(offset));
      offset += pv.cols;
    }
    Node n{Op::ConcatCols};
    n.inputs = parts;
    return push(std::move(n), std::move(out), grad);
  }

  // Output row r = input row indices[r]; backward scatter-adds.
  NodeId gather_rows(NodeId x, std::vector<std::size_t> indices) {
    const Matrix& xv = value(x);
    for (std::size_t idx : indices)
      if (idx >= xv.rows)
        throw invalid_argument("gather_rows: index " + std::to_string(idx) +
                               " out of range for " + std::to_string(xv.rows) + " rows");
    Matrix out(indices.size(), xv.cols);
    for (std::size_t r = 0; r < indices.size(); ++r)
      std::copy(xv.row(indices[r]).begin(), xv.row(indices[r]).end(), out.row(r).begin());
    Node n{Op::GatherRows};
    n.inputs = {x};
    n.indices = std::move(indices);
    return push(std::move(n), std::move(out), requires_grad(x));
  }

  // Componentwise max over consecutive groups of `group` rows. The gradient
  // routes solely to the argmax winner; exact ties go to the lowest row.
  NodeId max_pool_rows(NodeId x, std::size_t group) {
    const Matrix& xv = value(x);
    if (group == 0 || xv.rows % group != 0)
      throw invalid_argument("max_pool_rows: rows (" + std::to_string(xv.rows) +
                             ") not divisible into groups of " + std::to_string(group));
    const std::size_t out_rows = xv.rows / group;
    Matrix out(out_rows, xv.cols);
    std::vector<std::size_t> winners(out_rows * xv.cols);
    for (std::size_t g = 0; g < out_rows; ++g)
      for (std::size_t c = 0; c < xv.cols; ++c) {
        std::size_t best = g * group;
        double best_v = xv(best, c);
        for (std::size_t r = g * group + 1; r < (g + 1) * group; ++r)
          if (xv(r, c) > best_v) {
            best_v = xv(r, c);
            best = r;
          }
        out(g, c) = best_v;
        winners[g * xv.cols + c] = best;
      }
    Node n{Op::MaxPoolRows};
    n.inputs = {x};
    n.group = group;
    n.indices = std::move(winners);
    return push(std::move(n), std::move(out), requires_grad(x));
  }

  // Mean over consecutive groups of `group` rows.
  NodeId mean_pool_rows(NodeId x, std::size_t group) {
    const Matrix& xv = value(x);
    if (group == 0 || xv.rows % group != 0)
      throw invalid_argument("mean_pool_rows: rows (" + std::to_string(xv.rows) +
                             ") not divisible into groups of " + std::to_string(group));
    const std::size_t out_rows = xv.rows / group;
    Matrix out(out_rows, xv.cols);
    for (std::size_t g = 0; g < out_rows; ++g) {
      for (std::size_t r = g * group; r < (g + 1) * group; ++r)
        for (std::size_t c = 0; c < xv.cols; ++c) out(g, c) += xv(r, c);
      for (std::size_t c = 0; c < xv.cols; ++c) out(g, c) /= double(group);
    }
    Node n{Op::MeanPoolRows};
    n.inputs = {x};
    n.group = group;
    return push(std::move(n), std::move(out), requires_grad(x));
  }

  // Inverted dropout with an explicit seed; rate 0 is the identity.
  NodeId dropout(NodeId x, double rate, std::uint64_t seed) {
    if (rate < 0.0 || rate >= 1.0)
      throw invalid_argument("dropout: rate must be in [0, 1) (rate=" + std::to_string(rate) +
                             ")");
    const Matrix& xv = value(x);
    Matrix mask(xv.rows, xv.cols, 1.0);
    if (rate > 0.0) {
      Rng rng(seed);
      const double keep_scale = 1.0 / (1.0 - rate);
      for (double& m : mask.v) m = rng.uniform() < rate ? 0.0 : keep_scale;
    }
    Matrix out = xv;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] *= mask.v[i];
    Node n{Op::Dropout};
    n.inputs = {x};
    n.aux = std::move(mask);
    return push(std::move(n), std::move(out), requires_grad(x));
  }

  // Inverse-distance interpolation of rows through a fixed plan; the plan is
  // a constant of the forward pass.
  NodeId interp_rows(NodeId x, std::shared_ptr<const InterpolationPlan> plan) {
    const Matrix& xv = value(x);
    Matrix out = interpolate(*plan, xv);
    Node n{Op::InterpRows};
    n.inputs = {x};
    n.plan = std::move(plan);
    return push(std::move(n), std::move(out), requires_grad(x));
  }

  // Mean over rows of -log softmax(logits)[label]. Returns a 1x1 scalar.
  NodeId softmax_cross_entropy(NodeId logits, std::vector<int> labels) {
    const Matrix& lv = value(logits);
    if (labels.size() != lv.rows)
      throw invalid_argument("softmax_cross_entropy: " + std::to_string(labels.size()) +
                             " labels for " + std::to_string(lv.rows) + " rows");
    for (int lbl : labels)
      if (lbl < 0 || std::size_t(lbl) >= lv.cols)
        throw invalid_argument("softmax_cross_entropy: label " + std::to_string(lbl) +
                               " out of range for " + std::to_string(lv.cols) + " classes");
    Matrix softmax(lv.rows, lv.cols);
    double loss = 0.0;
    for (std::size_t r = 0; r < lv.rows; ++r) {
      double hi = lv(r, 0);
      for (std::size_t c = 1; c < lv.cols; ++c) hi = std::max(hi, lv(r, c));
      double z = 0.0;
      for (std::size_t c = 0; c < lv.cols; ++c) z += std::exp(lv(r, c) - hi);
      const double log_z = std::log(z);
      for (std::size_t c = 0; c < lv.cols; ++c)
        softmax(r, c) = std::exp(lv(r, c) - hi) / z;
      loss += log_z - (lv(r, std::size_t(labels[r])) - hi);
    }
    Matrix out(1, 1);
    out(0, 0) = loss / double(lv.rows);
    Node n{Op::SoftmaxCrossEntropy};
    n.inputs = {logits};
    n.labels = std::move(labels);
    n.aux = std::move(softmax);
    return push(std::move(n), std::move(out), requires_grad(logits));
  }

  const Matrix& value(NodeId id) const { return values_[id]; }
  bool requires_grad(NodeId id) const { return nodes_[id].requires_grad; }

  // Gradient of the most recent backward() root with respect to node `id`.
  // Zero-shaped for nodes the gradient never reached.
  const Matrix& grad(NodeId id) const { return grads_[id]; }

  // Seeds d(root)/d(root) = 1 and accumulates adjoints for every node that
  // requires a gradient. Root must be a 1x1 scalar.
  void backward(NodeId root) {
    const Matrix& rv = value(root);
    if (rv.rows != 1 || rv.cols != 1)
      throw invalid_argument("backward: root must be a 1x1 scalar, got [" +
                             std::to_string(rv.rows) + "," + std::to_string(rv.cols) + "]");
    grads_.assign(nodes_.size(), Matrix{});
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].requires_grad) grads_[i] = Matrix(values_[i].rows, values_[i].cols);
    if (!nodes_[root].requires_grad) return;
    grads_[root](0, 0) = 1.0;

    for (std::size_t id = root + 1; id-- > 0;) {
      const Node& n = nodes_[id];
      if (!n.requires_grad || n.op == Op::Leaf) continue;
      const Matrix& gy = grads_[id];
      switch (n.op) {
        case Op::Linear: {
          const NodeId x = n.inputs[0], w = n.inputs[1];
          if (requires_grad(x)) {
            // gx += gy * w^T
            const Matrix wt = transpose(values_[w]);
            accumulate(grads_[x], matmul(gy, wt));
          }
          if (requires_grad(w)) {
            const Matrix xt = transpose(values_[x]);
            accumulate(grads_[w], matmul(xt, gy));
          }
          break;
        }
        case Op::BiasAdd: {
          const NodeId x = n.inputs[0], b = n.inputs[1];
          if (requires_grad(x)) accumulate(grads_[x], gy);
          if (requires_grad(b)) {
            Matrix& gb = grads_[b];
            for (std::size_t r = 0; r < gy.rows; ++r)
              for (std::size_t c = 0; c < gy.cols; ++c) gb(0, c) += gy(r, c);
          }
          break;
        }
        case Op::Relu: {
          const NodeId x = n.inputs[0];
          if (!requires_grad(x)) break;
          Matrix& gx = grads_[x];
          const Matrix& xv = values_[x];
          for (std::size_t i = 0; i < gy.v.size(); ++i)
            if (xv.v[i] > 0.0) gx.v[i] += gy.v[i];
          break;
        }
        case Op::Subtract: {
          const NodeId a = n.inputs[0], b = n.inputs[1];
          if (requires_grad(a)) accumulate(grads_[a], gy);
          if (requires_grad(b)) {
            Matrix& gb = grads_[b];
            for (std::size_t i = 0; i < gy.v.size(); ++i) gb.v[i] -= gy.v[i];
          }
          break;
        }
        case Op::ConcatCols: {
          std::size_t offset = 0;
          for (NodeId p : n.inputs) {
            const std::size_t w = values_[p].cols;
            if (requires_grad(p)) {
              Matrix& gp = grads_[p];
              for (std::size_t r = 0; r < gy.rows; ++r)
                for (std::size_t c = 0; c < w; ++c) gp(r, c) += gy(r, offset + c);
            }
            offset += w;
          }
          break;
        }
        case Op::GatherRows: {
          const NodeId x = n.inputs[0];
          if (!requires_grad(x)) break;
          Matrix& gx = grads_[x];
          for (std::size_t r = 0; r < n.indices.size(); ++r) {
            double* dst = gx.v.data() + n.indices[r] * gx.cols;
            const double* src = gy.v.data() + r * gy.cols;
            for (std::size_t c = 0; c < gy.cols; ++c) dst[c] += src[c];
          }
          break;
        }
        case Op::MaxPoolRows: {
          const NodeId x = n.inputs[0];
          if (!requires_grad(x)) break;
          Matrix& gx = grads_[x];
          for (std::size_t g = 0; g < gy.rows; ++g)
            for (std::size_t c = 0; c < gy.cols; ++c)
              gx(n.indices[g * gy.cols + c], c) += gy(g, c);
          break;
        }
        case Op::MeanPoolRows: {
          const NodeId x = n.inputs[0];
          if (!requires_grad(x)) break;
          Matrix& gx = grads_[x];
          const double inv = 1.0 / double(n.group);
          for (std::size_t g = 0; g < gy.rows; ++g)
            for (std::size_t r = g * n.group; r < (g + 1) * n.group; ++r)
              for (std::size_t c = 0; c < gy.cols; ++c) gx(r, c) += gy(g, c) * inv;
          break;
        }
        case Op::Dropout: {
          const NodeId x = n.inputs[0];
          if (!requires_grad(x)) break;
          Matrix& gx = grads_[x];
          for (std::size_t i = 0; i < gy.v.size(); ++i) gx.v[i] += gy.v[i] * n.aux.v[i];
          break;
        }
        case Op::InterpRows: {
          const NodeId x = n.inputs[0];
          if (!requires_grad(x)) break;
          Matrix& gx = grads_[x];
          const InterpolationPlan& plan = *n.plan;
          for (std::size_t t = 0; t < gy.rows; ++t)
            for (std::size_t j = 0; j < 3; ++j) {
              const double w = plan.weights(t, j);
              double* dst = gx.v.data() + plan.sources.at(t, j) * gx.cols;
              const double* src = gy.v.data() + t * gy.cols;
              for (std::size_t c = 0; c < gy.cols; ++c) dst[c] += w * src[c];
            }
          break;
        }
        case Op::SoftmaxCrossEntropy: {
          const NodeId x = n.inputs[0];
          if (!requires_grad(x)) break;
          Matrix& gx = grads_[x];
          const double g0 = gy(0, 0) / double(n.aux.rows);
          for (std::size_t r = 0; r < n.aux.rows; ++r)
            for (std::size_t c = 0; c < n.aux.cols; ++c) {
              const double onehot = (std::size_t(n.labels[r]) == c) ? 1.0 : 0.0;
              gx(r, c) += g0 * (n.aux(r, c) - onehot);
            }
          break;
        }
        case Op::Leaf:
          break;
      }
    }
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op {
    Leaf,
    Linear,
    BiasAdd,
    Relu,
    Subtract,
    ConcatCols,
    GatherRows,
    MaxPoolRows,
    MeanPoolRows,
    Dropout,
    InterpRows,
    SoftmaxCrossEntropy,
  };

  struct Node {
    Op op;
    std::vector<NodeId> inputs;
    std::size_t group = 0;
    std::vector<std::size_t> indices;
    std::shared_ptr<const InterpolationPlan> plan;
    std::vector<int> labels;
    Matrix aux;
    bool requires_grad = false;
  };

  NodeId push(Node n, Matrix value, bool grad) {
    n.requires_grad = grad;
    nodes_.push_back(std::move(n));
    values_.push_back(std::move(value));
    grads_.emplace_back();
    return nodes_.size() - 1;
  }

  static void accumulate(Matrix& into, const Matrix& delta) {
    for (std::size_t i = 0; i < into.v.size(); ++i) into.v[i] += delta.v[i];
  }

  std::vector<Node> nodes_;
  std::vector<Matrix> values_;
  std::vector<Matrix> grads_;
};

// Named trainable arrays plus per-parameter optimizer state. Names are
// unique and shapes fixed at creation.
class ParamStore {
 public:
  struct Entry {
    Matrix value;
    Matrix opt_m;  // Adam first moment / SGD velocity
    Matrix opt_v;  // Adam second moment
    std::size_t steps = 0;
  };

  Matrix& create(const std::string& name, std::size_t rows, std::size_t cols) {
    auto [it, inserted] = entries_.try_emplace(name);
    if (!inserted) throw invalid_argument("ParamStore: duplicate parameter '" + name + "'");
    it->second.value = Matrix(rows, cols);
    return it->second.value;
  }

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  Matrix& at(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end())
      throw invalid_argument("ParamStore: unknown parameter '" + name + "'");
    return it->second.value;
  }
  const Matrix& at(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end())
      throw invalid_argument("ParamStore: unknown parameter '" + name + "'");
    return it->second.value;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, entry] : entries_) out.push_back(name);
    return out;
  }

  std::size_t total_scalars() const {
    std::size_t n = 0;
    for (const auto& [name, entry] : entries_) n += entry.value.size();
    return n;
  }

  std::map<std::string, Entry>& entries() { return entries_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  std::map<std::string, Entry> entries_;  // ordered: deterministic iteration
};

using GradMap = std::map<std::string, Matrix>;

struct OptimizerConfig {
  enum class Kind { Adam, SgdMomentum };
  Kind kind = Kind::Adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double momentum = 0.9;
};

inline void apply_update(ParamStore& params, const GradMap& grads, const OptimizerConfig& opt) {
  for (auto& [name, entry] : params.entries()) {
    auto git = grads.find(name);
    if (git == grads.end() || git->second.v.empty()) continue;
    const Matrix& g = git->second;
    if (!g.same_shape(entry.value))
      throw invalid_argument("apply_update: gradient shape mismatch for '" + name + "'");
    if (entry.opt_m.v.empty()) {
      entry.opt_m = Matrix(entry.value.rows, entry.value.cols);
      entry.opt_v = Matrix(entry.value.rows, entry.value.cols);
    }
    if (opt.kind == OptimizerConfig::Kind::Adam) {
      entry.steps += 1;
      const double bc1 = 1.0 - std::pow(opt.beta1, double(entry.steps));
      const double bc2 = 1.0 - std::pow(opt.beta2, double(entry.steps));
      for (std::size_t i = 0; i < g.v.size(); ++i) {
        entry.opt_m.v[i] = opt.beta1 * entry.opt_m.v[i] + (1.0 - opt.beta1) * g.v[i];
        entry.opt_v.v[i] = opt.beta2 * entry.opt_v.v[i] + (1.0 - opt.beta2) * g.v[i] * g.v[i];
        const double mhat = entry.opt_m.v[i] / bc1;
        const double vhat = entry.opt_v.v[i] / bc2;
        entry.value.v[i] -= opt.lr * mhat / (std::sqrt(vhat) + opt.eps);
      }
    } else {
      for (std::size_t i = 0; i < g.v.size(); ++i) {
        entry.opt_m.v[i] = opt.momentum * entry.opt_m.v[i] + g.v[i];
        entry.value.v[i] -= opt.lr * entry.opt_m.v[i];
      }
    }
  }
}

// Scalar loss plus batch diagnostics.
struct LossValue {
  double loss = 0.0;
  double accuracy = 0.0;
};

// Per-sample forward/backward result consumed by train_step.
struct SampleGrad {
  double loss = 0.0;
  bool correct = false;
  GradMap grads;
};

// Runs the per-sample closure over a batch, averages the gradients in sample
// order, applies one optimizer update in place, and returns the pre-update
// mean loss. `step_index` only labels divergence errors.
inline LossValue train_step(std::size_t batch_size,
                            const std::function<SampleGrad(std::size_t)>& sample_fn,
                            ParamStore& params, const OptimizerConfig& opt,
                            std::size_t step_index = 0) {
  if (batch_size == 0) throw invalid_argument("train_step: batch_size must be >= 1");
  GradMap total;
  LossValue lv;
  for (std::size_t s = 0; s < batch_size; ++s) {
    SampleGrad sg = sample_fn(s);
    if (!std::isfinite(sg.loss))
      throw numeric_error("train_step: non-finite loss, training diverged", step_index);
    lv.loss += sg.loss;
    lv.accuracy += sg.correct ? 1.0 : 0.0;
    for (auto& [name, g] : sg.grads) {
      auto [it, inserted] = total.try_emplace(name, std::move(g));
      if (!inserted)
        for (std::size_t i = 0; i < it->second.v.size(); ++i) it->second.v[i] += g.v[i];
    }
  }
  const double inv = 1.0 / double(batch_size);
  lv.loss *= inv;
  lv.accuracy *= inv;
  for (auto& [name, g] : total)
    for (double& x : g.v) x *= inv;
  apply_update(params, total, opt);
  return lv;
}

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> params;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

// Central-difference verification of a backprop gradient. `loss_fn` must be a
// deterministic pure function of the parameter values (fixed dropout masks,
// fixed data); two baseline evaluations guard that contract.
inline GradCheckReport grad_check(ParamStore& params,
                                  const std::function<double(const ParamStore&)>& loss_fn,
                                  const std::function<GradMap(const ParamStore&)>& grad_fn,
                                  double tolerance, double step = 1e-5) {
  const double base1 = loss_fn(params);
  const double base2 = loss_fn(params);
  if (!(base1 == base2))
    throw contract_violation("grad_check: forward is not deterministic (" +
                             std::to_string(base1) + " vs " + std::to_string(base2) + ")");
  const GradMap analytic = grad_fn(params);

  GradCheckReport report;
  report.tolerance = tolerance;
  for (auto& [name, entry] : params.entries()) {
    GradCheckEntry pe{name, 0.0};
    auto ait = analytic.find(name);
    for (std::size_t i = 0; i < entry.value.v.size(); ++i) {
      const double saved = entry.value.v[i];
      entry.value.v[i] = saved + step;
      const double up = loss_fn(params);
      entry.value.v[i] = saved - step;
      const double down = loss_fn(params);
      entry.value.v[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      const double ad = (ait != analytic.end() && !ait->second.v.empty()) ? ait->second.v[i] : 0.0;
      const double denom = std::max({std::abs(fd), std::abs(ad), 1e-6});
      pe.max_rel_err = std::max(pe.max_rel_err, std::abs(fd - ad) / denom);
    }
    report.max_rel_err = std::max(report.max_rel_err, pe.max_rel_err);
    report.params.push_back(std::move(pe));
  }
  report.passed = report.max_rel_err < tolerance;
  return report;
}

}  // namespace eg
