#pragma once

// Minimal reverse-mode differentiation over dense row-major matrices.
//
// A Tape records every operation's forward value together with a pullback
// closure. backward() walks the tape in reverse creation order, which is a
// valid topological order because inputs always precede their outputs.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace seqjsp::ad {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

struct Var {
  int id = -1;
  bool valid() const noexcept { return id >= 0; }
};

/// Running statistics of one batch-normalization layer.
template <typename T>
struct BatchNormStats {
  RowVector<T> mean;
  RowVector<T> var;

  friend bool operator==(const BatchNormStats& a, const BatchNormStats& b) {
    return a.mean.size() == b.mean.size() && a.var.size() == b.var.size() && a.mean == b.mean && a.var == b.var;
  }
};

/// Train: batch statistics, running stats updated.
/// TrainFrozen: batch statistics, running stats untouched.
/// Inference: running statistics.
enum class NormMode { Train, TrainFrozen, Inference };

template <typename T>
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const noexcept { return record_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var leaf(Matrix<T> value, bool requires_grad) { return push(std::move(value), requires_grad && record_, {}); }
  Var constant(Matrix<T> value) { return push(std::move(value), false, {}); }

  const Matrix<T>& value(Var v) const { return nodes_[idx(v)].value; }
  bool has_grad(Var v) const { return nodes_[idx(v)].grad.size() != 0; }

  Matrix<T> grad(Var v) const {
    const auto& n = nodes_[idx(v)];
    if (n.grad.size() != 0) return n.grad;
    return Matrix<T>::Zero(n.value.rows(), n.value.cols());
  }

  /// Seeds d(root) = 1 (root must be 1x1) and propagates.
  void backward(Var root) {
    const auto& r = nodes_[idx(root)];
    if (r.value.rows() != 1 || r.value.cols() != 1) throw std::logic_error("backward root must be a scalar");
    backward(root, Matrix<T>::Ones(1, 1));
  }

  void backward(Var root, const Matrix<T>& seed) {
    if (!record_) throw std::logic_error("backward on a non-recording tape");
    for (auto& n : nodes_) n.grad.resize(0, 0);
    acc(root.id, seed);
    for (int id = root.id; id >= 0; --id) {
      auto& n = nodes_[static_cast<std::size_t>(id)];
      if (n.needs_grad && n.grad.size() != 0 && n.pullback) n.pullback();
    }
  }

  // ---------------------------------------------------------------- ops

  /// x W (+ b), b a 1 x cols row broadcast over rows.
  Var linear(Var x, Var w, Var b = {}) {
    Matrix<T> y;
    y.noalias() = value(x) * value(w);
    if (b.valid()) y.rowwise() += value(b).row(0);
    const bool ng = any_grad({x, w, b});
    return push(std::move(y), ng, [this, x, w, b, id = next_id()] {
      const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
      if (wants(x)) acc(x.id, g * value(w).transpose());
      if (wants(w)) acc(w.id, value(x).transpose() * g);
      if (b.valid() && wants(b)) acc(b.id, g.colwise().sum());
    });
  }

  Var add(Var a, Var b) {
    Matrix<T> y = value(a) + value(b);
    return push(std::move(y), any_grad({a, b}), [this, a, b, id = next_id()] {
      const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
      if (wants(a)) acc(a.id, g);
      if (wants(b)) acc(b.id, g);
    });
  }

  /// a (r x c) + row (1 x c) broadcast.
  Var add_row(Var a, Var row) {
    Matrix<T> y = value(a);
    y.rowwise() += value(row).row(0);
    return push(std::move(y), any_grad({a, row}), [this, a, row, id = next_id()] {
      const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
      if (wants(a)) acc(a.id, g);
      if (wants(row)) acc(row.id, g.colwise().sum());
    });
  }

  Var mul(Var a, Var b) {
    Matrix<T> y = value(a).cwiseProduct(value(b));
    return push(std::move(y), any_grad({a, b}), [this, a, b, id = next_id()] {
      const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
      if (wants(a)) acc(a.id, g.cwiseProduct(value(b)));
      if (wants(b)) acc(b.id, g.cwiseProduct(value(a)));
    });
  }

  Var one_minus(Var a) {
    Matrix<T> y = (T(1) - value(a).array()).matrix();
    return push(std::move(y), any_grad({a}), [this, a, id = next_id()] {
      if (wants(a)) acc(a.id, -nodes_[static_cast<std::size_t>(id)].grad);
    });
  }

  Var tanh(Var a) {
    Matrix<T> y = value(a).array().tanh().matrix();
    return push(std::move(y), any_grad({a}), [this, a, id = next_id()] {
      const auto& n = nodes_[static_cast<std::size_t>(id)];
      if (wants(a)) acc(a.id, (n.grad.array() * (T(1) - n.value.array().square())).matrix());
    });
  }

  Var sigmoid(Var a) {
    Matrix<T> y = (T(1) / (T(1) + (-value(a).array()).exp())).matrix();
    return push(std::move(y), any_grad({a}), [this, a, id = next_id()] {
      const auto& n = nodes_[static_cast<std::size_t>(id)];
      if (wants(a)) acc(a.id, (n.grad.array() * n.value.array() * (T(1) - n.value.array())).matrix());
    });
  }

  Var relu(Var a) {
    Matrix<T> y = value(a).cwiseMax(T(0));
    return push(std::move(y), any_grad({a}), [this, a, id = next_id()] {
      const auto& n = nodes_[static_cast<std::size_t>(id)];
      if (wants(a)) acc(a.id, (n.value.array() > T(0)).select(n.grad.array(), T(0)).matrix());
    });
  }

  /// Column-wise normalization over all rows, then gamma/beta affine.
  /// `running` is read in Inference mode; `update` receives the running-average
  /// update in Train mode (may be null).
  Var batch_norm(Var x, Var gamma, Var beta, NormMode mode, const BatchNormStats<T>* running,
                 BatchNormStats<T>* update = nullptr, T momentum = T(0.1), T eps = T(1e-5)) {
    const auto& xv = value(x);
    const auto rows = static_cast<T>(xv.rows());
    RowVector<T> mean;
    RowVector<T> var;
    if (mode == NormMode::Inference) {
      if (!running) throw std::logic_error("inference batch norm needs running statistics");
      mean = running->mean;
      var = running->var;
    } else {
      mean = xv.colwise().mean();
      var = (xv.rowwise() - mean).array().square().colwise().mean().matrix();
      if (mode == NormMode::Train && update) {
        const T unbias = xv.rows() > 1 ? rows / (rows - T(1)) : T(1);
        update->mean = (T(1) - momentum) * update->mean + momentum * mean;
        update->var = (T(1) - momentum) * update->var + momentum * unbias * var;
      }
    }
    auto inv = std::make_shared<RowVector<T>>((var.array() + eps).rsqrt().matrix());
    auto xhat = std::make_shared<Matrix<T>>(((xv.rowwise() - mean).array().rowwise() * inv->array()).matrix());
    Matrix<T> y = (xhat->array().rowwise() * value(gamma).row(0).array()).matrix();
    y.rowwise() += value(beta).row(0);
    const bool batch_stats = mode != NormMode::Inference;
    return push(std::move(y), any_grad({x, gamma, beta}), [this, x, gamma, beta, inv, xhat, batch_stats, id = next_id()] {
      const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
      if (wants(gamma)) acc(gamma.id, g.cwiseProduct(*xhat).colwise().sum());
      if (wants(beta)) acc(beta.id, g.colwise().sum());
      if (!wants(x)) return;
      Matrix<T> gxhat = (g.array().rowwise() * value(gamma).row(0).array()).matrix();
      if (!batch_stats) {
        acc(x.id, (gxhat.array().rowwise() * inv->array()).matrix());
        return;
      }
      const auto r = static_cast<T>(g.rows());
      RowVector<T> sum_g = gxhat.colwise().sum();
      RowVector<T> sum_gx = gxhat.cwiseProduct(*xhat).colwise().sum();
      Matrix<T> gx = gxhat * r;
      gx.rowwise() -= sum_g;
      gx -= (xhat->array().rowwise() * sum_gx.array()).matrix();
      gx = (gx.array().rowwise() * (inv->array() / r)).matrix();
      acc(x.id, gx);
    });
  }

  /// Multi-head scaled dot-product attention applied independently to each
  /// consecutive block of `block` rows. q, k, v: (blocks*block) x d.
  Var attention(Var q, Var k, Var v, int heads, int block) {
    const auto& Q = value(q);
    const auto& K = value(k);
    const auto& V = value(v);
    const int d = static_cast<int>(Q.cols());
    const int dk = d / heads;
    const int blocks = static_cast<int>(Q.rows()) / block;
    const T scale = T(1) / std::sqrt(static_cast<T>(dk));
    auto probs = std::make_shared<std::vector<Matrix<T>>>(static_cast<std::size_t>(blocks * heads));
    Matrix<T> out(Q.rows(), d);
    for (int b = 0; b < blocks; ++b) {
      for (int h = 0; h < heads; ++h) {
        auto& P = (*probs)[static_cast<std::size_t>(b * heads + h)];
        P.noalias() = Q.block(b * block, h * dk, block, dk) * K.block(b * block, h * dk, block, dk).transpose();
        P *= scale;
        for (int r = 0; r < block; ++r) {
          auto row = P.row(r);
          row = (row.array() - row.maxCoeff()).exp().matrix();
          row /= row.sum();
        }
        out.block(b * block, h * dk, block, dk).noalias() = P * V.block(b * block, h * dk, block, dk);
      }
    }
    return push(std::move(out), any_grad({q, k, v}), [this, q, k, v, heads, block, blocks, dk, scale, probs,
                                                      id = next_id()] {
      const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
      const auto& Q = value(q);
      const auto& K = value(k);
      const auto& V = value(v);
      Matrix<T> gq = Matrix<T>::Zero(Q.rows(), Q.cols());
      Matrix<T> gk = Matrix<T>::Zero(K.rows(), K.cols());
      Matrix<T> gv = Matrix<T>::Zero(V.rows(), V.cols());
      Matrix<T> dP;
      for (int b = 0; b < blocks; ++b) {
        for (int h = 0; h < heads; ++h) {
          const auto& P = (*probs)[static_cast<std::size_t>(b * heads + h)];
          const auto gO = g.block(b * block, h * dk, block, dk);
          gv.block(b * block, h * dk, block, dk).noalias() = P.transpose() * gO;
          dP.noalias() = gO * V.block(b * block, h * dk, block, dk).transpose();
          Eigen::Matrix<T, Eigen::Dynamic, 1> dot = dP.cwiseProduct(P).rowwise().sum();
          dP = (P.array() * (dP.colwise() - dot).array()).matrix() * scale;
          gq.block(b * block, h * dk, block, dk).noalias() = dP * K.block(b * block, h * dk, block, dk);
          gk.block(b * block, h * dk, block, dk).noalias() = dP.transpose() * Q.block(b * block, h * dk, block, dk);
        }
      }
      if (wants(q)) acc(q.id, gq);
      if (wants(k)) acc(k.id, gk);
      if (wants(v)) acc(v.id, gv);
    });
  }

  /// Mean of each consecutive block of rows: (blocks*block) x c -> blocks x c.
  Var block_mean(Var x, int block) {
    const auto& X = value(x);
    const auto blocks = X.rows() / block;
    Matrix<T> y(blocks, X.cols());
    for (Eigen::Index b = 0; b < blocks; ++b) y.row(b) = X.middleRows(b * block, block).colwise().mean();
    return push(std::move(y), any_grad({x}), [this, x, block, id = next_id()] {
      const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
      Matrix<T> gx(g.rows() * block, g.cols());
      for (Eigen::Index b = 0; b < g.rows(); ++b)
        gx.middleRows(b * block, block).rowwise() = g.row(b) / static_cast<T>(block);
      acc(x.id, gx);
    });
  }

  Var gather_rows(Var x, std::vector<int> rows) {
    const auto& X = value(x);
    Matrix<T> y(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) y.row(static_cast<Eigen::Index>(r)) = X.row(rows[r]);
    return push(std::move(y), any_grad({x}), [this, x, rows = std::move(rows), id = next_id()] {
      const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
      const auto& X = value(x);
      Matrix<T> gx = Matrix<T>::Zero(X.rows(), X.cols());
      for (std::size_t r = 0; r < rows.size(); ++r) gx.row(rows[r]) += g.row(static_cast<Eigen::Index>(r));
      acc(x.id, gx);
    });
  }

  /// 1 x c row repeated n times.
  Var broadcast_row(Var row, int n) {
    Matrix<T> y = value(row).replicate(n, 1);
    return push(std::move(y), any_grad({row}), [this, row, id = next_id()] {
      acc(row.id, nodes_[static_cast<std::size_t>(id)].grad.colwise().sum());
    });
  }

  /// Pointer attention with masking and log-softmax fused.
  ///
  /// For lane l with instance b = lane_block[l] and every row p where
  /// selectable[l*block + p] != 0:
  ///   u_p = v . tanh(keys[b*block + p] + query[l])   (optionally clip*tanh(u_p))
  /// Output (lanes x block): log softmax of u over selectable rows, -inf elsewhere.
  /// Only selectable rows are evaluated.
  Var pointer_log_softmax(Var keys, Var query, Var v, std::vector<int> lane_block, int block,
                          const std::vector<std::uint8_t>& selectable, std::optional<T> clip) {
    const auto& A = value(keys);
    const auto& S = value(query);
    const auto& vv = value(v);
    const auto lanes = static_cast<Eigen::Index>(lane_block.size());
    constexpr T kNegInf = -std::numeric_limits<T>::infinity();
    Matrix<T> out = Matrix<T>::Constant(lanes, block, kNegInf);
    const RowVector<T> vrow = vv.col(0).transpose();
    RowVector<T> e;
    for (Eigen::Index l = 0; l < lanes; ++l) {
      const auto base = static_cast<Eigen::Index>(lane_block[static_cast<std::size_t>(l)]) * block;
      T hi = kNegInf;
      for (int p = 0; p < block; ++p) {
        if (!selectable[static_cast<std::size_t>(l * block + p)]) continue;
        e = (A.row(base + p) + S.row(l)).array().tanh().matrix();
        T u = e.cwiseProduct(vrow).sum();
        if (clip) u = *clip * std::tanh(u);
        out(l, p) = u;
        hi = std::max(hi, u);
      }
      if (hi == kNegInf) throw std::logic_error("pointer attention: every row is masked");
      T total = 0;
      for (int p = 0; p < block; ++p)
        if (out(l, p) != kNegInf) total += std::exp(out(l, p) - hi);
      const T lse = hi + std::log(total);
      for (int p = 0; p < block; ++p)
        if (out(l, p) != kNegInf) out(l, p) -= lse;
    }
    return push(std::move(out), any_grad({keys, query, v}),
                [this, keys, query, v, lane_block = std::move(lane_block), block, clip, id = next_id()] {
                  const auto& node = nodes_[static_cast<std::size_t>(id)];
                  const auto& g = node.grad;
                  const auto& logp = node.value;
                  const auto& A = value(keys);
                  const auto& S = value(query);
                  const auto& vv = value(v);
                  constexpr T kNegInf = -std::numeric_limits<T>::infinity();
                  const RowVector<T> vrow = vv.col(0).transpose();
                  Matrix<T> gA = Matrix<T>::Zero(A.rows(), A.cols());
                  Matrix<T> gS = Matrix<T>::Zero(S.rows(), S.cols());
                  Matrix<T> gv = Matrix<T>::Zero(vv.rows(), vv.cols());
                  RowVector<T> e;
                  RowVector<T> dz;
                  for (Eigen::Index l = 0; l < g.rows(); ++l) {
                    T gsum = 0;
                    for (int p = 0; p < block; ++p)
                      if (logp(l, p) != kNegInf) gsum += g(l, p);
                    const auto base = static_cast<Eigen::Index>(lane_block[static_cast<std::size_t>(l)]) * block;
                    for (int p = 0; p < block; ++p) {
                      if (logp(l, p) == kNegInf) continue;
                      T du = g(l, p) - std::exp(logp(l, p)) * gsum;
                      if (du == T(0)) continue;
                      e = (A.row(base + p) + S.row(l)).array().tanh().matrix();
                      if (clip) {
                        const T t = std::tanh(e.cwiseProduct(vrow).sum());
                        du *= *clip * (T(1) - t * t);
                      }
                      gv.col(0) += du * e.transpose();
                      dz = ((du * vrow).array() * (T(1) - e.array().square())).matrix();
                      gA.row(base + p) += dz;
                      gS.row(l) += dz;
                    }
                  }
                  if (wants(keys)) acc(keys.id, gA);
                  if (wants(query)) acc(query.id, gS);
                  if (wants(v)) acc(v.id, gv);
                });
  }

  /// out(l, 0) = x(l, cols[l]).
  Var pick(Var x, std::vector<int> cols) {
    const auto& X = value(x);
    Matrix<T> y(X.rows(), 1);
    for (Eigen::Index l = 0; l < X.rows(); ++l) y(l, 0) = X(l, cols[static_cast<std::size_t>(l)]);
    return push(std::move(y), any_grad({x}), [this, x, cols = std::move(cols), id = next_id()] {
      const auto& g = nodes_[static_cast<std::size_t>(id)].grad;
      const auto& X = value(x);
      Matrix<T> gx = Matrix<T>::Zero(X.rows(), X.cols());
      for (Eigen::Index l = 0; l < X.rows(); ++l) gx(l, cols[static_cast<std::size_t>(l)]) = g(l, 0);
      acc(x.id, gx);
    });
  }

  /// sum_l w_l x(l, 0), a 1x1 result.
  Var weighted_sum(Var x, std::vector<T> weights) {
    const auto& X = value(x);
    Matrix<T> y(1, 1);
    y(0, 0) = 0;
    for (Eigen::Index l = 0; l < X.rows(); ++l) y(0, 0) += weights[static_cast<std::size_t>(l)] * X(l, 0);
    return push(std::move(y), any_grad({x}), [this, x, weights = std::move(weights), id = next_id()] {
      const T g = nodes_[static_cast<std::size_t>(id)].grad(0, 0);
      Matrix<T> gx(static_cast<Eigen::Index>(weights.size()), 1);
      for (std::size_t l = 0; l < weights.size(); ++l) gx(static_cast<Eigen::Index>(l), 0) = g * weights[l];
      acc(x.id, gx);
    });
  }

 private:
  struct Node {
    Matrix<T> value;
    Matrix<T> grad;
    std::function<void()> pullback;
    bool needs_grad = false;
  };

  std::size_t idx(Var v) const {
    if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) throw std::out_of_range("invalid tape variable");
    return static_cast<std::size_t>(v.id);
  }

  int next_id() const noexcept { return static_cast<int>(nodes_.size()); }

  bool wants(Var v) const { return v.valid() && nodes_[static_cast<std::size_t>(v.id)].needs_grad; }

  bool any_grad(std::initializer_list<Var> vars) const {
    if (!record_) return false;
    for (auto v : vars)
      if (wants(v)) return true;
    return false;
  }

  Var push(Matrix<T> value, bool needs_grad, std::function<void()> pullback) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    if (needs_grad) n.pullback = std::move(pullback);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  template <typename Expr>
  void acc(int id, const Expr& g) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) n.grad = g;
    else n.grad += g;
  }

  bool record_;
  std::vector<Node> nodes_;
};

}  // namespace seqjsp::ad
