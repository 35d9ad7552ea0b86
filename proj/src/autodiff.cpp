// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include "freedom/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace freedom::diff {

namespace {

std::string shape_of(const Tensor& t) { return t.shape_string(); }

}  // namespace

int Graph::push(Tensor val, std::function<void(Graph&, const Node&)> back) {
  Node n;
  n.val = std::move(val);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

std::vector<double>& Graph::adj_of(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.adj.empty()) n.adj.assign(n.val.size(), 0.0);
  return n.adj;
}

const Graph::Node& Graph::node(Var v) const {
  if (v.graph != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
    throw ContractError("var does not belong to this graph");
  return nodes_[static_cast<std::size_t>(v.id)];
}

void Graph::check_same_shape(Var a, Var b, const char* op) const {
  const Tensor& ta = node(a).val;
  const Tensor& tb = node(b).val;
  if (!ta.same_shape(tb))
    throw ContractError(std::string(op) + ": shape mismatch " + shape_of(ta) + " vs " + shape_of(tb));
}

Var Graph::param(Tensor& t) {
  const int id = push(t, nullptr);
  nodes_.back().bound = &t;
  return {this, id};
}

Var Graph::constant(const Tensor& t) { return {this, push(t, nullptr)}; }

Var Graph::constant(double v) { return {this, push(Tensor::scalar(v), nullptr)}; }

const Tensor& Graph::value(Var v) const { return node(v).val; }

double Graph::scalar(Var v) const {
  const Tensor& t = node(v).val;
  if (t.size() != 1) throw ContractError("scalar() on non-scalar node " + shape_of(t));
  return t[0];
}

std::vector<double> Graph::adjoint(Var v) const {
  const Node& n = node(v);
  if (n.adj.empty()) return std::vector<double>(n.val.size(), 0.0);
  return n.adj;
}

void Graph::backward(Var loss) {
  const Node& ln = node(loss);
  if (ln.val.size() != 1)
    throw ContractError("backward requires a scalar loss, got " + shape_of(ln.val));
  if (backward_done_) throw ContractError("backward already run on this graph");
  backward_done_ = true;

  adj_of(loss.id)[0] = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.adj.empty()) continue;  // unreachable from the loss
    if (n.back) n.back(*this, n);
    if (n.bound != nullptr) {
      std::vector<double>& g = n.bound->grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.adj[i];
    }
  }
}

// ---- elementwise ----

Var Graph::add(Var a, Var b) {
  check_same_shape(a, b, "add");
  Tensor out = node(a).val;
  const Tensor& tb = node(b).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += tb[i];
  const int ia = a.id, ib = b.id;
  return {this, push(std::move(out), [ia, ib](Graph& g, const Node& self) {
            auto& ga = g.adj_of(ia);
            auto& gb = g.adj_of(ib);
            for (std::size_t i = 0; i < self.adj.size(); ++i) {
              ga[i] += self.adj[i];
              gb[i] += self.adj[i];
            }
          })};
}

Var Graph::sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  Tensor out = node(a).val;
  const Tensor& tb = node(b).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= tb[i];
  const int ia = a.id, ib = b.id;
  return {this, push(std::move(out), [ia, ib](Graph& g, const Node& self) {
            auto& ga = g.adj_of(ia);
            auto& gb = g.adj_of(ib);
            for (std::size_t i = 0; i < self.adj.size(); ++i) {
              ga[i] += self.adj[i];
              gb[i] -= self.adj[i];
            }
          })};
}

Var Graph::mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  Tensor out = node(a).val;
  const Tensor& tb = node(b).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= tb[i];
  const int ia = a.id, ib = b.id;
  return {this, push(std::move(out), [ia, ib](Graph& g, const Node& self) {
            const auto& va = g.nodes_[ia].val;
            const auto& vb = g.nodes_[ib].val;
            auto& ga = g.adj_of(ia);
            auto& gb = g.adj_of(ib);
            for (std::size_t i = 0; i < self.adj.size(); ++i) {
              ga[i] += self.adj[i] * vb[i];
              gb[i] += self.adj[i] * va[i];
            }
          })};
}

Var Graph::div(Var a, Var b) {
  check_same_shape(a, b, "div");
  Tensor out = node(a).val;
  const Tensor& tb = node(b).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= tb[i];
  const int ia = a.id, ib = b.id;
  return {this, push(std::move(out), [ia, ib](Graph& g, const Node& self) {
            const auto& va = g.nodes_[ia].val;
            const auto& vb = g.nodes_[ib].val;
            auto& ga = g.adj_of(ia);
            auto& gb = g.adj_of(ib);
            for (std::size_t i = 0; i < self.adj.size(); ++i) {
              ga[i] += self.adj[i] / vb[i];
              gb[i] -= self.adj[i] * va[i] / (vb[i] * vb[i]);
            }
          })};
}

Var Graph::neg(Var a) { return scale(a, -1.0); }

Var Graph::add_scalar(Var a, double c) {
  Tensor out = node(a).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += c;
  const int ia = a.id;
  return {this, push(std::move(out), [ia](Graph& g, const Node& self) {
            auto& ga = g.adj_of(ia);
            for (std::size_t i = 0; i < self.adj.size(); ++i) ga[i] += self.adj[i];
          })};
}

Var Graph::scale(Var a, double c) {
  Tensor out = node(a).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
  const int ia = a.id;
  return {this, push(std::move(out), [ia, c](Graph& g, const Node& self) {
            auto& ga = g.adj_of(ia);
            for (std::size_t i = 0; i < self.adj.size(); ++i) ga[i] += c * self.adj[i];
          })};
}

Var Graph::tanh_(Var a) {
  Tensor out = node(a).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  const int ia = a.id, io = static_cast<int>(nodes_.size());
  return {this, push(std::move(out), [ia, io](Graph& g, const Node& self) {
            const auto& vo = g.nodes_[io].val;
            auto& ga = g.adj_of(ia);
            for (std::size_t i = 0; i < self.adj.size(); ++i)
              ga[i] += self.adj[i] * (1.0 - vo[i] * vo[i]);
          })};
}

Var Graph::relu(Var a) {
  Tensor out = node(a).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  const int ia = a.id;
  return {this, push(std::move(out), [ia](Graph& g, const Node& self) {
            const auto& va = g.nodes_[ia].val;
            auto& ga = g.adj_of(ia);
            for (std::size_t i = 0; i < self.adj.size(); ++i)
              if (va[i] > 0.0) ga[i] += self.adj[i];
          })};
}

Var Graph::leaky_relu(Var a, double slope) {
  Tensor out = node(a).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : slope * out[i];
  const int ia = a.id;
  return {this, push(std::move(out), [ia, slope](Graph& g, const Node& self) {
            const auto& va = g.nodes_[ia].val;
            auto& ga = g.adj_of(ia);
            for (std::size_t i = 0; i < self.adj.size(); ++i)
              ga[i] += self.adj[i] * (va[i] > 0.0 ? 1.0 : slope);
          })};
}

Var Graph::exp_(Var a) {
  Tensor out = node(a).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
  const int ia = a.id, io = static_cast<int>(nodes_.size());
  return {this, push(std::move(out), [ia, io](Graph& g, const Node& self) {
            const auto& vo = g.nodes_[io].val;
            auto& ga = g.adj_of(ia);
            for (std::size_t i = 0; i < self.adj.size(); ++i) ga[i] += self.adj[i] * vo[i];
          })};
}

Var Graph::log_(Var a) {
  Tensor out = node(a).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(out[i]);
  const int ia = a.id;
  return {this, push(std::move(out), [ia](Graph& g, const Node& self) {
            const auto& va = g.nodes_[ia].val;
            auto& ga = g.adj_of(ia);
            for (std::size_t i = 0; i < self.adj.size(); ++i) ga[i] += self.adj[i] / va[i];
          })};
}

Var Graph::clamp(Var a, double lo, double hi) {
  Tensor out = node(a).val;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(std::max(out[i], lo), hi);
  const int ia = a.id;
  return {this, push(std::move(out), [ia, lo, hi](Graph& g, const Node& self) {
            const auto& va = g.nodes_[ia].val;
            auto& ga = g.adj_of(ia);
            for (std::size_t i = 0; i < self.adj.size(); ++i)
              if (va[i] >= lo && va[i] <= hi) ga[i] += self.adj[i];
          })};
}

// ---- broadcasting ----

Var Graph::add_rowwise(Var x, Var v) {
  const Tensor& tx = node(x).val;
  const Tensor& tv = node(v).val;
  if (tv.rows() != 1 || tv.cols() != tx.cols())
    throw ContractError("add_rowwise: want [1," + std::to_string(tx.cols()) + "], got " + shape_of(tv));
  Tensor out = tx;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out.at(r, c) += tv[c];
  const int ix = x.id, iv = v.id;
  return {this, push(std::move(out), [ix, iv](Graph& g, const Node& self) {
            auto& gx = g.adj_of(ix);
            auto& gv = g.adj_of(iv);
            const std::size_t cols = self.val.cols();
            for (std::size_t i = 0; i < self.adj.size(); ++i) {
              gx[i] += self.adj[i];
              gv[i % cols] += self.adj[i];
            }
          })};
}

Var Graph::mul_rowwise(Var x, Var v) {
  const Tensor& tx = node(x).val;
  const Tensor& tv = node(v).val;
  if (tv.rows() != 1 || tv.cols() != tx.cols())
    throw ContractError("mul_rowwise: want [1," + std::to_string(tx.cols()) + "], got " + shape_of(tv));
  Tensor out = tx;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out.at(r, c) *= tv[c];
  const int ix = x.id, iv = v.id;
  return {this, push(std::move(out), [ix, iv](Graph& g, const Node& self) {
            const auto& vx = g.nodes_[ix].val;
            const auto& vv = g.nodes_[iv].val;
            auto& gx = g.adj_of(ix);
            auto& gv = g.adj_of(iv);
            const std::size_t cols = self.val.cols();
            for (std::size_t i = 0; i < self.adj.size(); ++i) {
              gx[i] += self.adj[i] * vv[i % cols];
              gv[i % cols] += self.adj[i] * vx[i];
            }
          })};
}

// ---- structure ----

Var Graph::matmul(Var x, Var w) {
  const Tensor& tx = node(x).val;
  const Tensor& tw = node(w).val;
  if (tx.cols() != tw.rows())
    throw ContractError("matmul: inner dimensions " + shape_of(tx) + " x " + shape_of(tw));
  Tensor out(tx.rows(), tw.cols());
  for (std::size_t n = 0; n < tx.rows(); ++n)
    for (std::size_t i = 0; i < tx.cols(); ++i) {
      const double xv = tx.at(n, i);
      if (xv == 0.0) continue;
      for (std::size_t o = 0; o < tw.cols(); ++o) out.at(n, o) += xv * tw.at(i, o);
    }
  const int ix = x.id, iw = w.id;
  return {this, push(std::move(out), [ix, iw](Graph& g, const Node& self) {
            const Tensor& vx = g.nodes_[ix].val;
            const Tensor& vw = g.nodes_[iw].val;
            auto& gx = g.adj_of(ix);
            auto& gw = g.adj_of(iw);
            const std::size_t N = vx.rows(), I = vx.cols(), O = vw.cols();
            for (std::size_t n = 0; n < N; ++n)
              for (std::size_t o = 0; o < O; ++o) {
                const double a = self.adj[n * O + o];
                if (a == 0.0) continue;
                for (std::size_t i = 0; i < I; ++i) {
                  gx[n * I + i] += a * vw.at(i, o);
                  gw[i * O + o] += a * vx.at(n, i);
                }
              }
          })};
}

Var Graph::sum_all(Var a) {
  const Tensor& ta = node(a).val;
  double s = 0.0;
  for (std::size_t i = 0; i < ta.size(); ++i) s += ta[i];
  const int ia = a.id;
  return {this, push(Tensor::scalar(s), [ia](Graph& g, const Node& self) {
            auto& ga = g.adj_of(ia);
            for (double& v : ga) v += self.adj[0];
          })};
}

Var Graph::mean_all(Var a) {
  return scale(sum_all(a), 1.0 / static_cast<double>(node(a).val.size()));
}

Var Graph::concat_cols(Var a, Var b) {
  const Tensor& ta = node(a).val;
  const Tensor& tb = node(b).val;
  if (ta.rows() != tb.rows())
    throw ContractError("concat_cols: row mismatch " + shape_of(ta) + " vs " + shape_of(tb));
  Tensor out(ta.rows(), ta.cols() + tb.cols());
  for (std::size_t r = 0; r < ta.rows(); ++r) {
    for (std::size_t c = 0; c < ta.cols(); ++c) out.at(r, c) = ta.at(r, c);
    for (std::size_t c = 0; c < tb.cols(); ++c) out.at(r, ta.cols() + c) = tb.at(r, c);
  }
  const int ia = a.id, ib = b.id;
  const std::size_t ca = ta.cols();
  return {this, push(std::move(out), [ia, ib, ca](Graph& g, const Node& self) {
            auto& ga = g.adj_of(ia);
            auto& gb = g.adj_of(ib);
            const std::size_t rows = self.val.rows(), cols = self.val.cols(), cb = cols - ca;
            for (std::size_t r = 0; r < rows; ++r) {
              for (std::size_t c = 0; c < ca; ++c) ga[r * ca + c] += self.adj[r * cols + c];
              for (std::size_t c = 0; c < cb; ++c) gb[r * cb + c] += self.adj[r * cols + ca + c];
            }
          })};
}

Var Graph::slice_cols(Var a, std::size_t from, std::size_t to) {
  const Tensor& ta = node(a).val;
  if (from >= to || to > ta.cols())
    throw ContractError("slice_cols: range [" + std::to_string(from) + "," + std::to_string(to) +
                        ") out of " + shape_of(ta));
  Tensor out(ta.rows(), to - from);
  for (std::size_t r = 0; r < ta.rows(); ++r)
    for (std::size_t c = from; c < to; ++c) out.at(r, c - from) = ta.at(r, c);
  const int ia = a.id;
  const std::size_t src_cols = ta.cols();
  return {this, push(std::move(out), [ia, from, src_cols](Graph& g, const Node& self) {
            auto& ga = g.adj_of(ia);
            const std::size_t rows = self.val.rows(), cols = self.val.cols();
            for (std::size_t r = 0; r < rows; ++r)
              for (std::size_t c = 0; c < cols; ++c)
                ga[r * src_cols + from + c] += self.adj[r * cols + c];
          })};
}

Var Graph::gather_rows(Var a, std::vector<std::size_t> idx) {
  const Tensor& ta = node(a).val;
  for (std::size_t i : idx)
    if (i >= ta.rows()) throw ContractError("gather_rows: row index out of range");
  Tensor out(idx.size(), ta.cols());
  for (std::size_t n = 0; n < idx.size(); ++n)
    for (std::size_t c = 0; c < ta.cols(); ++c) out.at(n, c) = ta.at(idx[n], c);
  const int ia = a.id;
  return {this, push(std::move(out), [ia, idx = std::move(idx)](Graph& g, const Node& self) {
            auto& ga = g.adj_of(ia);
            const std::size_t cols = self.val.cols();
            for (std::size_t n = 0; n < idx.size(); ++n)
              for (std::size_t c = 0; c < cols; ++c)
                ga[idx[n] * cols + c] += self.adj[n * cols + c];
          })};
}

Var Graph::softmax_rows(Var a) {
  const Tensor& ta = node(a).val;
  Tensor out = ta;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double mx = out.at(r, 0);
    for (std::size_t c = 1; c < out.cols(); ++c) mx = std::max(mx, out.at(r, c));
    double z = 0.0;
    for (std::size_t c = 0; c < out.cols(); ++c) {
      out.at(r, c) = std::exp(out.at(r, c) - mx);
      z += out.at(r, c);
    }
    for (std::size_t c = 0; c < out.cols(); ++c) out.at(r, c) /= z;
  }
  const int ia = a.id, io = static_cast<int>(nodes_.size());
  return {this, push(std::move(out), [ia, io](Graph& g, const Node& self) {
            const Tensor& vo = g.nodes_[io].val;
            auto& ga = g.adj_of(ia);
            const std::size_t rows = vo.rows(), cols = vo.cols();
            for (std::size_t r = 0; r < rows; ++r) {
              double dot = 0.0;
              for (std::size_t c = 0; c < cols; ++c)
                dot += self.adj[r * cols + c] * vo.at(r, c);
              for (std::size_t c = 0; c < cols; ++c)
                ga[r * cols + c] += vo.at(r, c) * (self.adj[r * cols + c] - dot);
            }
          })};
}

Var Graph::log_softmax_rows(Var a) {
  const Tensor& ta = node(a).val;
  Tensor out = ta;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double mx = out.at(r, 0);
    for (std::size_t c = 1; c < out.cols(); ++c) mx = std::max(mx, out.at(r, c));
    double z = 0.0;
    for (std::size_t c = 0; c < out.cols(); ++c) z += std::exp(out.at(r, c) - mx);
    const double lse = mx + std::log(z);
    for (std::size_t c = 0; c < out.cols(); ++c) out.at(r, c) -= lse;
  }
  const int ia = a.id, io = static_cast<int>(nodes_.size());
  return {this, push(std::move(out), [ia, io](Graph& g, const Node& self) {
            const Tensor& vo = g.nodes_[io].val;
            auto& ga = g.adj_of(ia);
            const std::size_t rows = vo.rows(), cols = vo.cols();
            for (std::size_t r = 0; r < rows; ++r) {
              double rowsum = 0.0;
              for (std::size_t c = 0; c < cols; ++c) rowsum += self.adj[r * cols + c];
              for (std::size_t c = 0; c < cols; ++c)
                ga[r * cols + c] += self.adj[r * cols + c] - std::exp(vo.at(r, c)) * rowsum;
            }
          })};
}

Var Graph::grad_reverse(Var a) {
  Tensor out = node(a).val;
  const int ia = a.id;
  return {this, push(std::move(out), [ia](Graph& g, const Node& self) {
            auto& ga = g.adj_of(ia);
            for (std::size_t i = 0; i < self.adj.size(); ++i) ga[i] -= self.adj[i];
          })};
}

}  // namespace freedom::diff
