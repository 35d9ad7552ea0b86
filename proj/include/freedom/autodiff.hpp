// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "freedom/tensor.hpp"

namespace freedom::diff {

class Graph;

// Handle to a node in a Graph. Cheap to copy; valid only for the lifetime
// of the graph that produced it.
struct Var {
  Graph* graph = nullptr;
  int id = -1;
};

// Dynamically recorded reverse-mode graph. One graph per training step;
// discarded after backward. Nodes are created in topological order, so the
// reverse pass is a simple reverse sweep over ids.
//
// A graph must stay on the thread that built it; tensors themselves are
// inert value data.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Leaf bound to an external tensor: after backward, d(loss)/d(t) is
  // accumulated into t.grad().
  Var param(Tensor& t);

  // Unbound leaves; never receive gradient.
  Var constant(const Tensor& t);
  Var constant(double v);

  // Reverse pass from a scalar loss (shape 1x1). May be called once.
  void backward(Var loss);

  const Tensor& value(Var v) const;
  double scalar(Var v) const;
  // Adjoint of a node after backward (zeros if the node is unreachable).
  std::vector<double> adjoint(Var v) const;

  std::size_t size() const { return nodes_.size(); }

  // ---- elementwise ----
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var div(Var a, Var b);
  Var neg(Var a);
  Var add_scalar(Var a, double c);
  Var scale(Var a, double c);
  Var tanh_(Var a);
  Var relu(Var a);
  Var leaky_relu(Var a, double slope);
  Var exp_(Var a);
  Var log_(Var a);
  Var clamp(Var a, double lo, double hi);

  // ---- broadcasting over rows: x is [N,K], v is [1,K] ----
  Var add_rowwise(Var x, Var v);
  Var mul_rowwise(Var x, Var v);

  // ---- shape / structure ----
  Var matmul(Var x, Var w);  // [N,I] x [I,O] -> [N,O]
  Var sum_all(Var a);        // -> 1x1
  Var mean_all(Var a);       // -> 1x1
  Var concat_cols(Var a, Var b);
  Var slice_cols(Var a, std::size_t from, std::size_t to);  // [from, to)
  Var gather_rows(Var a, std::vector<std::size_t> idx);     // duplicates accumulate on backward

  // ---- rowwise softmax family (numerically stabilized) ----
  Var softmax_rows(Var a);
  Var log_softmax_rows(Var a);

  // Identity forward, negated gradient backward.
  Var grad_reverse(Var a);

 private:
  struct Node {
    Tensor val;
    std::vector<double> adj;  // lazily sized during backward
    std::function<void(Graph&, const Node&)> back;
    Tensor* bound = nullptr;
  };

  int push(Tensor val, std::function<void(Graph&, const Node&)> back);
  std::vector<double>& adj_of(int id);  // lazily allocates
  const Node& node(Var v) const;
  void check_same_shape(Var a, Var b, const char* op) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// operator sugar for loss assembly
inline Var operator+(Var a, Var b) { return a.graph->add(a, b); }
inline Var operator-(Var a, Var b) { return a.graph->sub(a, b); }
inline Var operator*(Var a, Var b) { return a.graph->mul(a, b); }
inline Var operator/(Var a, Var b) { return a.graph->div(a, b); }
inline Var operator-(Var a) { return a.graph->neg(a); }
inline Var operator*(double c, Var a) { return a.graph->scale(a, c); }

}  // namespace freedom::diff
