// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#include "freedom/mlp.hpp"

#include <cmath>

namespace freedom::diff {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::LeakyRelu: return "leaky-relu";
    case Activation::Softmax: return "softmax";
  }
  return "?";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::Identity;
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  if (s == "leaky-relu") return Activation::LeakyRelu;
  if (s == "softmax") return Activation::Softmax;
  throw ConfigError("unknown activation: " + s);
}

Mlp Mlp::make(const std::vector<std::size_t>& dims, const std::vector<Activation>& acts,
              Rng& rng) {
  if (dims.size() < 2 || acts.size() != dims.size() - 1)
    throw ContractError("mlp: need dims {in,...,out} and one activation per layer");
  Mlp mlp;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    MlpLayer layer;
    layer.weight = Tensor(dims[l], dims[l + 1]);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    for (std::size_t i = 0; i < layer.weight.size(); ++i)
      layer.weight[i] = rng.uniform(-bound, bound);
    layer.bias = Tensor(1, dims[l + 1]);
    layer.act = acts[l];
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const MlpLayer& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

void Mlp::validate() const {
  if (layers.empty()) throw ContractError("mlp: no layers");
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    if (layers[l].weight.cols() != layers[l + 1].weight.rows())
      throw ContractError("mlp: layer " + std::to_string(l) + " out-dim " +
                          std::to_string(layers[l].weight.cols()) + " != layer " +
                          std::to_string(l + 1) + " in-dim " +
                          std::to_string(layers[l + 1].weight.rows()));
  }
}

namespace {

Var apply_activation(Graph& g, Var z, Activation act) {
  switch (act) {
    case Activation::Identity: return z;
    case Activation::Tanh: return g.tanh_(z);
    case Activation::Relu: return g.relu(z);
    case Activation::LeakyRelu: return g.leaky_relu(z, kLeakyReluSlope);
    case Activation::Softmax: return g.softmax_rows(z);
  }
  throw ContractError("mlp: unreachable activation");
}

template <typename MlpT, typename LeafFn>
Var forward_impl(Graph& g, MlpT& mlp, Var input, LeafFn leaf) {
  Var x = input;
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    auto& layer = mlp.layers[l];
    if (g.value(x).cols() != layer.weight.rows())
      throw ContractError("mlp: layer " + std::to_string(l) + " expects input dim " +
                          std::to_string(layer.weight.rows()) + ", got " +
                          std::to_string(g.value(x).cols()));
    Var w = leaf(layer.weight);
    Var b = leaf(layer.bias);
    x = apply_activation(g, g.add_rowwise(g.matmul(x, w), b), layer.act);
  }
  return x;
}

}  // namespace

Var forward(Graph& g, Mlp& mlp, Var input, bool trainable) {
  if (trainable)
    return forward_impl(g, mlp, input, [&g](Tensor& t) { return g.param(t); });
  return forward_impl(g, mlp, input, [&g](const Tensor& t) { return g.constant(t); });
}

Var forward(Graph& g, const Mlp& mlp, Var input) {
  return forward_impl(g, mlp, input, [&g](const Tensor& t) { return g.constant(t); });
}

Tensor forward_value(const Mlp& mlp, const Tensor& input) {
  Graph g;
  return g.value(forward(g, mlp, g.constant(input)));
}

}  // namespace freedom::diff
