// Copyright (c) 2026 FREEDOM project contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "freedom/autodiff.hpp"
#include "freedom/rng.hpp"
#include "freedom/tensor.hpp"

namespace freedom::diff {

enum class Activation { Identity, Tanh, Relu, LeakyRelu, Softmax };

inline constexpr double kLeakyReluSlope = 0.01;

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct MlpLayer {
  Tensor weight;  // [in, out]
  Tensor bias;    // [1, out]
  Activation act = Activation::Identity;
};

// Fully connected stack over row-batched inputs [N, in_dim].
struct Mlp {
  std::vector<MlpLayer> layers;

  // dims = {in, h1, ..., out}; acts has dims.size()-1 entries.
  // Weights uniform in +-1/sqrt(fan_in), biases zero.
  static Mlp make(const std::vector<std::size_t>& dims, const std::vector<Activation>& acts,
                  Rng& rng);

  std::size_t in_dim() const { return layers.front().weight.rows(); }
  std::size_t out_dim() const { return layers.back().weight.cols(); }
  std::size_t param_count() const;

  // consecutive layer dimensions must compose
  void validate() const;
};

// Records the forward pass; with trainable=true the weights participate as
// bound parameters, otherwise as constants.
Var forward(Graph& g, Mlp& mlp, Var input, bool trainable);
Var forward(Graph& g, const Mlp& mlp, Var input);

// convenience: run the net on plain values
Tensor forward_value(const Mlp& mlp, const Tensor& input);

}  // namespace freedom::diff
