// include/rdlab/layers.h

// Copyright 2026  rdlab authors

// See ../../COPYING for clarification regarding multiple authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef RDLAB_LAYERS_H_
#define RDLAB_LAYERS_H_

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rdlab/numerics.h"

namespace rdlab {

using Rng = std::mt19937_64;

void uniform_init(Tensor& t, double bound, Rng& rng);

/// y = W x + b
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in_dim, std::size_t out_dim, Rng& rng);

  std::size_t in_dim() const { return weight.value.dim(1); }
  std::size_t out_dim() const { return weight.value.dim(0); }

  void forward(std::span<const double> x, std::span<double> y) const;
  /// Accumulates parameter gradients; adds W^T dy into dx when non-empty.
  void backward(std::span<const double> x, std::span<const double> dy,
                std::span<double> dx);
  void collect(const std::string& prefix, std::vector<NamedParameter>& out);

  Parameter weight;
  Parameter bias;
};

/// Single-layer LSTM (gate order i, f, g, o).
class Lstm {
 public:
  Lstm() = default;
  Lstm(std::size_t in_dim, std::size_t hidden_dim, Rng& rng);

  std::size_t in_dim() const { return w_ih.value.dim(1); }
  std::size_t hidden_dim() const { return w_hh.value.dim(1); }

  struct State {
    std::vector<double> h;
    std::vector<double> c;
  };
  State initial_state() const;
  /// One recurrence step; `gates` (size 4H, post-activation) is optional.
  State step(const State& prev, std::span<const double> x,
             std::span<double> gates = {}) const;

  struct Cache {
    Tensor input;   // [T, in]
    Tensor gates;   // [T, 4H]
    Tensor cell;    // [T, H]
    Tensor hidden;  // [T, H]
  };
  /// Runs from the zero state; returns hidden states [T, H].
  Tensor forward(const Tensor& input, Cache* cache) const;
  /// Backpropagation through time. `dx` (may be null) receives input grads.
  void backward(const Cache& cache, const Tensor& d_hidden, Tensor* dx);
  void collect(const std::string& prefix, std::vector<NamedParameter>& out);

  Parameter w_ih;  // [4H, in]
  Parameter w_hh;  // [4H, H]
  Parameter bias;  // [4H]
};

}  // namespace rdlab

#endif  // RDLAB_LAYERS_H_
