// src/layers.cc

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

#include "rdlab/layers.h"

#include <cmath>

namespace rdlab {

void uniform_init(Tensor& t, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.values()) v = dist(rng);
}

Linear::Linear(std::size_t in_dim, std::size_t out_dim, Rng& rng)
    : weight(Shape{out_dim, in_dim}), bias(Shape{out_dim}) {
  uniform_init(weight.value, 1.0 / std::sqrt(static_cast<double>(in_dim)), rng);
}

void Linear::forward(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = bias.value[i];
  gemv_acc(weight.value, x, y);
}

void Linear::backward(std::span<const double> x, std::span<const double> dy,
                      std::span<double> dx) {
  ger_acc(dy, x, weight.grad);
  axpy(1.0, dy, bias.grad.values());
  if (!dx.empty()) gemv_t_acc(weight.value, dy, dx);
}

void Linear::collect(const std::string& prefix,
                     std::vector<NamedParameter>& out) {
  out.push_back({prefix + "weight", &weight});
  out.push_back({prefix + "bias", &bias});
}

Lstm::Lstm(std::size_t in_dim, std::size_t hidden_dim, Rng& rng)
    : w_ih(Shape{4 * hidden_dim, in_dim}),
      w_hh(Shape{4 * hidden_dim, hidden_dim}),
      bias(Shape{4 * hidden_dim}) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  uniform_init(w_ih.value, bound, rng);
  uniform_init(w_hh.value, bound, rng);
  // forget-gate bias starts at 1
  for (std::size_t k = hidden_dim; k < 2 * hidden_dim; ++k) bias.value[k] = 1.0;
}

Lstm::State Lstm::initial_state() const {
  const std::size_t H = hidden_dim();
  return {std::vector<double>(H, 0.0), std::vector<double>(H, 0.0)};
}

Lstm::State Lstm::step(const State& prev, std::span<const double> x,
                       std::span<double> gates_out) const {
  const std::size_t H = hidden_dim();
  std::vector<double> z(bias.value.values().begin(), bias.value.values().end());
  gemv_acc(w_ih.value, x, z);
  gemv_acc(w_hh.value, prev.h, z);
  State next{std::vector<double>(H), std::vector<double>(H)};
  for (std::size_t k = 0; k < H; ++k) {
    const double i = sigmoid(z[k]);
    const double f = sigmoid(z[H + k]);
    const double g = std::tanh(z[2 * H + k]);
    const double o = sigmoid(z[3 * H + k]);
    next.c[k] = f * prev.c[k] + i * g;
    next.h[k] = o * std::tanh(next.c[k]);
    if (!gates_out.empty()) {
      gates_out[k] = i;
      gates_out[H + k] = f;
      gates_out[2 * H + k] = g;
      gates_out[3 * H + k] = o;
    }
  }
  return next;
}

Tensor Lstm::forward(const Tensor& input, Cache* cache) const {
  const std::size_t T = input.dim(0), H = hidden_dim();
  Tensor hidden({T, H});
  Tensor gates, cell;
  if (cache) {
    gates = Tensor({T, 4 * H});
    cell = Tensor({T, H});
  }
  State state = initial_state();
  std::vector<double> scratch(4 * H);
  for (std::size_t t = 0; t < T; ++t) {
    state = step(state, input.slice(t), cache ? gates.slice(t) : std::span<double>(scratch));
    std::copy(state.h.begin(), state.h.end(), hidden.slice(t).begin());
    if (cache) std::copy(state.c.begin(), state.c.end(), cell.slice(t).begin());
  }
  if (cache) {
    cache->input = input;
    cache->gates = std::move(gates);
    cache->cell = std::move(cell);
    cache->hidden = hidden;
  }
  return hidden;
}

void Lstm::backward(const Cache& cache, const Tensor& d_hidden, Tensor* dx) {
  const std::size_t T = cache.input.dim(0), H = hidden_dim();
  if (dx) *dx = Tensor(cache.input.shape());
  std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0), dz(4 * H);
  const std::vector<double> zeros(H, 0.0);
  for (std::size_t t = T; t-- > 0;) {
    auto gates = cache.gates.slice(t);
    auto c = cache.cell.slice(t);
    std::span<const double> c_prev = t > 0 ? cache.cell.slice(t - 1) : std::span<const double>(zeros);
    std::span<const double> h_prev = t > 0 ? cache.hidden.slice(t - 1) : std::span<const double>(zeros);
    auto dh_out = d_hidden.slice(t);
    for (std::size_t k = 0; k < H; ++k) {
      const double i = gates[k], f = gates[H + k], g = gates[2 * H + k],
                   o = gates[3 * H + k];
      const double dh = dh_out[k] + dh_next[k];
      const double tc = std::tanh(c[k]);
      const double dc = dc_next[k] + dh * o * (1.0 - tc * tc);
      dz[k] = dc * g * i * (1.0 - i);
      dz[H + k] = dc * c_prev[k] * f * (1.0 - f);
      dz[2 * H + k] = dc * i * (1.0 - g * g);
      dz[3 * H + k] = dh * tc * o * (1.0 - o);
      dc_next[k] = dc * f;
    }
    ger_acc(dz, cache.input.slice(t), w_ih.grad);
    ger_acc(dz, h_prev, w_hh.grad);
    axpy(1.0, dz, bias.grad.values());
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    gemv_t_acc(w_hh.value, dz, dh_next);
    if (dx) gemv_t_acc(w_ih.value, dz, dx->slice(t));
  }
}

void Lstm::collect(const std::string& prefix, std::vector<NamedParameter>& out) {
  out.push_back({prefix + "w_ih", &w_ih});
  out.push_back({prefix + "w_hh", &w_hh});
  out.push_back({prefix + "bias", &bias});
}

}  // namespace rdlab
