// tests/layers_test.cc

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

#include <random>

#include "doctest.h"
#include "oracles.h"
#include "rdlab/layers.h"

using namespace rdlab;

TEST_CASE("linear: forward is W x + b") {
  Rng rng(51);
  Linear lin(3, 2, rng);
  std::mt19937_64 r(1);
  const Tensor x = oracle::random_tensor({3}, r);
  std::vector<double> y(2);
  lin.forward(x.values(), y);
  for (std::size_t i = 0; i < 2; ++i) {
    double want = lin.bias.value[i];
    for (std::size_t k = 0; k < 3; ++k) want += lin.weight.value.at(i, k) * x[k];
    CHECK(std::abs(y[i] - want) <= 1e-14);
  }
  CHECK(lin.in_dim() == 3);
  CHECK(lin.out_dim() == 2);
}

TEST_CASE("linear: gradients") {
  Rng rng(52);
  Linear lin(4, 3, rng);
  std::mt19937_64 r(2);
  Tensor x = oracle::random_tensor({4}, r);
  const Tensor w = oracle::random_tensor({3}, r);
  auto loss = [&] {
    Tensor y({3});
    lin.forward(x.values(), y.values());
    return oracle::weighted_sum(y, w);
  };
  std::vector<NamedParameter> params;
  lin.collect("lin", params);
  CHECK(params.size() == 2);
  Tensor dx({4});
  const auto report = oracle::check_parameter_gradients(
      params, loss, [&] { lin.backward(x.values(), w.values(), dx.values()); }, r, 12);
  CHECK_MESSAGE(report.failed == 0, report.first_failure);
  std::vector<double*> coords;
  for (std::size_t i = 0; i < 4; ++i) coords.push_back(x.data() + i);
  const auto numeric = oracle::numeric_gradient(loss, coords);
  for (std::size_t i = 0; i < 4; ++i) CHECK(oracle::gradients_close(dx[i], numeric[i]));
}

TEST_CASE("lstm: step matches forward") {
  Rng rng(53);
  Lstm lstm(3, 4, rng);
  std::mt19937_64 r(3);
  const Tensor input = oracle::random_tensor({5, 3}, r);
  const Tensor hidden = lstm.forward(input, nullptr);
  CHECK(hidden.shape() == Shape{5, 4});
  auto state = lstm.initial_state();
  for (std::size_t t = 0; t < 5; ++t) {
    state = lstm.step(state, input.slice(t));
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(state.h[k] - hidden.at(t, k)) <= 1e-14);
  }
}

TEST_CASE("lstm: standard cell equations") {
  // One step from the zero state with gate order i, f, g, o.
  Rng rng(54);
  Lstm lstm(2, 3, rng);
  std::mt19937_64 r(4);
  const Tensor x = oracle::random_tensor({2}, r);
  const auto s = lstm.step(lstm.initial_state(), x.values());
  for (std::size_t k = 0; k < 3; ++k) {
    double pre[4];
    for (std::size_t g = 0; g < 4; ++g) {
      const std::size_t row = g * 3 + k;
      pre[g] = lstm.bias.value[row];
      for (std::size_t j = 0; j < 2; ++j) pre[g] += lstm.w_ih.value.at(row, j) * x[j];
    }
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    const double c = sig(pre[0]) * std::tanh(pre[2]);
    CHECK(std::abs(s.c[k] - c) <= 1e-14);
    CHECK(std::abs(s.h[k] - sig(pre[3]) * std::tanh(c)) <= 1e-14);
  }
}

TEST_CASE("lstm: backpropagation through time") {
  Rng rng(55);
  Lstm lstm(3, 4, rng);
  std::mt19937_64 r(5);
  Tensor input = oracle::random_tensor({6, 3}, r);
  const Tensor w = oracle::random_tensor({6, 4}, r);
  auto loss = [&] { return oracle::weighted_sum(lstm.forward(input, nullptr), w); };
  std::vector<NamedParameter> params;
  lstm.collect("lstm", params);
  Tensor dx;
  const auto report = oracle::check_parameter_gradients(
      params, loss,
      [&] {
        Lstm::Cache cache;
        lstm.forward(input, &cache);
        lstm.backward(cache, w, &dx);
      },
      r, 20);
  CHECK_MESSAGE(report.failed == 0, report.first_failure);
  std::vector<double*> coords;
  for (std::size_t i = 0; i < input.size(); ++i) coords.push_back(input.data() + i);
  const auto numeric = oracle::numeric_gradient(loss, coords);
  REQUIRE(dx.size() == input.size());
  for (std::size_t i = 0; i < input.size(); ++i) CHECK(oracle::gradients_close(dx[i], numeric[i]));
}

TEST_CASE("uniform init stays within bounds and is seeded") {
  Rng a(7), b(7);
  Tensor x({100}), y({100});
  uniform_init(x, 0.3, a);
  uniform_init(y, 0.3, b);
  CHECK(x == y);
  for (double v : x.values()) CHECK(std::abs(v) <= 0.3);
}
