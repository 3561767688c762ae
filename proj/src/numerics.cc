// src/numerics.cc

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

#include "rdlab/numerics.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "rdlab/errors.h"

namespace rdlab {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (shape_size(shape_) != data_.size()) {
    throw std::invalid_argument("Tensor: shape " + shape_to_string(shape_) +
                                " does not match " +
                                std::to_string(data_.size()) + " values");
  }
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw std::invalid_argument("Tensor::dim: axis " + std::to_string(axis) +
                                " out of range for rank " +
                                std::to_string(shape_.size()));
  }
  return shape_[axis];
}

double& Tensor::at(std::size_t i, std::size_t j) {
  return data_[i * shape_[1] + j];
}
double Tensor::at(std::size_t i, std::size_t j) const {
  return data_[i * shape_[1] + j];
}
double& Tensor::at(std::size_t i, std::size_t j, std::size_t k) {
  return data_[(i * shape_[1] + j) * shape_[2] + k];
}
double Tensor::at(std::size_t i, std::size_t j, std::size_t k) const {
  return data_[(i * shape_[1] + j) * shape_[2] + k];
}

std::span<double> Tensor::slice(std::size_t i) {
  const std::size_t stride = data_.size() / shape_[0];
  return {data_.data() + i * stride, stride};
}
std::span<const double> Tensor::slice(std::size_t i) const {
  const std::size_t stride = data_.size() / shape_[0];
  return {data_.data() + i * stride, stride};
}
std::span<double> Tensor::slice(std::size_t i, std::size_t j) {
  const std::size_t stride = data_.size() / (shape_[0] * shape_[1]);
  return {data_.data() + (i * shape_[1] + j) * stride, stride};
}
std::span<const double> Tensor::slice(std::size_t i, std::size_t j) const {
  const std::size_t stride = data_.size() / (shape_[0] * shape_[1]);
  return {data_.data() + (i * shape_[1] + j) * stride, stride};
}

void Tensor::reshape(Shape shape) {
  if (shape_size(shape) != data_.size()) {
    throw std::invalid_argument("Tensor::reshape: size mismatch for " +
                                shape_to_string(shape));
  }
  shape_ = std::move(shape);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void check_finite(const Tensor& tensor, const std::string& what) {
  if (!tensor.all_finite()) {
    throw NumericalError("non-finite value in " + what);
  }
}

double logsumexp(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("logsumexp: empty input");
  const double m = *std::max_element(values.begin(), values.end());
  if (values.size() == 1) return values[0];
  if (m == kLogZero) return kLogZero;
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

void log_softmax_inplace(std::span<double> v) {
  const double lse = logsumexp(v);
  for (double& x : v) x -= lse;
}

void softmax_inplace(std::span<double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double& x : v) {
    x = std::exp(x - m);
    s += x;
  }
  for (double& x : v) x /= s;
}

std::vector<double> softmax(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  softmax_inplace(out);
  return out;
}

Tensor log_softmax(const Tensor& logits, std::size_t axis) {
  const Shape& shape = logits.shape();
  if (axis >= shape.size()) {
    throw std::invalid_argument("log_softmax: axis out of range");
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];
  const std::size_t n = shape[axis];
  Tensor out = logits;
  std::vector<double> buf(n);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      for (std::size_t k = 0; k < n; ++k) {
        buf[k] = logits[(o * n + k) * inner + in];
      }
      if (n > 0) log_softmax_inplace(buf);
      for (std::size_t k = 0; k < n; ++k) {
        out[(o * n + k) * inner + in] = buf[k];
      }
    }
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

void gemv_acc(const Tensor& w, std::span<const double> x, std::span<double> y) {
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  const double* p = w.data();
  for (std::size_t r = 0; r < rows; ++r, p += cols) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += p[c] * x[c];
    y[r] += s;
  }
}

void gemv_t_acc(const Tensor& w, std::span<const double> y,
                std::span<double> x) {
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  const double* p = w.data();
  for (std::size_t r = 0; r < rows; ++r, p += cols) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) x[c] += p[c] * yr;
  }
}

void ger_acc(std::span<const double> y, std::span<const double> x, Tensor& w) {
  const std::size_t rows = w.dim(0), cols = w.dim(1);
  double* p = w.data();
  for (std::size_t r = 0; r < rows; ++r, p += cols) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) p[c] += yr * x[c];
  }
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void AdamConfig::validate() const {
  if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1)) {
    throw std::invalid_argument("AdamConfig: betas must lie in (0, 1)");
  }
  if (!(epsilon > 0)) throw std::invalid_argument("AdamConfig: epsilon <= 0");
  if (warmup_steps < 0) {
    throw std::invalid_argument("AdamConfig: warmup_steps < 0");
  }
  if (learning_rate < 0 || weight_decay < 0) {
    throw std::invalid_argument("AdamConfig: negative rate");
  }
}

double warmup_learning_rate(const AdamConfig& config, std::int64_t step) {
  if (config.warmup_steps == 0) return config.learning_rate;
  const double frac = static_cast<double>(step) /
                      static_cast<double>(config.warmup_steps);
  return config.learning_rate * std::min(1.0, frac);
}

void adam_step(std::span<const NamedParameter> params, AdamState& state,
               std::int64_t step, const AdamConfig& config) {
  if (step < 1) throw std::invalid_argument("adam_step: step must be >= 1");
  if (state.first_moment.size() != params.size()) {
    state.first_moment.clear();
    state.second_moment.clear();
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.param->value.shape());
      state.second_moment.emplace_back(p.param->value.shape());
    }
  }
  for (const auto& p : params) {
    if (!p.param->frozen && !p.param->grad.all_finite()) {
      throw NumericalError("non-finite gradient in parameter '" + p.name + "'");
    }
  }
  const double lr = warmup_learning_rate(config, step);
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i].param;
    if (!p.frozen) {
      double* m = state.first_moment[i].data();
      double* v = state.second_moment[i].data();
      double* w = p.value.data();
      const double* g = p.grad.data();
      for (std::size_t k = 0; k < p.value.size(); ++k) {
        m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g[k];
        v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g[k] * g[k];
        const double mhat = m[k] / bc1;
        const double vhat = v[k] / bc2;
        w[k] -= lr * (mhat / (std::sqrt(vhat) + config.epsilon) +
                      config.weight_decay * w[k]);
      }
    }
    p.grad.set_zero();
  }
}

std::uint64_t hash_values(std::span<const NamedParameter> params) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* bytes, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(bytes);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& p : params) {
    mix(p.name.data(), p.name.size());
    mix(p.param->value.data(), p.param->value.size() * sizeof(double));
  }
  return h;
}

}  // namespace rdlab
