// include/rdlab/numerics.h

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

#ifndef RDLAB_NUMERICS_H_
#define RDLAB_NUMERICS_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace rdlab {

using Shape = std::vector<std::size_t>;

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// Dense row-major tensor of 64-bit reals.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j);
  double at(std::size_t i, std::size_t j) const;
  double& at(std::size_t i, std::size_t j, std::size_t k);
  double at(std::size_t i, std::size_t j, std::size_t k) const;

  // Contiguous slice with the leading index (or two leading indices) fixed.
  std::span<double> slice(std::size_t i);
  std::span<const double> slice(std::size_t i) const;
  std::span<double> slice(std::size_t i, std::size_t j);
  std::span<const double> slice(std::size_t i, std::size_t j) const;

  void fill(double value);
  void set_zero() { fill(0.0); }
  /// Reinterprets the data with a new shape of equal size.
  void reshape(Shape shape);
  bool all_finite() const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Throws NumericalError naming `what` if any entry is NaN or infinite.
void check_finite(const Tensor& tensor, const std::string& what);

/// A trainable tensor with its accumulated gradient.
struct Parameter {
  Tensor value;
  Tensor grad;
  bool frozen = false;

  Parameter() = default;
  explicit Parameter(Tensor initial)
      : value(std::move(initial)), grad(value.shape()) {}
  explicit Parameter(Shape shape) : value(shape), grad(shape) {}
};

struct NamedParameter {
  std::string name;
  Parameter* param;
};

// ---------------------------------------------------------------------------
// Log-space primitives.

/// ln(sum_i exp(v_i)) with max-shift. Throws on empty input.
double logsumexp(std::span<const double> values);

/// ln(exp(a) + exp(b)); handles -inf operands.
double log_add(double a, double b);

/// Log-softmax along `axis` of a tensor of any rank.
Tensor log_softmax(const Tensor& logits, std::size_t axis);

void log_softmax_inplace(std::span<double> v);
void softmax_inplace(std::span<double> v);
std::vector<double> softmax(std::span<const double> v);

double sigmoid(double x);
/// ln(sigmoid(x)) computed without overflow.
double log_sigmoid(double x);

// ---------------------------------------------------------------------------
// Minimal dense linear algebra over row-major [rows, cols] matrices.

/// y += W x
void gemv_acc(const Tensor& w, std::span<const double> x, std::span<double> y);
/// x += W^T y
void gemv_t_acc(const Tensor& w, std::span<const double> y,
                std::span<double> x);
/// W += y x^T
void ger_acc(std::span<const double> y, std::span<const double> x, Tensor& w);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// ---------------------------------------------------------------------------
// Adam with linear warm-up and decoupled weight decay.

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-6;
  std::int64_t warmup_steps = 10000;

  void validate() const;
};

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

/// Learning rate at a 1-based step: lr * min(1, step / warmup_steps).
double warmup_learning_rate(const AdamConfig& config, std::int64_t step);

/// One Adam update over `params` at 1-based `step`. Frozen parameters are
/// skipped. All gradients (frozen included) are zeroed afterwards.
void adam_step(std::span<const NamedParameter> params, AdamState& state,
               std::int64_t step, const AdamConfig& config);

/// FNV-1a over the raw bytes of the values, in order.
std::uint64_t hash_values(std::span<const NamedParameter> params);

}  // namespace rdlab

#endif  // RDLAB_NUMERICS_H_
