// tests/oracles.h

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

// Independent reference implementations used by the unit and acceptance
// tests. They favour obviousness over speed: explicit enumeration, naive
// softmax, plain recursion.

#ifndef RDLAB_TESTS_ORACLES_H_
#define RDLAB_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "rdlab/lattice.h"
#include "rdlab/numerics.h"

namespace oracle {

using rdlab::Tensor;

inline Tensor random_tensor(const rdlab::Shape& shape, std::mt19937_64& rng,
                            double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Tensor t(shape);
  for (double& v : t.values()) v = n(rng);
  return t;
}

inline std::vector<int> random_labels(std::size_t U, std::size_t num_labels,
                                      std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(num_labels) - 1);
  std::vector<int> labels(U);
  for (int& l : labels) l = pick(rng);
  return labels;
}

// Naive probability of index k under softmax(v).
inline double naive_softmax(std::span<const double> v, std::size_t k) {
  double s = 0.0;
  for (double x : v) s += std::exp(x);
  return std::exp(v[k]) / s;
}

inline double naive_logsumexp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// A path as a move string: 'b' = blank (t+1), 'e' = emission (u+1). Every
// path has T blanks and U emissions and ends with a blank.
inline std::vector<std::string> enumerate_paths(std::size_t T, std::size_t U) {
  std::vector<std::string> out;
  std::function<void(std::string, std::size_t, std::size_t)> rec =
      [&](std::string prefix, std::size_t b, std::size_t e) {
        if (b == T - 1 && e == U) {
          out.push_back(prefix + "b");
          return;
        }
        if (b < T - 1) rec(prefix + "b", b + 1, e);
        if (e < U) rec(prefix + "e", b, e + 1);
      };
  if (T > 0) rec("", 0, 0);
  return out;
}

// Per-step probability callbacks: blank at (t,u), label at (t,u).
using StepProb = std::function<double(std::size_t t, std::size_t u, bool blank)>;

inline double path_log_prob(const std::string& moves, const StepProb& prob) {
  std::size_t t = 0, u = 0;
  double lp = 0.0;
  for (char m : moves) {
    if (m == 'b') {
      lp += std::log(prob(t, u, true));
      ++t;
    } else {
      lp += std::log(prob(t, u, false));
      ++u;
    }
  }
  return lp;
}

inline StepProb rnnt_step_prob(const rdlab::LogitLattice& lat,
                               const std::vector<int>& labels) {
  return [&lat, labels](std::size_t t, std::size_t u, bool blank) {
    const auto cell = lat.cell(t, u);
    return naive_softmax(cell, blank ? *lat.blank : static_cast<std::size_t>(labels[u]));
  };
}

inline StepProb shared_blank_step_prob(const rdlab::LogitLattice& aux,
                                       const Tensor& shared_blank,
                                       const std::vector<int>& labels) {
  return [&aux, &shared_blank, labels](std::size_t t, std::size_t u, bool blank) {
    const double b = shared_blank.at(t, u);
    if (blank) return b;
    return (1.0 - b) * naive_softmax(aux.cell(t, u), static_cast<std::size_t>(labels[u]));
  };
}

inline double enumerate_log_likelihood(std::size_t T, std::size_t U, const StepProb& prob) {
  std::vector<double> lps;
  for (const auto& p : enumerate_paths(T, U)) lps.push_back(path_log_prob(p, prob));
  return naive_logsumexp(lps);
}

inline double enumerate_best_path(std::size_t T, std::size_t U, const StepProb& prob) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : enumerate_paths(T, U)) best = std::max(best, path_log_prob(p, prob));
  return best;
}

// Central finite differences of a scalar function of a flat vector.
inline std::vector<double> numeric_gradient(const std::function<double()>& f,
                                            std::vector<double*> coords, double h = 1e-5) {
  std::vector<double> g;
  for (double* x : coords) {
    const double saved = *x;
    *x = saved + h;
    const double fp = f();
    *x = saved - h;
    const double fm = f();
    *x = saved;
    g.push_back((fp - fm) / (2 * h));
  }
  return g;
}

// Relative agreement with an absolute floor for near-zero coordinates.
inline bool gradients_close(double analytic, double numeric, double rel = 1e-4,
                            double floor = 1e-7) {
  return std::abs(analytic - numeric) <= rel * std::max(std::abs(analytic), std::abs(numeric)) + floor;
}

// Plain recursive edit distance over suffixes.
inline std::size_t edit_distance(const std::vector<std::string>& a,
                                 const std::vector<std::string>& b, std::size_t i = 0,
                                 std::size_t j = 0) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  if (a[i] == b[j]) return edit_distance(a, b, i + 1, j + 1);
  return 1 + std::min({edit_distance(a, b, i + 1, j + 1), edit_distance(a, b, i + 1, j),
                       edit_distance(a, b, i, j + 1)});
}

// Prefix-dependent pseudo-random logits, independent of query order.
inline std::vector<double> hashed_logits(std::uint64_t seed, std::size_t t,
                                         const std::vector<int>& prefix, std::size_t size,
                                         double scale = 2.0) {
  std::uint64_t h = seed * 0x9e3779b97f4a7c15ULL + t + 1;
  for (int k : prefix) h = (h ^ static_cast<std::uint64_t>(k + 7)) * 0x100000001b3ULL;
  std::mt19937_64 rng(h);
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> out(size);
  for (double& v : out) v = n(rng);
  return out;
}

// Summed probability of every label sequence reachable with at most
// `max_symbols` labels per frame, by explicit enumeration of alignments.
using LogitFn = std::function<std::vector<double>(std::size_t, const std::vector<int>&)>;

inline std::map<std::vector<int>, double> enumerate_sequences(std::size_t T, std::size_t vocab,
                                                              std::size_t blank,
                                                              int max_symbols,
                                                              const LogitFn& logits) {
  std::map<std::vector<int>, std::vector<double>> parts;
  std::function<void(std::size_t, int, std::vector<int>&, double)> rec =
      [&](std::size_t t, int used, std::vector<int>& prefix, double lp) {
        if (t == T) {
          parts[prefix].push_back(lp);
          return;
        }
        const auto z = logits(t, prefix);
        rec(t + 1, 0, prefix, lp + std::log(naive_softmax(z, blank)));
        if (used == max_symbols) return;
        for (std::size_t k = 0; k < vocab; ++k) {
          if (k == blank) continue;
          const double step = std::log(naive_softmax(z, k));
          prefix.push_back(static_cast<int>(k));
          rec(t, used + 1, prefix, lp + step);
          prefix.pop_back();
        }
      };
  std::vector<int> prefix;
  rec(0, 0, prefix, 0.0);
  std::map<std::vector<int>, double> out;
  for (const auto& [seq, lps] : parts) out[seq] = naive_logsumexp(lps);
  return out;
}

struct GradCheckReport {
  std::size_t checked = 0;
  std::size_t failed = 0;
  std::string first_failure;
};

// Compares parameter gradients accumulated by `backward` with central
// differences of `loss`, on up to `per_param` coordinates of each tensor.
inline GradCheckReport check_parameter_gradients(
    const std::vector<rdlab::NamedParameter>& params, const std::function<double()>& loss,
    const std::function<void()>& backward, std::mt19937_64& rng,
    std::size_t per_param = 6) {
  for (const auto& p : params) p.param->grad.set_zero();
  backward();
  GradCheckReport report;
  for (const auto& p : params) {
    const std::size_t n = p.param->value.size();
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t s = 0; s < std::min(per_param, n); ++s) {
      const std::size_t i = per_param >= n ? s : pick(rng);
      double* x = p.param->value.data() + i;
      const double numeric = numeric_gradient(loss, {x})[0];
      const double analytic = p.param->grad.data()[i];
      ++report.checked;
      if (!gradients_close(analytic, numeric)) {
        if (report.failed++ == 0) {
          report.first_failure = p.name + "[" + std::to_string(i) + "] analytic " +
                                 std::to_string(analytic) + " numeric " + std::to_string(numeric);
        }
      }
    }
  }
  return report;
}

// Sum of elementwise products with fixed random weights: a generic scalar
// probe whose gradient with respect to the output is `weights`.
inline double weighted_sum(const Tensor& out, const Tensor& weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) s += out.data()[i] * weights.data()[i];
  return s;
}

}  // namespace oracle

#endif  // RDLAB_TESTS_ORACLES_H_
