// include/rdlab/lattice.h

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

#ifndef RDLAB_LATTICE_H_
#define RDLAB_LATTICE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rdlab/numerics.h"

namespace rdlab {

// Lattice indexing convention, used by every module:
//
//   logits[t][u] is the joiner output for frame t (0-based) and the predictor
//   state after u labels have been emitted. The (u+1)-th label is therefore
//   emitted from cell (t, u), and a blank at (t, u) moves to (t+1, u).
//   A complete path ends with a blank out of (T-1, U).

using LabelSequence = std::vector<int>;

/// Parameters of h = P f + Q g + b_h,  j = A tanh(h) + b_s.
struct JoinerParams {
  Tensor P;    // [joint_dim, encoder_dim]
  Tensor Q;    // [joint_dim, predictor_dim]
  Tensor A;    // [vocab, joint_dim]
  Tensor b_h;  // [joint_dim]
  Tensor b_s;  // [vocab]

  void validate() const;
};

std::vector<double> joiner_forward(std::span<const double> f,
                                   std::span<const double> g,
                                   const JoinerParams& params);

/// T x (U+1) x V raw joiner outputs for one utterance.
struct LogitLattice {
  Tensor logits;
  std::optional<std::size_t> blank;

  LogitLattice() = default;
  LogitLattice(Tensor logits, std::optional<std::size_t> blank);

  std::size_t frames() const { return logits.dim(0); }
  std::size_t labels() const { return logits.dim(1) - 1; }
  std::size_t vocab_size() const { return logits.dim(2); }
  std::span<const double> cell(std::size_t t, std::size_t u) const {
    return logits.slice(t, u);
  }
};

/// ln P(labels | x) under the standard transducer (softmax over the full
/// vocabulary, blank included).
double rnnt_log_likelihood(const LogitLattice& lattice,
                           std::span<const int> labels);

struct RnntResult {
  double log_likelihood = 0.0;
  Tensor gradient;  // d(-ln P)/d logits, shape [T, U+1, V]
};

/// Forward-backward gradient of -ln P(labels | x) w.r.t. the raw logits.
RnntResult rnnt_gradients(const LogitLattice& lattice,
                          std::span<const int> labels);

/// b_{t,u} = sigmoid(blank logit), shape [T, U+1].
Tensor hat_blank_probability(const LogitLattice& lattice);

/// (1 - b_{t,u}) softmax(non-blank logits), shape [T, U+1, V-1]. Non-blank
/// entries keep their vocabulary order with the blank column removed.
Tensor hat_label_distribution(const LogitLattice& lattice);

/// ln P(labels | x) under the factorized (HAT) output distribution.
double hat_log_likelihood(const LogitLattice& lattice,
                          std::span<const int> labels);

/// Auxiliary transducer loss with a blank probability borrowed from another
/// network. `aux_lattice` has no blank of its own; `shared_blank` is
/// [T, U+1] with values in (0, 1). Returns ln P(labels | x).
double rnnt_loss_shared_blank(const LogitLattice& aux_lattice,
                              const Tensor& shared_blank,
                              std::span<const int> labels);

/// A supervised role at one emission cell.
struct RoleTarget {
  std::size_t t = 0;
  std::size_t u = 0;
  int role = 0;
  bool operator==(const RoleTarget&) const = default;
};

struct CrossEntropyResult {
  double loss = 0.0;
  Tensor gradient;  // same shape as the lattice logits
};

/// Sum over targets of -ln softmax(lattice[t][u])[role]. Cells without a
/// target get exactly zero gradient.
CrossEntropyResult rd_cross_entropy(const LogitLattice& rd_lattice,
                                    std::span<const RoleTarget> targets);

/// Per-cell helper shared with training: returns the loss and writes the
/// gradient (softmax - onehot) into `grad`.
double role_cross_entropy_cell(std::span<const double> logits, int role,
                               std::span<double> grad);

// Transition log-probabilities of a lattice restricted to one label sequence:
// blank[t][u] for (t,u) -> (t+1,u), emit[t][u] for (t,u) -> (t,u+1).
struct TransitionScores {
  std::size_t frames = 0;
  std::size_t labels = 0;
  std::vector<double> blank;  // T * (U+1)
  std::vector<double> emit;   // T * (U+1), last column unused
  double& blank_at(std::size_t t, std::size_t u) {
    return blank[t * (labels + 1) + u];
  }
  double blank_at(std::size_t t, std::size_t u) const {
    return blank[t * (labels + 1) + u];
  }
  double& emit_at(std::size_t t, std::size_t u) {
    return emit[t * (labels + 1) + u];
  }
  double emit_at(std::size_t t, std::size_t u) const {
    return emit[t * (labels + 1) + u];
  }
};

TransitionScores rnnt_transition_scores(const LogitLattice& lattice,
                                        std::span<const int> labels);

/// Forward variables alpha(t,u) in log space, flattened [T, U+1].
std::vector<double> transducer_forward(const TransitionScores& scores);
/// Backward variables beta(t,u), including the terminal blank.
std::vector<double> transducer_backward(const TransitionScores& scores);

}  // namespace rdlab

#endif  // RDLAB_LATTICE_H_
