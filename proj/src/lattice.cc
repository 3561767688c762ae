// src/lattice.cc

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

#include "rdlab/lattice.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rdlab {

namespace {

void check_labels(const LogitLattice& lattice, std::span<const int> labels,
                  bool needs_blank) {
  if (lattice.logits.rank() != 3) {
    throw std::invalid_argument("lattice logits must have rank 3");
  }
  if (needs_blank && !lattice.blank) {
    throw std::invalid_argument("lattice has no blank index");
  }
  if (labels.size() != lattice.labels()) {
    throw std::invalid_argument("label count " + std::to_string(labels.size()) +
                                " does not match lattice U=" +
                                std::to_string(lattice.labels()));
  }
  if (lattice.frames() == 0) {
    throw std::invalid_argument("lattice has no frames: no valid path");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= lattice.vocab_size() ||
        (lattice.blank && static_cast<std::size_t>(y) == *lattice.blank)) {
      throw std::invalid_argument("label " + std::to_string(y) +
                                  " is not a valid non-blank token");
    }
  }
}

}  // namespace

void JoinerParams::validate() const {
  const bool ok = P.rank() == 2 && Q.rank() == 2 && A.rank() == 2 &&
                  b_h.rank() == 1 && b_s.rank() == 1 &&
                  P.dim(0) == Q.dim(0) && A.dim(1) == P.dim(0) &&
                  b_h.dim(0) == P.dim(0) && b_s.dim(0) == A.dim(0);
  if (!ok) throw std::invalid_argument("JoinerParams: inconsistent dimensions");
}

std::vector<double> joiner_forward(std::span<const double> f,
                                   std::span<const double> g,
                                   const JoinerParams& params) {
  params.validate();
  if (f.size() != params.P.dim(1) || g.size() != params.Q.dim(1)) {
    throw std::invalid_argument("joiner_forward: input dimension mismatch");
  }
  std::vector<double> h(params.b_h.values().begin(), params.b_h.values().end());
  gemv_acc(params.P, f, h);
  gemv_acc(params.Q, g, h);
  for (double& x : h) x = std::tanh(x);
  std::vector<double> out(params.b_s.values().begin(),
                          params.b_s.values().end());
  gemv_acc(params.A, h, out);
  return out;
}

LogitLattice::LogitLattice(Tensor logits_in, std::optional<std::size_t> blank_in)
    : logits(std::move(logits_in)), blank(blank_in) {
  if (logits.rank() != 3 || logits.dim(1) == 0 || logits.dim(2) == 0) {
    throw std::invalid_argument("LogitLattice: logits must be [T, U+1, V]");
  }
  if (blank && *blank >= logits.dim(2)) {
    throw std::invalid_argument("LogitLattice: blank index out of range");
  }
}

TransitionScores rnnt_transition_scores(const LogitLattice& lattice,
                                        std::span<const int> labels) {
  check_labels(lattice, labels, true);
  const std::size_t T = lattice.frames(), U = lattice.labels();
  const std::size_t blank = *lattice.blank;
  TransitionScores s{T, U, std::vector<double>(T * (U + 1)),
                     std::vector<double>(T * (U + 1), kLogZero)};
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u <= U; ++u) {
      auto cell = lattice.cell(t, u);
      const double lse = logsumexp(cell);
      s.blank_at(t, u) = cell[blank] - lse;
      if (u < U) s.emit_at(t, u) = cell[labels[u]] - lse;
    }
  }
  return s;
}

std::vector<double> transducer_forward(const TransitionScores& s) {
  const std::size_t T = s.frames, U = s.labels;
  std::vector<double> alpha(T * (U + 1), kLogZero);
  auto a = [&](std::size_t t, std::size_t u) -> double& {
    return alpha[t * (U + 1) + u];
  };
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u <= U; ++u) {
      if (t == 0 && u == 0) {
        a(t, u) = 0.0;
        continue;
      }
      double v = kLogZero;
      if (t > 0) v = a(t - 1, u) + s.blank_at(t - 1, u);
      if (u > 0) v = log_add(v, a(t, u - 1) + s.emit_at(t, u - 1));
      a(t, u) = v;
    }
  }
  return alpha;
}

std::vector<double> transducer_backward(const TransitionScores& s) {
  const std::size_t T = s.frames, U = s.labels;
  std::vector<double> beta(T * (U + 1), kLogZero);
  auto b = [&](std::size_t t, std::size_t u) -> double& {
    return beta[t * (U + 1) + u];
  };
  for (std::size_t tt = T; tt-- > 0;) {
    for (std::size_t uu = U + 1; uu-- > 0;) {
      if (tt == T - 1 && uu == U) {
        b(tt, uu) = s.blank_at(tt, uu);
        continue;
      }
      double v = kLogZero;
      if (tt + 1 < T) v = b(tt + 1, uu) + s.blank_at(tt, uu);
      if (uu < U) v = log_add(v, b(tt, uu + 1) + s.emit_at(tt, uu));
      b(tt, uu) = v;
    }
  }
  return beta;
}

namespace {

double terminal_log_likelihood(const TransitionScores& s) {
  const auto alpha = transducer_forward(s);
  const std::size_t T = s.frames, U = s.labels;
  return alpha[(T - 1) * (U + 1) + U] + s.blank_at(T - 1, U);
}

}  // namespace

double rnnt_log_likelihood(const LogitLattice& lattice,
                           std::span<const int> labels) {
  return terminal_log_likelihood(rnnt_transition_scores(lattice, labels));
}

RnntResult rnnt_gradients(const LogitLattice& lattice,
                          std::span<const int> labels) {
  const TransitionScores s = rnnt_transition_scores(lattice, labels);
  const std::size_t T = s.frames, U = s.labels, V = lattice.vocab_size();
  const std::size_t blank = *lattice.blank;
  const auto alpha = transducer_forward(s);
  const auto beta = transducer_backward(s);
  const double log_p = beta[0];

  RnntResult result{log_p, Tensor({T, U + 1, V})};
  std::vector<double> probs(V);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u <= U; ++u) {
      const double a = alpha[t * (U + 1) + u];
      const double occupancy = std::exp(a + beta[t * (U + 1) + u] - log_p);
      if (!(occupancy > 0.0)) continue;
      auto cell = lattice.cell(t, u);
      probs.assign(cell.begin(), cell.end());
      softmax_inplace(probs);
      auto grad = result.gradient.slice(t, u);
      for (std::size_t k = 0; k < V; ++k) grad[k] = occupancy * probs[k];
      const double next_blank =
          (t + 1 < T) ? beta[(t + 1) * (U + 1) + u] : (u == U ? 0.0 : kLogZero);
      grad[blank] -= std::exp(a + s.blank_at(t, u) + next_blank - log_p);
      if (u < U) {
        grad[labels[u]] -=
            std::exp(a + s.emit_at(t, u) + beta[t * (U + 1) + u + 1] - log_p);
      }
    }
  }
  return result;
}

Tensor hat_blank_probability(const LogitLattice& lattice) {
  if (!lattice.blank) throw std::invalid_argument("lattice has no blank index");
  const std::size_t T = lattice.frames(), U1 = lattice.labels() + 1;
  Tensor b({T, U1});
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u < U1; ++u) {
      b.at(t, u) = sigmoid(lattice.cell(t, u)[*lattice.blank]);
    }
  }
  return b;
}

Tensor hat_label_distribution(const LogitLattice& lattice) {
  if (!lattice.blank) throw std::invalid_argument("lattice has no blank index");
  const std::size_t T = lattice.frames(), U1 = lattice.labels() + 1;
  const std::size_t V = lattice.vocab_size(), blank = *lattice.blank;
  Tensor out({T, U1, V - 1});
  std::vector<double> buf(V - 1);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u < U1; ++u) {
      auto cell = lattice.cell(t, u);
      for (std::size_t k = 0, j = 0; k < V; ++k) {
        if (k != blank) buf[j++] = cell[k];
      }
      softmax_inplace(buf);
      const double keep = sigmoid(-cell[blank]);
      auto dst = out.slice(t, u);
      for (std::size_t j = 0; j + 1 < V; ++j) dst[j] = keep * buf[j];
    }
  }
  return out;
}

double hat_log_likelihood(const LogitLattice& lattice,
                          std::span<const int> labels) {
  check_labels(lattice, labels, true);
  const std::size_t T = lattice.frames(), U = lattice.labels();
  const std::size_t V = lattice.vocab_size(), blank = *lattice.blank;
  TransitionScores s{T, U, std::vector<double>(T * (U + 1)),
                     std::vector<double>(T * (U + 1), kLogZero)};
  std::vector<double> buf;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u <= U; ++u) {
      auto cell = lattice.cell(t, u);
      s.blank_at(t, u) = log_sigmoid(cell[blank]);
      if (u < U) {
        buf.clear();
        for (std::size_t k = 0; k < V; ++k) {
          if (k != blank) buf.push_back(cell[k]);
        }
        s.emit_at(t, u) =
            log_sigmoid(-cell[blank]) + cell[labels[u]] - logsumexp(buf);
      }
    }
  }
  return terminal_log_likelihood(s);
}

double rnnt_loss_shared_blank(const LogitLattice& aux_lattice,
                              const Tensor& shared_blank,
                              std::span<const int> labels) {
  check_labels(aux_lattice, labels, false);
  if (aux_lattice.blank) {
    throw std::invalid_argument(
        "rnnt_loss_shared_blank: auxiliary lattice must not carry a blank");
  }
  const std::size_t T = aux_lattice.frames(), U = aux_lattice.labels();
  if (shared_blank.shape() != Shape{T, U + 1}) {
    throw std::invalid_argument("shared blank must have shape [T, U+1]");
  }
  for (double b : shared_blank.values()) {
    if (!(b > 0.0 && b < 1.0)) {
      throw std::invalid_argument("shared blank probabilities must be in (0,1)");
    }
  }
  TransitionScores s{T, U, std::vector<double>(T * (U + 1)),
                     std::vector<double>(T * (U + 1), kLogZero)};
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u <= U; ++u) {
      const double b = shared_blank.at(t, u);
      s.blank_at(t, u) = std::log(b);
      if (u < U) {
        auto cell = aux_lattice.cell(t, u);
        s.emit_at(t, u) = std::log1p(-b) + cell[labels[u]] - logsumexp(cell);
      }
    }
  }
  return terminal_log_likelihood(s);
}

double role_cross_entropy_cell(std::span<const double> logits, int role,
                               std::span<double> grad) {
  if (role < 0 || static_cast<std::size_t>(role) >= logits.size()) {
    throw std::invalid_argument("role index out of range");
  }
  const double lse = logsumexp(logits);
  for (std::size_t k = 0; k < logits.size(); ++k) {
    grad[k] = std::exp(logits[k] - lse);
  }
  grad[role] -= 1.0;
  return lse - logits[role];
}

CrossEntropyResult rd_cross_entropy(const LogitLattice& rd_lattice,
                                    std::span<const RoleTarget> targets) {
  const std::size_t T = rd_lattice.frames(), U1 = rd_lattice.labels() + 1;
  CrossEntropyResult result{0.0, Tensor(rd_lattice.logits.shape())};
  std::vector<double> g(rd_lattice.vocab_size());
  for (const RoleTarget& target : targets) {
    if (target.t >= T || target.u >= U1) {
      throw std::invalid_argument("role target (" + std::to_string(target.t) +
                                  ", " + std::to_string(target.u) +
                                  ") outside the lattice");
    }
    result.loss +=
        role_cross_entropy_cell(rd_lattice.cell(target.t, target.u), target.role, g);
    axpy(1.0, g, result.gradient.slice(target.t, target.u));
  }
  return result;
}

}  // namespace rdlab
