// tests/lattice_test.cc

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

#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.h"
#include "rdlab/lattice.h"

using namespace rdlab;

namespace {

LogitLattice random_lattice(std::size_t T, std::size_t U, std::size_t V, std::mt19937_64& rng,
                            std::optional<std::size_t> blank = 0) {
  return LogitLattice(oracle::random_tensor({T, U + 1, V}, rng, 1.5), blank);
}

Tensor random_blank_probs(std::size_t T, std::size_t U, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(0.05, 0.95);
  Tensor b({T, U + 1});
  for (double& v : b.values()) v = d(rng);
  return b;
}

// Straight-line joiner: explicit loops, no shared helpers.
std::vector<double> direct_joiner(const std::vector<double>& f, const std::vector<double>& g,
                                  const JoinerParams& p) {
  const std::size_t J = p.b_h.size(), V = p.b_s.size();
  std::vector<double> h(J);
  for (std::size_t i = 0; i < J; ++i) {
    double s = p.b_h[i];
    for (std::size_t k = 0; k < f.size(); ++k) s += p.P.at(i, k) * f[k];
    for (std::size_t k = 0; k < g.size(); ++k) s += p.Q.at(i, k) * g[k];
    h[i] = std::tanh(s);
  }
  std::vector<double> out(V);
  for (std::size_t v = 0; v < V; ++v) {
    double s = p.b_s[v];
    for (std::size_t i = 0; i < J; ++i) s += p.A.at(v, i) * h[i];
    out[v] = s;
  }
  return out;
}

}  // namespace

TEST_CASE("joiner: zero parameters give zero logits") {
  JoinerParams p{Tensor({3, 2}), Tensor({3, 2}), Tensor({4, 3}), Tensor({3}), Tensor({4})};
  const std::vector<double> f{0, 0}, g{0, 0};
  for (double v : joiner_forward(f, g, p)) CHECK(v == 0.0);
}

TEST_CASE("joiner: bias passthrough") {
  JoinerParams p{Tensor({3, 2}), Tensor({3, 2}), Tensor({3, 3}), Tensor({3}),
                 Tensor({3}, std::vector<double>{0.5, -1.0, 2.0})};
  for (std::size_t i = 0; i < 3; ++i) p.A.at(i, i) = 1.0;
  const std::vector<double> f{1.0, -3.0}, g{2.0, 0.25};
  const auto out = joiner_forward(f, g, p);
  CHECK(out == std::vector<double>{0.5, -1.0, 2.0});
}

TEST_CASE("joiner: matches direct evaluation") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    JoinerParams p{oracle::random_tensor({5, 3}, rng), oracle::random_tensor({5, 4}, rng),
                   oracle::random_tensor({6, 5}, rng), oracle::random_tensor({5}, rng),
                   oracle::random_tensor({6}, rng)};
    const Tensor f = oracle::random_tensor({3}, rng), g = oracle::random_tensor({4}, rng);
    const std::vector<double> fv(f.values().begin(), f.values().end());
    const std::vector<double> gv(g.values().begin(), g.values().end());
    const auto got = joiner_forward(fv, gv, p);
    const auto want = direct_joiner(fv, gv, p);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-12);
  }
  JoinerParams bad{Tensor({5, 3}), Tensor({5, 4}), Tensor({6, 4}), Tensor({5}), Tensor({6})};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("path enumeration counts") {
  // Paths end with a blank out of the last frame, so the count is C(T-1+U, U).
  CHECK(oracle::enumerate_paths(1, 0).size() == 1);
  CHECK(oracle::enumerate_paths(2, 1).size() == 2);
  CHECK(oracle::enumerate_paths(4, 2).size() == 10);
  CHECK(oracle::enumerate_paths(4, 3).size() == 20);
}

TEST_CASE("rnnt: single frame, no labels") {
  std::mt19937_64 rng(22);
  const auto lat = random_lattice(1, 0, 4, rng, 2);
  const double want = std::log(oracle::naive_softmax(lat.cell(0, 0), 2));
  CHECK(std::abs(rnnt_log_likelihood(lat, {}) - want) <= 1e-12);
}

TEST_CASE("rnnt: two frames, one label, uniform logits") {
  const LogitLattice lat(Tensor({2, 2, 3}), 0);
  const std::vector<int> labels{1};
  CHECK(rnnt_log_likelihood(lat, labels) == doctest::Approx(std::log(2.0 / 27.0)).epsilon(1e-14));
}

TEST_CASE("rnnt: path-sum equivalence") {
  std::mt19937_64 rng(23);
  for (std::size_t T = 1; T <= 4; ++T) {
    for (std::size_t U = 0; U <= 3; ++U) {
      for (std::size_t V = 2; V <= 5; ++V) {
        const auto lat = random_lattice(T, U, V, rng, V - 1);
        auto labels = oracle::random_labels(U, V - 1, rng);
        const double want =
            oracle::enumerate_log_likelihood(T, U, oracle::rnnt_step_prob(lat, labels));
        CHECK(std::abs(rnnt_log_likelihood(lat, labels) - want) <= 1e-9);
      }
    }
  }
}

TEST_CASE("rnnt: contract errors") {
  std::mt19937_64 rng(24);
  const auto lat = random_lattice(2, 1, 3, rng);
  CHECK_THROWS_AS(rnnt_log_likelihood(lat, {}), std::invalid_argument);
  const std::vector<int> blank_label{0};
  CHECK_THROWS_AS(rnnt_log_likelihood(lat, blank_label), std::invalid_argument);
  const auto no_blank = random_lattice(2, 0, 3, rng, std::nullopt);
  CHECK_THROWS_AS(rnnt_log_likelihood(no_blank, {}), std::invalid_argument);
  const std::vector<int> one{1};
  CHECK_THROWS_AS(rnnt_log_likelihood(LogitLattice(Tensor({0, 2, 3}), 0), one),
                  std::invalid_argument);
}

TEST_CASE("rnnt: appending an impossible label drives the likelihood down") {
  std::mt19937_64 rng(25);
  auto lat = random_lattice(3, 2, 4, rng);
  const std::vector<int> labels{1, 2};
  const double base = rnnt_log_likelihood(lat, labels);
  double previous = base;
  for (double penalty : {10.0, 100.0, 1000.0}) {
    Tensor logits = random_lattice(3, 3, 4, rng).logits;
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t u = 0; u < 4; ++u) logits.at(t, u, 3) = -penalty;
    const std::vector<int> extended{1, 2, 3};
    const double lp = rnnt_log_likelihood(LogitLattice(logits, 0), extended);
    CHECK(lp < previous);
    CHECK(lp < -penalty + 5.0);
    previous = lp;
  }
}

TEST_CASE("rnnt gradients: single frame is softmax minus onehot") {
  std::mt19937_64 rng(26);
  const auto lat = random_lattice(1, 0, 5, rng, 3);
  const auto r = rnnt_gradients(lat, {});
  for (std::size_t k = 0; k < 5; ++k) {
    const double want = oracle::naive_softmax(lat.cell(0, 0), k) - (k == 3 ? 1.0 : 0.0);
    CHECK(std::abs(r.gradient.at(0, 0, k) - want) <= 1e-12);
  }
}

TEST_CASE("rnnt gradients: unreachable cells get zero gradient") {
  // With T=1 and U=2 only the cells (0, u) are on a path; a second frame is
  // never entered when all labels must be emitted in the first one.
  std::mt19937_64 rng(27);
  const auto lat = random_lattice(1, 2, 4, rng);
  const std::vector<int> labels{1, 3};
  const auto r = rnnt_gradients(lat, labels);
  double mass = 0.0;
  for (double v : r.gradient.values()) mass += std::abs(v);
  CHECK(mass > 0.0);
  // Now T=3, U=1: cell (0,1) is reachable, every cell is. Force the label
  // probability to zero at (0,0) and (1,0) so emission happens at t=2 only;
  // then (0,1) and (1,1) are unreachable.
  Tensor logits = random_lattice(3, 1, 3, rng).logits;
  logits.at(0, 0, 1) = -std::numeric_limits<double>::infinity();
  logits.at(1, 0, 1) = -std::numeric_limits<double>::infinity();
  const std::vector<int> one{1};
  const auto r2 = rnnt_gradients(LogitLattice(logits, 0), one);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(r2.gradient.at(0, 1, k) == 0.0);
    CHECK(r2.gradient.at(1, 1, k) == 0.0);
  }
}

TEST_CASE("rnnt gradients: finite differences") {
  std::mt19937_64 rng(28);
  for (std::size_t U = 0; U <= 3; ++U) {
    auto lat = random_lattice(5, U, 4, rng);
    const auto labels = oracle::random_labels(U, 3, rng);
    std::vector<int> shifted = labels;
    for (int& l : shifted) l += 1;
    const auto r = rnnt_gradients(lat, shifted);
    CHECK(std::abs(r.log_likelihood - rnnt_log_likelihood(lat, shifted)) <= 1e-12);
    std::vector<double*> coords;
    for (std::size_t i = 0; i < lat.logits.size(); ++i) coords.push_back(lat.logits.data() + i);
    const auto numeric =
        oracle::numeric_gradient([&] { return -rnnt_log_likelihood(lat, shifted); }, coords);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      INFO("coordinate " << i << " U=" << U);
      CHECK(oracle::gradients_close(r.gradient.data()[i], numeric[i]));
    }
  }
}

TEST_CASE("hat: blank probability") {
  Tensor logits({1, 2, 3});
  logits.at(0, 1, 0) = 800.0;
  const LogitLattice lat(logits, 0);
  const Tensor b = hat_blank_probability(lat);
  CHECK(b.at(0, 0) == 0.5);
  CHECK(b.at(0, 1) == 1.0);
  std::mt19937_64 rng(29);
  const auto r = random_lattice(3, 2, 5, rng, 4);
  const Tensor br = hat_blank_probability(r);
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t u = 0; u < 3; ++u)
      CHECK(std::abs(br.at(t, u) - 1.0 / (1.0 + std::exp(-r.logits.at(t, u, 4)))) <= 1e-12);
  CHECK_THROWS_AS(hat_blank_probability(random_lattice(1, 0, 3, rng, std::nullopt)),
                  std::invalid_argument);
}

TEST_CASE("hat: label distribution") {
  const LogitLattice flat(Tensor({1, 1, 5}), 0);
  const Tensor d = hat_label_distribution(flat);
  CHECK(d.shape() == Shape{1, 1, 4});
  for (double v : d.values()) CHECK(v == doctest::Approx(0.125).epsilon(1e-15));

  Tensor saturated({1, 1, 3});
  saturated.at(0, 0, 1) = 800.0;
  const Tensor sd = hat_label_distribution(LogitLattice(saturated, 1));
  for (double v : sd.values()) CHECK(v < 1e-300);

  std::mt19937_64 rng(30);
  for (std::size_t blank = 0; blank < 4; ++blank) {
    const auto lat = random_lattice(3, 2, 4, rng, blank);
    const Tensor b = hat_blank_probability(lat);
    const Tensor labels = hat_label_distribution(lat);
    for (std::size_t t = 0; t < 3; ++t) {
      for (std::size_t u = 0; u < 3; ++u) {
        double s = b.at(t, u);
        for (std::size_t k = 0; k < 3; ++k) s += labels.at(t, u, k);
        CHECK(std::abs(s - 1.0) <= 1e-12);
        // Non-blank entries keep vocabulary order with the blank removed.
        std::vector<double> rest;
        for (std::size_t k = 0; k < 4; ++k)
          if (k != blank) rest.push_back(lat.logits.at(t, u, k));
        for (std::size_t k = 0; k < 3; ++k) {
          const double want = (1.0 - b.at(t, u)) * oracle::naive_softmax(rest, k);
          CHECK(std::abs(labels.at(t, u, k) - want) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("hat: likelihood is a path sum over factorized steps") {
  std::mt19937_64 rng(31);
  for (std::size_t T = 1; T <= 3; ++T) {
    for (std::size_t U = 0; U <= 2; ++U) {
      const auto lat = random_lattice(T, U, 4, rng, 0);
      std::vector<int> labels = oracle::random_labels(U, 3, rng);
      for (int& l : labels) l += 1;
      const Tensor b = hat_blank_probability(lat);
      const Tensor d = hat_label_distribution(lat);
      const oracle::StepProb prob = [&](std::size_t t, std::size_t u, bool blank) {
        return blank ? b.at(t, u) : d.at(t, u, static_cast<std::size_t>(labels[u] - 1));
      };
      CHECK(std::abs(hat_log_likelihood(lat, labels) -
                     oracle::enumerate_log_likelihood(T, U, prob)) <= 1e-9);
    }
  }
}

TEST_CASE("shared blank: single step is ln b") {
  const LogitLattice aux(Tensor({1, 1, 2}), std::nullopt);
  const Tensor b({1, 1}, std::vector<double>{0.3});
  CHECK(rnnt_loss_shared_blank(aux, b, {}) == doctest::Approx(std::log(0.3)));
}

TEST_CASE("shared blank: hand enumeration with uniform logits") {
  // Two paths, each with two blanks (0.5 each) and one emission of
  // (1 - 0.5) * 1/2.
  const LogitLattice aux(Tensor({2, 2, 2}), std::nullopt);
  const Tensor b({2, 2}, 0.5);
  const std::vector<int> labels{1};
  CHECK(rnnt_loss_shared_blank(aux, b, labels) ==
        doctest::Approx(std::log(2 * 0.5 * 0.5 * 0.25)).epsilon(1e-14));
}

TEST_CASE("shared blank: path-sum equivalence") {
  std::mt19937_64 rng(32);
  for (std::size_t T = 1; T <= 4; ++T) {
    for (std::size_t U = 0; U <= 3; ++U) {
      for (std::size_t V = 2; V <= 5; ++V) {
        const auto aux = random_lattice(T, U, V, rng, std::nullopt);
        const Tensor b = random_blank_probs(T, U, rng);
        const auto labels = oracle::random_labels(U, V, rng);
        const double want = oracle::enumerate_log_likelihood(
            T, U, oracle::shared_blank_step_prob(aux, b, labels));
        CHECK(std::abs(rnnt_loss_shared_blank(aux, b, labels) - want) <= 1e-9);
      }
    }
  }
}

TEST_CASE("shared blank: probabilities must lie strictly inside (0,1)") {
  const LogitLattice aux(Tensor({1, 1, 2}), std::nullopt);
  CHECK_THROWS_AS(rnnt_loss_shared_blank(aux, Tensor({1, 1}, 1.0), {}), std::invalid_argument);
  CHECK_THROWS_AS(rnnt_loss_shared_blank(aux, Tensor({1, 1}, 0.0), {}), std::invalid_argument);
  CHECK_THROWS_AS(rnnt_loss_shared_blank(aux, Tensor({1, 2}, 0.5), {}), std::invalid_argument);
}

TEST_CASE("rd cross entropy: examples") {
  const LogitLattice flat(Tensor({2, 2, 3}), std::nullopt);
  const std::vector<RoleTarget> one{{1, 0, 2}};
  CHECK(rd_cross_entropy(flat, one).loss == doctest::Approx(std::log(3.0)).epsilon(1e-15));

  const auto empty = rd_cross_entropy(flat, {});
  CHECK(empty.loss == 0.0);
  for (double v : empty.gradient.values()) CHECK(v == 0.0);

  Tensor logits({2, 2, 3});
  logits.at(0, 0, 0) = 2.0;
  logits.at(0, 0, 1) = -1.0;
  logits.at(1, 1, 2) = 0.5;
  logits.at(1, 1, 0) = 1.5;
  const LogitLattice lat(logits, std::nullopt);
  const std::vector<RoleTarget> two{{0, 0, 1}, {1, 1, 2}};
  const double want = -std::log(oracle::naive_softmax(lat.cell(0, 0), 1)) -
                      std::log(oracle::naive_softmax(lat.cell(1, 1), 2));
  CHECK(std::abs(rd_cross_entropy(lat, two).loss - want) <= 1e-12);

  const std::vector<RoleTarget> outside{{2, 0, 0}};
  CHECK_THROWS_AS(rd_cross_entropy(lat, outside), std::invalid_argument);
  const std::vector<RoleTarget> bad_role{{0, 0, 3}};
  CHECK_THROWS_AS(rd_cross_entropy(lat, bad_role), std::invalid_argument);
}

TEST_CASE("rd cross entropy: gradient locality and finite differences") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 5; ++trial) {
    auto lat = random_lattice(4, 3, 3, rng, std::nullopt);
    const std::vector<RoleTarget> targets{{0, 0, 1}, {2, 1, 0}, {3, 2, 2}};
    const auto r = rd_cross_entropy(lat, targets);
    for (std::size_t t = 0; t < 4; ++t) {
      for (std::size_t u = 0; u < 4; ++u) {
        bool named = false;
        for (const auto& x : targets) named |= x.t == t && x.u == u;
        if (named) continue;
        for (std::size_t k = 0; k < 3; ++k) CHECK(r.gradient.at(t, u, k) == 0.0);
      }
    }
    std::vector<double*> coords;
    for (std::size_t i = 0; i < lat.logits.size(); ++i) coords.push_back(lat.logits.data() + i);
    const auto numeric =
        oracle::numeric_gradient([&] { return rd_cross_entropy(lat, targets).loss; }, coords);
    for (std::size_t i = 0; i < numeric.size(); ++i)
      CHECK(oracle::gradients_close(r.gradient.data()[i], numeric[i]));
  }
}

TEST_CASE("forward and backward variables agree on the total") {
  std::mt19937_64 rng(34);
  const auto lat = random_lattice(4, 2, 4, rng);
  const std::vector<int> labels{1, 3};
  const auto s = rnnt_transition_scores(lat, labels);
  const auto alpha = transducer_forward(s);
  const auto beta = transducer_backward(s);
  const double total = rnnt_log_likelihood(lat, labels);
  CHECK(std::abs(beta[0] - total) <= 1e-12);
  // Every frame is crossed by every path exactly once along some u.
  for (std::size_t t = 0; t < 4; ++t) {
    std::vector<double> cut;
    for (std::size_t u = 0; u <= 2; ++u) {
      const std::size_t i = t * 3 + u;
      const double out_blank =
          t + 1 < 4 ? beta[(t + 1) * 3 + u] : (u == 2 ? 0.0 : kLogZero);
      cut.push_back(alpha[i] + s.blank_at(t, u) + out_blank);
    }
    CHECK(std::abs(oracle::naive_logsumexp(cut) - total) <= 1e-10);
  }
}
