// tests/alignment_test.cc

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
#include "rdlab/alignment.h"

using namespace rdlab;

namespace {

LogitLattice random_lattice(std::size_t T, std::size_t U, std::size_t V, std::mt19937_64& rng) {
  return LogitLattice(oracle::random_tensor({T, U + 1, V}, rng, 1.5), 0);
}

std::string moves_of(const AlignmentPath& path) {
  std::string m;
  for (const auto& s : path.steps) m += s.symbol == kBlankSymbol ? 'b' : 'e';
  return m;
}

void check_structure(const AlignmentPath& path, std::size_t T, std::span<const int> labels) {
  std::size_t t = 0, u = 0, blanks = 0;
  for (const auto& s : path.steps) {
    CHECK(s.t == t);
    CHECK(s.u == u);
    if (s.symbol == kBlankSymbol) {
      ++t;
      ++blanks;
    } else {
      CHECK(s.symbol == labels[u]);
      ++u;
    }
  }
  CHECK(blanks == T);
  CHECK(u == labels.size());
  CHECK(path.steps.back().symbol == kBlankSymbol);
}

}  // namespace

TEST_CASE("viterbi: single frame, one label") {
  std::mt19937_64 rng(41);
  const auto lat = random_lattice(1, 1, 3, rng);
  const std::vector<int> labels{2};
  const auto path = viterbi_force_align(lat, labels);
  REQUIRE(path.steps.size() == 2);
  CHECK(path.steps[0] == AlignmentStep{0, 0, 2});
  CHECK(path.steps[1] == AlignmentStep{0, 1, kBlankSymbol});
}

TEST_CASE("viterbi: two frames, no labels") {
  std::mt19937_64 rng(42);
  const auto lat = random_lattice(2, 0, 3, rng);
  const auto path = viterbi_force_align(lat, {});
  CHECK(moves_of(path) == "bb");
  const double want = std::log(oracle::naive_softmax(lat.cell(0, 0), 0)) +
                      std::log(oracle::naive_softmax(lat.cell(1, 0), 0));
  CHECK(std::abs(path.log_prob - want) <= 1e-12);
}

TEST_CASE("viterbi: optimal over exhaustive enumeration") {
  std::mt19937_64 rng(43);
  for (std::size_t T = 1; T <= 4; ++T) {
    for (std::size_t U = 0; U <= 3; ++U) {
      const auto lat = random_lattice(T, U, 4, rng);
      auto labels = oracle::random_labels(U, 3, rng);
      for (int& l : labels) l += 1;
      const auto prob = oracle::rnnt_step_prob(lat, labels);
      const auto path = viterbi_force_align(lat, labels);
      check_structure(path, T, labels);
      const double best = oracle::enumerate_best_path(T, U, prob);
      CHECK(std::abs(path.log_prob - best) <= 1e-10);
      CHECK(std::abs(oracle::path_log_prob(moves_of(path), prob) - path.log_prob) <= 1e-10);
      for (const auto& p : oracle::enumerate_paths(T, U))
        CHECK(path.log_prob >= oracle::path_log_prob(p, prob) - 1e-12);
      CHECK(path.log_prob <= rnnt_log_likelihood(lat, labels) + 1e-12);
    }
  }
}

TEST_CASE("viterbi: exact ties prefer blank") {
  // Uniform logits make every path equally likely. Each cell keeps its
  // incoming blank edge on a tie, so the backtrace walks frames first and
  // the emissions land in the first frame.
  const LogitLattice lat(Tensor({3, 3, 3}), 0);
  const std::vector<int> labels{1, 2};
  CHECK(moves_of(viterbi_force_align(lat, labels)) == "eebbb");
  CHECK_THROWS_AS(viterbi_force_align(LogitLattice(Tensor({0, 3, 3}), 0), labels),
                  std::invalid_argument);
}

TEST_CASE("emission steps") {
  std::mt19937_64 rng(44);
  CHECK(emission_steps(viterbi_force_align(random_lattice(3, 0, 3, rng), {})).empty());

  // Move sequence hello, there, blank, blank, hi, blank.
  AlignmentPath fig{{{0, 0, 10}, {0, 1, 11}, {0, 2, kBlankSymbol}, {1, 2, kBlankSymbol},
                     {2, 2, 12}, {2, 3, kBlankSymbol}},
                    0.0};
  const auto e = emission_steps(fig);
  REQUIRE(e.size() == 3);
  CHECK(e[0] == AlignmentStep{0, 0, 10});
  CHECK(e[1] == AlignmentStep{0, 1, 11});
  CHECK(e[2] == AlignmentStep{2, 2, 12});

  for (std::size_t U = 0; U <= 3; ++U) {
    const auto lat = random_lattice(4, U, 5, rng);
    auto labels = oracle::random_labels(U, 4, rng);
    for (int& l : labels) l += 1;
    const auto steps = emission_steps(viterbi_force_align(lat, labels));
    REQUIRE(steps.size() == U);
    for (std::size_t i = 0; i < U; ++i) CHECK(steps[i].u == i);
  }
}

TEST_CASE("role set") {
  const RoleSet roles({"DOC", "PAT", "OTH"});
  CHECK(roles.index("PAT") == 1);
  CHECK(roles.contains("OTH"));
  CHECK_FALSE(roles.contains("NUR"));
  CHECK_THROWS_AS(roles.index("NUR"), std::invalid_argument);
  CHECK_THROWS_AS(RoleSet({"DOC"}), std::invalid_argument);
  CHECK_THROWS_AS(RoleSet({"DOC", "DOC"}), std::invalid_argument);
}

TEST_CASE("expand role targets") {
  const RoleSet roles({"DOC", "PAT", "OTH"});
  const std::vector<AlignmentStep> e{{0, 0, 10}, {0, 1, 11}, {2, 2, 12}};
  const std::vector<std::string> names{"DOC", "DOC", "PAT"};
  const auto r = expand_role_targets(e, names, roles, "u1");
  CHECK(r.utterance_id == "u1");
  CHECK(r.entries == std::vector<RoleTarget>{{0, 0, 0}, {0, 1, 0}, {2, 2, 1}});

  CHECK(expand_role_targets({}, std::span<const std::string>{}, roles).entries.empty());

  // A word split into three subwords: each subword inherits the word's role.
  const std::vector<AlignmentStep> split{{1, 0, 4}, {1, 1, 5}, {2, 2, 6}};
  const std::vector<std::string> inherited(3, "PAT");
  for (const auto& t : expand_role_targets(split, inherited, roles).entries) CHECK(t.role == 1);

  const std::vector<std::string> unknown{"DOC", "NUR", "PAT"};
  CHECK_THROWS_AS(expand_role_targets(e, unknown, roles), std::invalid_argument);
  const std::vector<std::string> short_roles{"DOC"};
  CHECK_THROWS_AS(expand_role_targets(e, short_roles, roles), std::invalid_argument);
  const std::vector<int> bad_index{0, 3, 1};
  CHECK_THROWS_AS(expand_role_targets(e, bad_index, 3), std::invalid_argument);
}

TEST_CASE("role token insertion") {
  const int offset = 20;  // DOC = 20, PAT = 21
  const std::vector<int> words{10, 11, 12};
  const std::vector<int> roles{0, 0, 1};
  CHECK(insert_role_tokens(words, roles, offset) == LabelSequence{10, 11, 20, 12, 21});

  const std::vector<int> single{7}, single_role{1};
  CHECK(insert_role_tokens(single, single_role, offset) == LabelSequence{7, 21});

  const std::vector<int> alt{1, 2, 3}, alt_roles{0, 1, 0};
  const auto out = insert_role_tokens(alt, alt_roles, offset);
  CHECK(out.size() == 6);
  CHECK(out == LabelSequence{1, 20, 2, 21, 3, 20});

  CHECK_THROWS_AS(insert_role_tokens(alt, single_role, offset), std::invalid_argument);
}

TEST_CASE("role token round trip") {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 50; ++trial) {
    const auto tokens = oracle::random_labels(1 + trial % 9, 20, rng);
    const auto roles = oracle::random_labels(tokens.size(), 3, rng);
    const auto augmented = insert_role_tokens(tokens, roles, 20);
    CHECK(strip_role_tokens(augmented, 20) == tokens);
    const auto split = split_role_tokens(augmented, 20, 0);
    CHECK(split.tokens == tokens);
    CHECK(split.roles == roles);
  }
}

TEST_CASE("split role tokens without trailing role") {
  const std::vector<int> tokens{1, 2, 21, 3, 4};
  const auto s = split_role_tokens(tokens, 20, 0);
  CHECK(s.tokens == LabelSequence{1, 2, 3, 4});
  CHECK(s.roles == std::vector<int>{1, 1, 1, 1});
  const std::vector<int> none{5, 6};
  CHECK(split_role_tokens(none, 20, 2).roles == std::vector<int>{2, 2});
}
