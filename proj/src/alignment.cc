// src/alignment.cc

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

#include "rdlab/alignment.h"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace rdlab {

RoleSet::RoleSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) {
    throw std::invalid_argument("RoleSet needs at least two roles");
  }
  std::set<std::string> seen(names_.begin(), names_.end());
  if (seen.size() != names_.size()) {
    throw std::invalid_argument("RoleSet names must be unique");
  }
}

int RoleSet::index(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw std::invalid_argument("unknown role '" + std::string(name) + "'");
  }
  return static_cast<int>(it - names_.begin());
}

bool RoleSet::contains(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

AlignmentPath viterbi_force_align(const LogitLattice& lattice,
                                  std::span<const int> labels) {
  const TransitionScores s = rnnt_transition_scores(lattice, labels);
  const std::size_t T = s.frames, U = s.labels;
  std::vector<double> delta(T * (U + 1), kLogZero);
  // true when the best way into (t,u) is a blank from (t-1,u)
  std::vector<char> from_blank(T * (U + 1), 0);
  auto idx = [U](std::size_t t, std::size_t u) { return t * (U + 1) + u; };
  delta[0] = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t u = 0; u <= U; ++u) {
      if (t == 0 && u == 0) continue;
      double via_blank = kLogZero, via_emit = kLogZero;
      if (t > 0) via_blank = delta[idx(t - 1, u)] + s.blank_at(t - 1, u);
      if (u > 0) via_emit = delta[idx(t, u - 1)] + s.emit_at(t, u - 1);
      if (t > 0 && via_blank >= via_emit) {
        delta[idx(t, u)] = via_blank;
        from_blank[idx(t, u)] = 1;
      } else {
        delta[idx(t, u)] = via_emit;
      }
    }
  }

  AlignmentPath path;
  path.log_prob = delta[idx(T - 1, U)] + s.blank_at(T - 1, U);
  path.steps.reserve(T + U);
  path.steps.push_back({T - 1, U, kBlankSymbol});
  std::size_t t = T - 1, u = U;
  while (t > 0 || u > 0) {
    if (from_blank[idx(t, u)]) {
      --t;
      path.steps.push_back({t, u, kBlankSymbol});
    } else {
      --u;
      path.steps.push_back({t, u, labels[u]});
    }
  }
  std::reverse(path.steps.begin(), path.steps.end());
  return path;
}

std::vector<AlignmentStep> emission_steps(const AlignmentPath& path) {
  std::vector<AlignmentStep> out;
  for (const auto& step : path.steps) {
    if (step.symbol != kBlankSymbol) out.push_back(step);
  }
  return out;
}

RoleTargets expand_role_targets(std::span<const AlignmentStep> emissions,
                                std::span<const int> token_roles,
                                std::size_t num_roles,
                                std::string utterance_id) {
  if (emissions.size() != token_roles.size()) {
    throw std::invalid_argument("expand_role_targets: " +
                                std::to_string(emissions.size()) +
                                " emissions but " +
                                std::to_string(token_roles.size()) + " roles");
  }
  RoleTargets targets{std::move(utterance_id), {}};
  targets.entries.reserve(emissions.size());
  for (std::size_t i = 0; i < emissions.size(); ++i) {
    const int role = token_roles[i];
    if (role < 0 || static_cast<std::size_t>(role) >= num_roles) {
      throw std::invalid_argument("role index " + std::to_string(role) +
                                  " out of range");
    }
    targets.entries.push_back({emissions[i].t, emissions[i].u, role});
  }
  return targets;
}

RoleTargets expand_role_targets(std::span<const AlignmentStep> emissions,
                                std::span<const std::string> token_roles,
                                const RoleSet& roles, std::string utterance_id) {
  std::vector<int> indices;
  indices.reserve(token_roles.size());
  for (const auto& name : token_roles) indices.push_back(roles.index(name));
  return expand_role_targets(emissions, indices, roles.size(),
                             std::move(utterance_id));
}

LabelSequence insert_role_tokens(std::span<const int> tokens,
                                 std::span<const int> token_roles,
                                 int role_token_offset) {
  if (tokens.size() != token_roles.size()) {
    throw std::invalid_argument("insert_role_tokens: length mismatch");
  }
  LabelSequence out;
  out.reserve(tokens.size() * 2);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.push_back(tokens[i]);
    const bool turn_end =
        i + 1 == tokens.size() || token_roles[i + 1] != token_roles[i];
    if (turn_end) out.push_back(role_token_offset + token_roles[i]);
  }
  return out;
}

LabelSequence strip_role_tokens(std::span<const int> tokens,
                                int role_token_offset) {
  LabelSequence out;
  for (int tok : tokens) {
    if (tok < role_token_offset) out.push_back(tok);
  }
  return out;
}

RoleTaggedTokens split_role_tokens(std::span<const int> tokens,
                                   int role_token_offset, int fallback_role) {
  RoleTaggedTokens out;
  int last_role = -1;
  for (int tok : tokens) {
    if (tok >= role_token_offset) {
      last_role = tok - role_token_offset;
      out.roles.resize(out.tokens.size(), last_role);
    } else {
      out.tokens.push_back(tok);
    }
  }
  out.roles.resize(out.tokens.size(), last_role >= 0 ? last_role : fallback_role);
  return out;
}

}  // namespace rdlab
