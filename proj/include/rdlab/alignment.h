// include/rdlab/alignment.h

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

#ifndef RDLAB_ALIGNMENT_H_
#define RDLAB_ALIGNMENT_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdlab/lattice.h"

namespace rdlab {

inline constexpr int kBlankSymbol = -1;

struct AlignmentStep {
  std::size_t t = 0;
  std::size_t u = 0;
  int symbol = kBlankSymbol;  // label id, or kBlankSymbol
  bool operator==(const AlignmentStep&) const = default;
};

/// One monotone path through a T x (U+1) lattice: T blank steps and U label
/// steps, starting at (0, 0).
struct AlignmentPath {
  std::vector<AlignmentStep> steps;
  double log_prob = 0.0;
};

/// Ordered, unique role names (DOC, PAT, OTH, ...).
class RoleSet {
 public:
  RoleSet() = default;
  explicit RoleSet(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }
  /// Throws std::invalid_argument for unknown names.
  int index(std::string_view name) const;
  bool contains(std::string_view name) const;

  bool operator==(const RoleSet&) const = default;

 private:
  std::vector<std::string> names_;
};

struct RoleTargets {
  std::string utterance_id;
  std::vector<RoleTarget> entries;
};

/// Best single path emitting `labels`. Exact ties prefer the blank
/// transition, so the result is deterministic.
AlignmentPath viterbi_force_align(const LogitLattice& lattice,
                                  std::span<const int> labels);

/// The label steps of a path, in order.
std::vector<AlignmentStep> emission_steps(const AlignmentPath& path);

/// Pairs emission i with token_roles[i].
RoleTargets expand_role_targets(std::span<const AlignmentStep> emissions,
                                std::span<const std::string> token_roles,
                                const RoleSet& roles,
                                std::string utterance_id = {});

/// Index-based overload; role indices must be in [0, roles).
RoleTargets expand_role_targets(std::span<const AlignmentStep> emissions,
                                std::span<const int> token_roles,
                                std::size_t num_roles,
                                std::string utterance_id = {});

/// Inserts the role token (role_token_offset + role) after every maximal run
/// of equal roles.
LabelSequence insert_role_tokens(std::span<const int> tokens,
                                 std::span<const int> token_roles,
                                 int role_token_offset);

/// Removes every token >= role_token_offset.
LabelSequence strip_role_tokens(std::span<const int> tokens,
                                int role_token_offset);

/// Assigns each subword of a Role-ASR output the role of the next role token.
/// Tokens after the last role token take the last seen role (or
/// `fallback_role` when none was emitted).
struct RoleTaggedTokens {
  LabelSequence tokens;
  std::vector<int> roles;
};
RoleTaggedTokens split_role_tokens(std::span<const int> tokens,
                                   int role_token_offset, int fallback_role);

}  // namespace rdlab

#endif  // RDLAB_ALIGNMENT_H_
