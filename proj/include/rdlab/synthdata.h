// include/rdlab/synthdata.h

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

#ifndef RDLAB_SYNTHDATA_H_
#define RDLAB_SYNTHDATA_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rdlab/alignment.h"
#include "rdlab/lattice.h"
#include "rdlab/metrics.h"
#include "rdlab/numerics.h"
#include "rdlab/transcript.h"

namespace rdlab {

/// Subword inventory plus the role list. Tokens whose string starts with '+'
/// continue the previous word; all others begin a new word.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> tokens, RoleSet roles,
             std::string other_role);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const RoleSet& roles() const { return roles_; }
  const std::string& other_role() const { return other_role_; }
  int index(const std::string& token) const;
  bool is_continuation(int id) const;

  /// Groups subwords into words; a word takes the role of its first subword.
  RoleTranscript detokenize(std::span<const int> tokens,
                            std::span<const int> token_roles) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> tokens_;
  RoleSet roles_;
  std::string other_role_;
};

struct Utterance {
  std::string id;
  Tensor features;  // [T_in, feature_dim]
  LabelSequence tokens;
  RoleTranscript words;
  std::vector<int> token_roles;
  std::vector<std::pair<int, int>> spans;  // gold [begin, end) frames per token
};

using Dataset = std::vector<Utterance>;

struct Corpus {
  Vocabulary vocab;
  Dataset train;
  Dataset val;
  Dataset test;
};

struct SynthConfig {
  int vocab_size = 24;
  std::vector<std::string> roles = {"DOC", "PAT", "OTH"};
  std::string other_role = "OTH";
  /// Probability that a word is drawn from its role's own token subset
  /// rather than from the whole vocabulary. 1 makes roles token-determined.
  double role_unigram_bias = 0.85;
  std::map<std::string, std::map<std::string, double>> turn_transition = {
      {"DOC", {{"PAT", 0.8}, {"OTH", 0.2}}},
      {"PAT", {{"DOC", 0.85}, {"OTH", 0.15}}},
      {"OTH", {{"DOC", 0.6}, {"PAT", 0.4}}}};
  double mean_turn_length = 3.0;
  int min_words = 5;
  int max_words = 15;
  int min_frames_per_token = 2;
  int max_frames_per_token = 3;
  double noise_std = 0.3;
  int min_silence_frames = 1;
  int max_silence_frames = 2;
  /// Each utterance opens with one of two header words that decides which of
  /// DOC/PAT uses which token subset; speaker acoustics become uninformative.
  bool long_dependency = false;
  int subword_split = 1;  // maximum subwords per word
  int feature_dim = 16;
  double speaker_signal = 0.5;
  double second_other_prob = 0.1;
  int num_train = 2000;
  int num_val = 200;
  int num_test = 200;
  std::uint64_t seed = 1;

  void validate() const;
};

void to_json(nlohmann::json& j, const SynthConfig& c);
void from_json(const nlohmann::json& j, SynthConfig& c);

Vocabulary make_vocabulary(const SynthConfig& config);

/// Scoring roles of a vocabulary: the first two roles are doctor and patient.
RoleNames role_names_for(const Vocabulary& vocab);

/// Deterministic given config.seed.
Corpus gen_corpus(const SynthConfig& config);

/// The feature codebook (row vocab_size is silence) used by gen_corpus.
Tensor feature_codebook(const SynthConfig& config);

std::string serialize_dataset(const Dataset& dataset);
Dataset parse_dataset(const std::string& text);
void write_dataset(const std::string& path, const Dataset& dataset);
Dataset read_dataset(const std::string& path);

void write_vocabulary(const std::string& path, const Vocabulary& vocab);
Vocabulary read_vocabulary(const std::string& path);

}  // namespace rdlab

#endif  // RDLAB_SYNTHDATA_H_
