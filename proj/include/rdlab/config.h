// include/rdlab/config.h

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

#ifndef RDLAB_CONFIG_H_
#define RDLAB_CONFIG_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rdlab/decoder.h"
#include "rdlab/models.h"
#include "rdlab/synthdata.h"
#include "rdlab/training.h"

namespace rdlab {

struct SuppressionSettings {
  bool enabled = false;
  double alpha = 0.1;
  double beta = 0.99;
  std::vector<std::string> tokens = {"yeah", "okay"};
  int min_gap = 3;
  double suppressed_blank_value = 0.01;
};

struct DecodeSettings {
  int beam_size = 20;
  int max_symbols_per_frame = 10;
  bool hat = false;
  bool greedy = false;
  SuppressionSettings suppression;

  /// Maps suppression token strings to ids; unknown tokens are an error.
  DecodeOptions options(const Vocabulary& vocab) const;
};

struct SweepSettings {
  std::vector<std::string> contexts = {"1", "2", "4", "rnn"};
  std::string model = "role-asr";  // or "rd"
  std::vector<std::uint64_t> seeds = {1, 2, 3};
};

/// Every setting a command may need. Model widths that follow from the data
/// (vocabulary and feature sizes) are filled in by the resolve_* helpers.
struct RunConfig {
  SynthConfig data;
  AsrModelConfig asr;
  TrainOptions asr_train;
  AsrModelConfig role_asr;
  TrainOptions role_asr_train;
  RdModelConfig rd;
  TrainOptions rd_train;
  DecodeSettings decode;
  SweepSettings sweep;

  RunConfig();
};

nlohmann::json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Sets one dotted key path from "a.b.c=value". The value is parsed as JSON
/// when possible and kept as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

/// Defaults, then the optional file (merged key by key), then overrides.
RunConfig load_run_config(const std::optional<std::string>& path,
                          std::span<const std::string> overrides);

/// Output and predictor vocabularies from the data; Role-ASR adds role labels.
AsrModelConfig resolve_asr_config(AsrModelConfig config, const Vocabulary& vocab,
                                  int feature_dim, bool role_asr);

/// "1", "2", "cnn-4" select a CNN with that context; "rnn" a recurrent one.
PredictorConfig predictor_for_context(PredictorConfig base, const std::string& context);

void to_json(nlohmann::json& j, const TrainOptions& o);
void from_json(const nlohmann::json& j, TrainOptions& o);

}  // namespace rdlab

#endif  // RDLAB_CONFIG_H_
