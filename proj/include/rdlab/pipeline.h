// include/rdlab/pipeline.h

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

#ifndef RDLAB_PIPELINE_H_
#define RDLAB_PIPELINE_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rdlab/alignment.h"
#include "rdlab/config.h"
#include "rdlab/decoder.h"
#include "rdlab/metrics.h"
#include "rdlab/models.h"
#include "rdlab/synthdata.h"

namespace rdlab {

/// Decoded utterance. Tokens are subwords only; Role-ASR role tokens are
/// folded into token_roles.
struct Hypothesis {
  std::string id;
  LabelSequence tokens;
  std::vector<int> token_roles;  // -1 when no role information exists
  RoleTranscript words;
  double log_score = 0.0;
  int suppression_triggers = 0;
};

Hypothesis make_hypothesis(const std::string& id, const BeamHypothesis& best,
                           const AsrModelConfig& asr, const Vocabulary& vocab);

/// Decodes every utterance (beam search, or greedy when `greedy`).
std::vector<Hypothesis> decode_dataset(const Dataset& data, const AsrModel& asr,
                                       const RdModel* rd, const Vocabulary& vocab,
                                       const DecodeOptions& options, bool greedy);

std::string serialize_hypotheses(const std::vector<Hypothesis>& hyps,
                                 const Vocabulary& vocab);
std::vector<Hypothesis> parse_hypotheses(const std::string& text, const Vocabulary& vocab);
void write_hypotheses(const std::string& path, const std::vector<Hypothesis>& hyps,
                      const Vocabulary& vocab);
std::vector<Hypothesis> read_hypotheses(const std::string& path, const Vocabulary& vocab);

struct AlignmentRecord {
  std::string id;
  AlignmentPath path;
};

std::vector<AlignmentRecord> align_dataset(const Dataset& data, const AsrModel& asr);
std::string serialize_alignments(const std::vector<AlignmentRecord>& records);
std::vector<AlignmentRecord> parse_alignments(const std::string& text);

/// Matches hypotheses to references by id; a missing id is a data error.
CorpusScore score_hypotheses(const Dataset& refs, const std::vector<Hypothesis>& hyps,
                             const Vocabulary& vocab);

nlohmann::json score_report(const CorpusScore& score, std::size_t top_n);
/// Per-utterance rows followed by a TOTAL row.
std::string score_csv(const CorpusScore& score);

struct SweepRow {
  std::string context;
  std::vector<std::uint64_t> seeds;
  std::vector<double> wer;
  std::vector<double> r_wder;
  double median_wer = 0.0;
  double median_r_wder = 0.0;
};

/// Trains one model per (context, seed) and scores the test split. With
/// sweep.model "role-asr" the Role-ASR predictor context varies; with "rd"
/// one ASR model per seed is shared and the RD predictor context varies.
std::vector<SweepRow> context_sweep(const Corpus& corpus, const RunConfig& config,
                                    const std::function<void(const std::string&)>& log = {});
std::string sweep_csv(const std::vector<SweepRow>& rows);

double median(std::vector<double> values);

}  // namespace rdlab

#endif  // RDLAB_PIPELINE_H_
