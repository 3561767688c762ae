// include/rdlab/training.h

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

#ifndef RDLAB_TRAINING_H_
#define RDLAB_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdlab/alignment.h"
#include "rdlab/decoder.h"
#include "rdlab/models.h"
#include "rdlab/synthdata.h"

namespace rdlab {

struct EpochStats {
  int epoch = 0;
  std::int64_t step = 0;
  double train_loss = 0.0;  // mean over the epoch's utterances
  double val_loss = 0.0;
  std::optional<double> val_metric;  // RD decode-in-the-loop R-WDER
};

struct TrainOptions {
  AdamConfig adam{3e-3, 0.9, 0.999, 1e-8, 1e-6, 100};
  int epochs = 5;
  int batch_size = 8;
  int top_k = 1;              // checkpoints averaged, best validation first
  double clip_norm = 10.0;    // global gradient norm limit; 0 disables
  std::uint64_t seed = 1;
  /// RD only: select by validation R-WDER from greedy decoding instead of
  /// the validation cross-entropy.
  bool select_by_r_wder = false;
  std::function<void(const EpochStats&)> on_epoch;

  void validate() const;
};

struct TrainResult {
  Checkpoint checkpoint;  // average of the top_k epochs
  std::vector<EpochStats> history;
  std::uint64_t asr_hash_before = 0;  // RD training only
  std::uint64_t asr_hash_after = 0;
};

/// Training targets of an utterance: the subword tokens, or for a Role-ASR
/// model (num_roles > 0) the tokens with role tokens closing every turn.
LabelSequence training_targets(const AsrModelConfig& config, const Utterance& utt);

LogitLattice asr_lattice(const AsrModel& model, const Tensor& features,
                         std::span<const int> targets);

/// Forced alignment of the utterance's subword tokens with a frozen ASR model.
AlignmentPath force_align(const AsrModel& model, const Utterance& utt);

/// Mean per-utterance RNNT loss (-ln P) over a dataset.
double asr_dataset_loss(const AsrModel& model, const Dataset& data);

TrainResult train_asr(const Dataset& train, const Dataset& val,
                      const AsrModelConfig& config, const TrainOptions& options);

/// Fills the fields an RD model inherits from its ASR model: encoder input
/// width (the tapped layer) and predictor vocabulary (the subword stream).
RdModelConfig resolve_rd_config(RdModelConfig config, const AsrModelConfig& asr);

/// Trains the role head against forced alignments from the frozen ASR model.
/// `predictor_init` optionally seeds the RD predictor from an ASR or Role-ASR
/// checkpoint. Throws if the ASR parameters change.
TrainResult train_rd(const Dataset& train, const Dataset& val, const AsrModel& asr,
                     const RdModelConfig& config, const TrainOptions& options,
                     const Vocabulary& vocab,
                     const std::optional<Checkpoint>& predictor_init = std::nullopt);

}  // namespace rdlab

#endif  // RDLAB_TRAINING_H_
