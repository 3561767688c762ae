// include/rdlab/decoder.h

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

#ifndef RDLAB_DECODER_H_
#define RDLAB_DECODER_H_

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rdlab/lattice.h"
#include "rdlab/models.h"
#include "rdlab/numerics.h"

namespace rdlab {

/// Gap counter value of a hypothesis that has never triggered suppression.
inline constexpr int kNeverSuppressed = 1 << 20;

struct SuppressionConfig {
  double alpha = 0.1;
  double beta = 0.99;
  std::vector<int> suppression_set;  // token ids eligible for suppression
  int min_gap = 3;
  double suppressed_blank_value = 0.01;

  void validate() const;
};

struct BeamHypothesis {
  LabelSequence tokens;
  std::vector<int> roles;  // one per token; -1 without a role head
  double log_score = 0.0;
  int steps_since_suppression = kNeverSuppressed;
  int suppression_triggers = 0;
};

struct StepPosteriors {
  std::vector<double> asr;
  std::vector<double> rd;
};

StepPosteriors step_posteriors(std::span<const double> asr_logits,
                               std::span<const double> rd_logits);

/// HAT assembly: sigmoid of the blank logit for blank, the remaining mass
/// spread over labels by a softmax of the label logits.
std::vector<double> hat_posteriors(std::span<const double> asr_logits,
                                   std::size_t blank);

struct SuppressionResult {
  std::vector<double> p_asr;
  bool triggered = false;
};

/// Blank suppression gate. Fires when the best non-blank token is in the
/// suppression set with probability >= alpha, the best role has probability
/// >= beta and at least min_gap steps passed since the last trigger. The
/// blank entry is then replaced and the vector renormalized.
SuppressionResult suppress_blank(std::span<const double> p_asr,
                                 std::span<const double> p_rd, std::size_t blank,
                                 const SuppressionConfig& config,
                                 int steps_since);

/// Source of per-step logits for a (frame, token prefix) pair.
class StepScorer {
 public:
  virtual ~StepScorer() = default;
  virtual std::size_t frames() const = 0;
  virtual std::size_t blank() const = 0;
  virtual bool has_roles() const = 0;
  /// rd_logits is left empty when there is no role head.
  virtual void score(std::size_t t, const LabelSequence& prefix,
                     std::vector<double>& asr_logits,
                     std::vector<double>& rd_logits) = 0;
};

/// Wraps a callable; convenient for fixtures and brute-force tests.
class FunctionScorer : public StepScorer {
 public:
  using Fn = std::function<void(std::size_t, const LabelSequence&,
                                std::vector<double>&, std::vector<double>&)>;
  FunctionScorer(std::size_t frames, std::size_t blank, bool has_roles, Fn fn)
      : frames_(frames), blank_(blank), has_roles_(has_roles), fn_(std::move(fn)) {}

  std::size_t frames() const override { return frames_; }
  std::size_t blank() const override { return blank_; }
  bool has_roles() const override { return has_roles_; }
  void score(std::size_t t, const LabelSequence& prefix,
             std::vector<double>& asr_logits,
             std::vector<double>& rd_logits) override {
    fn_(t, prefix, asr_logits, rd_logits);
  }

 private:
  std::size_t frames_;
  std::size_t blank_;
  bool has_roles_;
  Fn fn_;
};

/// Runs the encoders once and evaluates the joiners lazily per prefix,
/// caching predictor states. The RD head (optional) follows the same token
/// prefix as the ASR predictor.
class ModelScorer : public StepScorer {
 public:
  ModelScorer(const AsrModel& asr, const RdModel* rd, const Tensor& features);

  std::size_t frames() const override { return asr_enc_.size(); }
  std::size_t blank() const override { return asr_.blank(); }
  bool has_roles() const override { return rd_ != nullptr; }
  void score(std::size_t t, const LabelSequence& prefix,
             std::vector<double>& asr_logits,
             std::vector<double>& rd_logits) override;

 private:
  struct PrefixState {
    Predictor::State asr;
    std::vector<double> asr_proj;
    Predictor::State rd;
    std::vector<double> rd_proj;
  };
  const PrefixState& state(const LabelSequence& prefix);

  const AsrModel& asr_;
  const RdModel* rd_;
  std::vector<std::vector<double>> asr_enc_;  // P f_t + b_h per frame
  std::vector<std::vector<double>> rd_enc_;
  std::map<LabelSequence, PrefixState> cache_;
};

struct DecodeOptions {
  int beam_size = 20;
  int max_symbols_per_frame = 10;
  std::optional<SuppressionConfig> suppression;
  bool hat = false;  // assemble posteriors with the HAT factorization

  void validate() const;
};

/// Frame-synchronous beam search scoring each prefix by the log of its
/// summed alignment probability (alignments with at most
/// max_symbols_per_frame labels per frame). Returns hypotheses best first.
std::vector<BeamHypothesis> beam_search(StepScorer& scorer,
                                        const DecodeOptions& options);

/// Follows the argmax at every step; at most max_symbols_per_frame labels
/// per frame. The score is the log-probability of the single path.
BeamHypothesis greedy_decode(StepScorer& scorer, const DecodeOptions& options);

}  // namespace rdlab

#endif  // RDLAB_DECODER_H_
