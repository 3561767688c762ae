// src/training.cc

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

#include "rdlab/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rdlab/errors.h"
#include "rdlab/metrics.h"

namespace rdlab {

void TrainOptions::validate() const {
  adam.validate();
  if (epochs < 0) throw std::invalid_argument("TrainOptions: epochs < 0");
  if (batch_size < 1) throw std::invalid_argument("TrainOptions: batch_size < 1");
  if (top_k < 1) throw std::invalid_argument("TrainOptions: top_k < 1");
  if (clip_norm < 0) throw std::invalid_argument("TrainOptions: clip_norm < 0");
}

LabelSequence training_targets(const AsrModelConfig& config, const Utterance& utt) {
  if (config.num_roles == 0) return utt.tokens;
  if (utt.token_roles.size() != utt.tokens.size()) {
    throw DataError("utterance " + utt.id + " lacks token roles");
  }
  return insert_role_tokens(utt.tokens, utt.token_roles, config.role_token_offset());
}

LogitLattice asr_lattice(const AsrModel& model, const Tensor& features,
                         std::span<const int> targets) {
  const Encoder::Output enc = model.encoder.forward(features, nullptr);
  const Tensor pred = model.predictor.forward(targets, nullptr);
  return LogitLattice(model.joiner.lattice_forward(enc.out, pred, nullptr), model.blank());
}

AlignmentPath force_align(const AsrModel& model, const Utterance& utt) {
  const LogitLattice lattice = asr_lattice(model, utt.features, utt.tokens);
  return viterbi_force_align(lattice, utt.tokens);
}

double asr_dataset_loss(const AsrModel& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& utt : data) {
    const LabelSequence targets = training_targets(model.config(), utt);
    total -= rnnt_log_likelihood(asr_lattice(model, utt.features, targets), targets);
  }
  return total / static_cast<double>(data.size());
}

namespace {

void clip_gradients(std::span<const NamedParameter> params, double max_norm) {
  if (max_norm <= 0) return;
  double sq = 0.0;
  for (const auto& p : params) {
    if (p.param->frozen) continue;
    for (double g : p.param->grad.values()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (!(norm > max_norm)) return;
  const double scale = max_norm / norm;
  for (const auto& p : params) {
    if (p.param->frozen) continue;
    for (double& g : p.param->grad.values()) g *= scale;
  }
}

void scale_tensor(Tensor& t, double s) {
  for (double& v : t.values()) v *= s;
}

double asr_backward(AsrModel& model, const Utterance& utt, double scale) {
  const LabelSequence targets = training_targets(model.config(), utt);
  Encoder::Cache ec;
  const Encoder::Output enc = model.encoder.forward(utt.features, &ec);
  Predictor::Cache pc;
  const Tensor pred = model.predictor.forward(targets, &pc);
  Joiner::Cache jc;
  LogitLattice lattice(model.joiner.lattice_forward(enc.out, pred, &jc), model.blank());
  RnntResult r = rnnt_gradients(lattice, targets);
  if (!std::isfinite(r.log_likelihood) || !r.gradient.all_finite()) {
    throw NumericalError("non-finite transducer loss on utterance " + utt.id);
  }
  scale_tensor(r.gradient, scale);
  Tensor d_enc, d_pred;
  model.joiner.lattice_backward(enc.out, pred, jc, r.gradient, &d_enc, &d_pred);
  model.predictor.backward(pc, d_pred);
  model.encoder.backward(ec, d_enc, nullptr);
  return -r.log_likelihood;
}

struct Snapshot {
  double score;
  Checkpoint checkpoint;
};

Checkpoint select_top_k(std::vector<Snapshot> snapshots, int k) {
  std::stable_sort(snapshots.begin(), snapshots.end(),
                   [](const Snapshot& a, const Snapshot& b) { return a.score < b.score; });
  snapshots.resize(std::min<std::size_t>(snapshots.size(), k));
  std::vector<Checkpoint> chosen;
  for (auto& s : snapshots) chosen.push_back(std::move(s.checkpoint));
  return average_checkpoints(chosen);
}

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

TrainResult train_asr(const Dataset& train, const Dataset& val,
                      const AsrModelConfig& config, const TrainOptions& options) {
  options.validate();
  if (train.empty()) throw DataError("train_asr: empty training set");
  AsrModel model(config, options.seed);
  auto params = model.parameters();
  AdamState state;
  Rng rng(options.seed ^ 0x5851f42d4c957f2dULL);
  TrainResult result;
  std::vector<Snapshot> snapshots;
  std::int64_t step = 0;
  const std::size_t bs = static_cast<std::size_t>(options.batch_size);

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto order = shuffled(train.size(), rng);
    double total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += bs) {
      const std::size_t end = std::min(order.size(), begin + bs);
      const double scale = 1.0 / static_cast<double>(end - begin);
      for (std::size_t i = begin; i < end; ++i) {
        total += asr_backward(model, train[order[i]], scale);
      }
      clip_gradients(params, options.clip_norm);
      adam_step(params, state, ++step, options.adam);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.step = step;
    stats.train_loss = total / static_cast<double>(train.size());
    stats.val_loss = val.empty() ? stats.train_loss : asr_dataset_loss(model, val);
    if (!std::isfinite(stats.val_loss)) {
      throw NumericalError("non-finite validation loss after epoch " + std::to_string(epoch));
    }
    result.history.push_back(stats);
    if (options.on_epoch) options.on_epoch(stats);
    Checkpoint ck = model.to_checkpoint();
    ck.step = step;
    ck.metric = stats.val_loss;
    ck.metric_name = "val_rnnt_loss";
    snapshots.push_back({stats.val_loss, std::move(ck)});
  }
  if (snapshots.empty()) {
    Checkpoint ck = model.to_checkpoint();
    ck.metric = val.empty() ? 0.0 : asr_dataset_loss(model, val);
    ck.metric_name = "val_rnnt_loss";
    snapshots.push_back({ck.metric, std::move(ck)});
  }
  result.checkpoint = select_top_k(std::move(snapshots), options.top_k);
  return result;
}

// ---------------------------------------------------------------------------
// Role diarization head

RdModelConfig resolve_rd_config(RdModelConfig config, const AsrModelConfig& asr) {
  config.encoder.input_dim = asr.encoder.hidden_dim;
  config.predictor.vocab_size = asr.num_labels - asr.num_roles;
  return config;
}

namespace {

// Everything the RD head needs from the frozen ASR model, computed once.
struct RdExample {
  const Utterance* utt;
  Tensor tapped;
  Tensor asr_pred;  // only when sharing the ASR predictor
  std::vector<RoleTarget> targets;
};

RdExample prepare_rd_example(const AsrModel& asr, const Utterance& utt,
                             std::size_t num_roles, bool share) {
  if (utt.token_roles.size() != utt.tokens.size()) {
    throw DataError("utterance " + utt.id + " lacks token roles");
  }
  RdExample ex{&utt, {}, {}, {}};
  const Encoder::Output enc = asr.encoder.forward(utt.features, nullptr);
  const Tensor pred = asr.predictor.forward(utt.tokens, nullptr);
  const LogitLattice lattice(asr.joiner.lattice_forward(enc.out, pred, nullptr), asr.blank());
  const AlignmentPath path = viterbi_force_align(lattice, utt.tokens);
  ex.targets = expand_role_targets(emission_steps(path), utt.token_roles, num_roles).entries;
  ex.tapped = enc.tapped;
  if (share) ex.asr_pred = pred;
  return ex;
}

std::vector<Joiner::Cell> target_cells(const RdExample& ex) {
  std::vector<Joiner::Cell> cells;
  for (const auto& tg : ex.targets) cells.push_back({tg.t, tg.u});
  return cells;
}

// Returns the summed cross-entropy; accumulates gradients when `train`.
double rd_loss(RdModel& rd, const RdExample& ex, bool train, double scale) {
  if (ex.targets.empty()) return 0.0;
  Encoder::Cache ec;
  const Encoder::Output enc = rd.encoder.forward(ex.tapped, train ? &ec : nullptr);
  Predictor::Cache pc;
  const Tensor pred = rd.predictor ? rd.predictor->forward(ex.utt->tokens, train ? &pc : nullptr)
                                   : ex.asr_pred;
  const auto cells = target_cells(ex);
  Joiner::Cache jc;
  const Tensor logits = rd.joiner.cells_forward(enc.out, pred, cells, train ? &jc : nullptr);
  Tensor d_logits(logits.shape());
  double loss = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    loss += role_cross_entropy_cell(logits.slice(i), ex.targets[i].role, d_logits.slice(i));
  }
  if (!std::isfinite(loss)) {
    throw NumericalError("non-finite role loss on utterance " + ex.utt->id);
  }
  if (train) {
    scale_tensor(d_logits, scale);
    Tensor d_enc, d_pred;
    rd.joiner.cells_backward(enc.out, pred, cells, jc, d_logits, &d_enc,
                             rd.predictor ? &d_pred : nullptr);
    if (rd.predictor) rd.predictor->backward(pc, d_pred);
    rd.encoder.backward(ec, d_enc, nullptr);
  }
  return loss;
}

double rd_validation_ce(RdModel& rd, const std::vector<RdExample>& data) {
  double loss = 0.0;
  std::size_t count = 0;
  for (const auto& ex : data) {
    loss += rd_loss(rd, ex, false, 1.0);
    count += ex.targets.size();
  }
  return count ? loss / static_cast<double>(count) : 0.0;
}

double rd_validation_r_wder(const AsrModel& asr, const RdModel& rd, const Dataset& val,
                            const Vocabulary& vocab) {
  RoleErrorCounts counts;
  const RoleNames names = role_names_for(vocab);
  DecodeOptions opts;
  for (const auto& utt : val) {
    ModelScorer scorer(asr, &rd, utt.features);
    const BeamHypothesis h = greedy_decode(scorer, opts);
    const RoleTranscript hyp = vocab.detokenize(h.tokens, h.roles);
    const auto alignment = align_words(word_texts(utt.words), word_texts(hyp));
    counts += r_wder_counts(utt.words, hyp, alignment, names);
  }
  return counts.rate().value_or(0.0);
}

}  // namespace

TrainResult train_rd(const Dataset& train, const Dataset& val, const AsrModel& asr,
                     const RdModelConfig& config_in, const TrainOptions& options,
                     const Vocabulary& vocab,
                     const std::optional<Checkpoint>& predictor_init) {
  options.validate();
  if (train.empty()) throw DataError("train_rd: empty training set");
  if (asr.config().num_roles != 0) {
    throw std::invalid_argument("train_rd: the ASR model must not be a Role-ASR model");
  }
  const RdModelConfig config = resolve_rd_config(config_in, asr.config());
  TrainResult result;
  result.asr_hash_before = asr.parameter_hash();

  const bool share = config.share_asr_predictor;
  RdModel rd(config, asr.config().predictor.hidden_dim, options.seed);
  if (predictor_init && !share) {
    rd.predictor = init_rd_predictor_from(*predictor_init, config.predictor);
  }
  const std::size_t R = static_cast<std::size_t>(config.num_roles);
  std::vector<RdExample> train_ex, val_ex;
  for (const auto& utt : train) train_ex.push_back(prepare_rd_example(asr, utt, R, share));
  for (const auto& utt : val) val_ex.push_back(prepare_rd_example(asr, utt, R, share));

  auto params = rd.parameters();
  AdamState state;
  Rng rng(options.seed ^ 0x2545f4914f6cdd1dULL);
  std::vector<Snapshot> snapshots;
  std::int64_t step = 0;
  const std::size_t bs = static_cast<std::size_t>(options.batch_size);

  auto snapshot = [&](EpochStats& stats) {
    Checkpoint ck = rd.to_checkpoint();
    ck.step = step;
    if (options.select_by_r_wder && !val.empty()) {
      stats.val_metric = rd_validation_r_wder(asr, rd, val, vocab);
      ck.metric = *stats.val_metric;
      ck.metric_name = "val_r_wder";
    } else {
      ck.metric = stats.val_loss;
      ck.metric_name = "val_role_ce";
    }
    snapshots.push_back({ck.metric, std::move(ck)});
  };

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const auto order = shuffled(train_ex.size(), rng);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += bs) {
      const std::size_t end = std::min(order.size(), begin + bs);
      std::size_t batch_targets = 0;
      for (std::size_t i = begin; i < end; ++i) batch_targets += train_ex[order[i]].targets.size();
      if (batch_targets == 0) continue;
      const double scale = 1.0 / static_cast<double>(batch_targets);
      for (std::size_t i = begin; i < end; ++i) {
        total += rd_loss(rd, train_ex[order[i]], true, scale);
      }
      count += batch_targets;
      clip_gradients(params, options.clip_norm);
      adam_step(params, state, ++step, options.adam);
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.step = step;
    stats.train_loss = count ? total / static_cast<double>(count) : 0.0;
    stats.val_loss = val_ex.empty() ? stats.train_loss : rd_validation_ce(rd, val_ex);
    snapshot(stats);
    result.history.push_back(stats);
    if (options.on_epoch) options.on_epoch(stats);
  }
  if (snapshots.empty()) {
    EpochStats stats;
    stats.val_loss = rd_validation_ce(rd, val_ex);
    snapshot(stats);
  }
  result.checkpoint = select_top_k(std::move(snapshots), options.top_k);
  result.checkpoint.config["asr_parameter_hash"] = result.asr_hash_before;

  result.asr_hash_after = asr.parameter_hash();
  if (result.asr_hash_after != result.asr_hash_before) {
    throw std::logic_error("train_rd: ASR parameters changed during RD training");
  }
  return result;
}

}  // namespace rdlab
