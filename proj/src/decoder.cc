// src/decoder.cc

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

#include "rdlab/decoder.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace rdlab {

void SuppressionConfig::validate() const {
  if (alpha < 0 || alpha > 1 || beta < 0 || beta > 1) {
    throw std::invalid_argument("SuppressionConfig: alpha and beta must lie in [0, 1]");
  }
  if (min_gap < 0) throw std::invalid_argument("SuppressionConfig: min_gap < 0");
  if (!(suppressed_blank_value > 0 && suppressed_blank_value < 1)) {
    throw std::invalid_argument(
        "SuppressionConfig: suppressed_blank_value must lie in (0, 1)");
  }
}

void DecodeOptions::validate() const {
  if (beam_size < 1) throw std::invalid_argument("beam_size must be >= 1");
  if (max_symbols_per_frame < 1) {
    throw std::invalid_argument("max_symbols_per_frame must be >= 1");
  }
  if (suppression) suppression->validate();
}

StepPosteriors step_posteriors(std::span<const double> asr_logits,
                               std::span<const double> rd_logits) {
  StepPosteriors p;
  p.asr = softmax(asr_logits);
  if (!rd_logits.empty()) p.rd = softmax(rd_logits);
  return p;
}

std::vector<double> hat_posteriors(std::span<const double> asr_logits,
                                   std::size_t blank) {
  if (blank >= asr_logits.size()) throw std::invalid_argument("hat_posteriors: bad blank");
  std::vector<double> labels;
  for (std::size_t k = 0; k < asr_logits.size(); ++k) {
    if (k != blank) labels.push_back(asr_logits[k]);
  }
  const double b = sigmoid(asr_logits[blank]);
  if (!labels.empty()) softmax_inplace(labels);
  std::vector<double> p(asr_logits.size());
  for (std::size_t k = 0, i = 0; k < p.size(); ++k) {
    p[k] = k == blank ? b : (1.0 - b) * labels[i++];
  }
  return p;
}

SuppressionResult suppress_blank(std::span<const double> p_asr,
                                 std::span<const double> p_rd, std::size_t blank,
                                 const SuppressionConfig& config, int steps_since) {
  SuppressionResult out{std::vector<double>(p_asr.begin(), p_asr.end()), false};
  if (p_rd.empty() || blank >= p_asr.size() || steps_since < config.min_gap) return out;
  std::size_t best = p_asr.size();
  for (std::size_t k = 0; k < p_asr.size(); ++k) {
    if (k == blank) continue;
    if (best == p_asr.size() || p_asr[k] > p_asr[best]) best = k;
  }
  if (best == p_asr.size()) return out;
  const bool in_set = std::find(config.suppression_set.begin(), config.suppression_set.end(),
                                static_cast<int>(best)) != config.suppression_set.end();
  const double role_max = *std::max_element(p_rd.begin(), p_rd.end());
  if (!in_set || p_asr[best] < config.alpha || role_max < config.beta) return out;

  out.p_asr[blank] = config.suppressed_blank_value;
  double sum = 0.0;
  for (double v : out.p_asr) sum += v;
  for (double& v : out.p_asr) v /= sum;
  out.triggered = true;
  return out;
}

// ---------------------------------------------------------------------------
// ModelScorer

ModelScorer::ModelScorer(const AsrModel& asr, const RdModel* rd, const Tensor& features)
    : asr_(asr), rd_(rd) {
  const Encoder::Output enc = asr.encoder.forward(features, nullptr);
  for (std::size_t t = 0; t < enc.out.dim(0); ++t) {
    asr_enc_.push_back(asr.joiner.project_encoder(enc.out.slice(t)));
  }
  if (rd_) {
    if (rd_->predictor && rd_->predictor->config().vocab_size != asr.config().num_labels) {
      throw std::invalid_argument("ModelScorer: RD predictor vocabulary differs from ASR labels");
    }
    const Tensor rd_out = rd_->encoder.forward(enc.tapped, nullptr).out;
    for (std::size_t t = 0; t < rd_out.dim(0); ++t) {
      rd_enc_.push_back(rd_->joiner.project_encoder(rd_out.slice(t)));
    }
  }
}

const ModelScorer::PrefixState& ModelScorer::state(const LabelSequence& prefix) {
  auto it = cache_.find(prefix);
  if (it != cache_.end()) return it->second;
  PrefixState s;
  if (prefix.empty()) {
    s.asr = asr_.predictor.start();
    if (rd_ && rd_->predictor) s.rd = rd_->predictor->start();
  } else {
    const LabelSequence parent_prefix(prefix.begin(), prefix.end() - 1);
    const PrefixState& parent = state(parent_prefix);
    s.asr = asr_.predictor.advance(parent.asr, prefix.back());
    if (rd_ && rd_->predictor) s.rd = rd_->predictor->advance(parent.rd, prefix.back());
  }
  s.asr_proj = asr_.joiner.project_predictor(s.asr.output);
  if (rd_) {
    s.rd_proj = rd_->joiner.project_predictor(rd_->predictor ? s.rd.output : s.asr.output);
  }
  return cache_.emplace(prefix, std::move(s)).first->second;
}

void ModelScorer::score(std::size_t t, const LabelSequence& prefix,
                        std::vector<double>& asr_logits, std::vector<double>& rd_logits) {
  const PrefixState& s = state(prefix);
  asr_logits = asr_.joiner.logits(asr_enc_.at(t), s.asr_proj);
  if (rd_) {
    rd_logits = rd_->joiner.logits(rd_enc_.at(t), s.rd_proj);
  } else {
    rd_logits.clear();
  }
}

// ---------------------------------------------------------------------------
// Search

namespace {

struct Expansion {
  std::vector<double> log_p;
  int role = -1;
  bool triggered = false;
};

Expansion expand(StepScorer& scorer, std::size_t t, const BeamHypothesis& h,
                 const DecodeOptions& options) {
  std::vector<double> asr, rd;
  scorer.score(t, h.tokens, asr, rd);
  const std::size_t blank = scorer.blank();
  if (blank >= asr.size()) throw std::invalid_argument("scorer blank index out of range");

  Expansion e;
  std::vector<double> p_rd;
  if (!rd.empty()) {
    p_rd = softmax(rd);
    e.role = static_cast<int>(std::max_element(p_rd.begin(), p_rd.end()) - p_rd.begin());
  }
  if (options.suppression) {
    std::vector<double> p = options.hat ? hat_posteriors(asr, blank) : softmax(asr);
    SuppressionResult s =
        suppress_blank(p, p_rd, blank, *options.suppression, h.steps_since_suppression);
    if (s.triggered) {
      e.triggered = true;
      e.log_p.resize(s.p_asr.size());
      for (std::size_t k = 0; k < s.p_asr.size(); ++k) {
        e.log_p[k] = s.p_asr[k] > 0 ? std::log(s.p_asr[k]) : kLogZero;
      }
      return e;
    }
  }
  if (options.hat) {
    std::vector<double> labels;
    for (std::size_t k = 0; k < asr.size(); ++k) {
      if (k != blank) labels.push_back(asr[k]);
    }
    if (!labels.empty()) log_softmax_inplace(labels);
    const double log_b = log_sigmoid(asr[blank]);
    const double log_nb = log_sigmoid(-asr[blank]);
    e.log_p.resize(asr.size());
    for (std::size_t k = 0, i = 0; k < asr.size(); ++k) {
      e.log_p[k] = k == blank ? log_b : log_nb + labels[i++];
    }
  } else {
    e.log_p = std::move(asr);
    log_softmax_inplace(e.log_p);
  }
  return e;
}

int next_counter(const BeamHypothesis& h, bool triggered) {
  return triggered ? 1 : std::min(h.steps_since_suppression + 1, kNeverSuppressed);
}

using Pool = std::map<LabelSequence, BeamHypothesis>;

// Adds a hypothesis, summing scores with an existing entry of the same
// prefix. The higher-scoring contributor keeps its roles and counters.
void merge_into(Pool& pool, BeamHypothesis h) {
  auto [it, inserted] = pool.try_emplace(h.tokens, h);
  if (inserted) return;
  BeamHypothesis& e = it->second;
  const double total = log_add(e.log_score, h.log_score);
  if (h.log_score > e.log_score) {
    e.roles = std::move(h.roles);
    e.steps_since_suppression = h.steps_since_suppression;
    e.suppression_triggers = h.suppression_triggers;
  }
  e.log_score = total;
}

// Keeps the entries of both pools whose prefix ranks in the top `beam`
// distinct prefixes, ranking a prefix by its best entry.
void joint_prune(Pool& finished, Pool& open, std::size_t beam) {
  std::map<LabelSequence, double> best;
  for (const Pool* pool : {&finished, &open}) {
    for (const auto& [prefix, h] : *pool) {
      auto [it, inserted] = best.try_emplace(prefix, h.log_score);
      if (!inserted) it->second = std::max(it->second, h.log_score);
    }
  }
  if (best.size() <= beam) return;
  std::vector<std::pair<double, const LabelSequence*>> ranked;
  for (const auto& [prefix, score] : best) ranked.emplace_back(score, &prefix);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::map<LabelSequence, bool> keep;
  for (std::size_t i = 0; i < beam; ++i) keep.emplace(*ranked[i].second, true);
  for (Pool* pool : {&finished, &open}) {
    std::erase_if(*pool, [&](const auto& kv) { return !keep.contains(kv.first); });
  }
}

void check_scorer(const StepScorer& scorer, const DecodeOptions& options) {
  options.validate();
  if (scorer.frames() == 0) throw std::invalid_argument("decode: empty encoder output");
}

}  // namespace

std::vector<BeamHypothesis> beam_search(StepScorer& scorer, const DecodeOptions& options) {
  check_scorer(scorer, options);
  const std::size_t beam = static_cast<std::size_t>(options.beam_size);
  const std::size_t blank = scorer.blank();
  Pool hyps;
  hyps.emplace(LabelSequence{}, BeamHypothesis{});

  for (std::size_t t = 0; t < scorer.frames(); ++t) {
    Pool open = std::move(hyps);
    hyps.clear();
    for (int round = 0; round <= options.max_symbols_per_frame && !open.empty(); ++round) {
      Pool next;
      for (const auto& [prefix, h] : open) {
        const Expansion e = expand(scorer, t, h, options);
        const int counter = next_counter(h, e.triggered);
        const int triggers = h.suppression_triggers + (e.triggered ? 1 : 0);

        BeamHypothesis stay = h;
        stay.log_score += e.log_p[blank];
        stay.steps_since_suppression = counter;
        stay.suppression_triggers = triggers;
        if (stay.log_score > kLogZero) merge_into(hyps, std::move(stay));

        if (round == options.max_symbols_per_frame) continue;
        for (std::size_t k = 0; k < e.log_p.size(); ++k) {
          if (k == blank || e.log_p[k] == kLogZero) continue;
          BeamHypothesis child = h;
          child.tokens.push_back(static_cast<int>(k));
          child.roles.push_back(e.role);
          child.log_score += e.log_p[k];
          child.steps_since_suppression = counter;
          child.suppression_triggers = triggers;
          merge_into(next, std::move(child));
        }
      }
      joint_prune(hyps, next, beam);
      open = std::move(next);
    }
  }

  std::vector<BeamHypothesis> out;
  for (auto& [prefix, h] : hyps) out.push_back(std::move(h));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.log_score > b.log_score;
  });
  return out;
}

BeamHypothesis greedy_decode(StepScorer& scorer, const DecodeOptions& options) {
  check_scorer(scorer, options);
  const std::size_t blank = scorer.blank();
  BeamHypothesis h;
  for (std::size_t t = 0; t < scorer.frames(); ++t) {
    for (int round = 0; round <= options.max_symbols_per_frame; ++round) {
      const Expansion e = expand(scorer, t, h, options);
      const std::size_t best = static_cast<std::size_t>(
          std::max_element(e.log_p.begin(), e.log_p.end()) - e.log_p.begin());
      h.steps_since_suppression = next_counter(h, e.triggered);
      if (e.triggered) ++h.suppression_triggers;
      if (best == blank || round == options.max_symbols_per_frame) {
        h.log_score += e.log_p[blank];
        break;
      }
      h.tokens.push_back(static_cast<int>(best));
      h.roles.push_back(e.role);
      h.log_score += e.log_p[best];
    }
  }
  return h;
}

}  // namespace rdlab
