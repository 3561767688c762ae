// src/pipeline.cc

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

#include "rdlab/pipeline.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>

#include "rdlab/errors.h"
#include "rdlab/io.h"
#include "rdlab/training.h"

namespace rdlab {

Hypothesis make_hypothesis(const std::string& id, const BeamHypothesis& best,
                           const AsrModelConfig& asr, const Vocabulary& vocab) {
  Hypothesis h;
  h.id = id;
  h.log_score = best.log_score;
  h.suppression_triggers = best.suppression_triggers;
  if (asr.num_roles > 0) {
    RoleTaggedTokens tagged = split_role_tokens(best.tokens, asr.role_token_offset(), 0);
    h.tokens = std::move(tagged.tokens);
    h.token_roles = std::move(tagged.roles);
  } else {
    h.tokens = best.tokens;
    h.token_roles = best.roles;
  }
  // Words without role information carry an empty role.
  RoleTranscript words;
  for (std::size_t i = 0; i < h.tokens.size(); ++i) {
    const int tok = h.tokens[i];
    const int role = h.token_roles[i];
    if (vocab.is_continuation(tok) && !words.empty()) {
      words.back().text += vocab.token(tok).substr(1);
      continue;
    }
    std::string text = vocab.token(tok);
    if (vocab.is_continuation(tok)) text = text.substr(1);
    words.push_back({text, role >= 0 ? vocab.roles().name(role) : std::string(), {}});
  }
  h.words = std::move(words);
  return h;
}

std::vector<Hypothesis> decode_dataset(const Dataset& data, const AsrModel& asr,
                                       const RdModel* rd, const Vocabulary& vocab,
                                       const DecodeOptions& options, bool greedy) {
  std::vector<Hypothesis> out;
  out.reserve(data.size());
  for (const auto& utt : data) {
    ModelScorer scorer(asr, rd, utt.features);
    const BeamHypothesis best =
        greedy ? greedy_decode(scorer, options) : beam_search(scorer, options).front();
    out.push_back(make_hypothesis(utt.id, best, asr.config(), vocab));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hypothesis files

std::string serialize_hypotheses(const std::vector<Hypothesis>& hyps,
                                 const Vocabulary& vocab) {
  std::string out;
  for (const auto& h : hyps) {
    nlohmann::json roles = nlohmann::json::array();
    for (int r : h.token_roles) {
      roles.push_back(r >= 0 ? nlohmann::json(vocab.roles().name(r)) : nlohmann::json());
    }
    nlohmann::json words = nlohmann::json::array();
    for (const auto& w : h.words) words.push_back({{"text", w.text}, {"role", w.role}});
    nlohmann::json j = {{"id", h.id},
                        {"tokens", h.tokens},
                        {"token_roles", std::move(roles)},
                        {"words", std::move(words)},
                        {"log_score", h.log_score},
                        {"suppression_triggers", h.suppression_triggers}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Hypothesis> parse_hypotheses(const std::string& text, const Vocabulary& vocab) {
  std::vector<Hypothesis> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Hypothesis h;
      h.id = j.at("id").get<std::string>();
      h.tokens = j.at("tokens").get<LabelSequence>();
      for (const auto& r : j.at("token_roles")) {
        h.token_roles.push_back(r.is_null() ? -1 : vocab.roles().index(r.get<std::string>()));
      }
      for (const auto& w : j.at("words")) {
        h.words.push_back({w.at("text").get<std::string>(), w.at("role").get<std::string>(), {}});
      }
      h.log_score = j.at("log_score").get<double>();
      h.suppression_triggers = j.value("suppression_triggers", 0);
      out.push_back(std::move(h));
    } catch (const std::exception& e) {
      throw DataError("malformed hypothesis at line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return out;
}

void write_hypotheses(const std::string& path, const std::vector<Hypothesis>& hyps,
                      const Vocabulary& vocab) {
  write_file_atomic(path, serialize_hypotheses(hyps, vocab));
}

std::vector<Hypothesis> read_hypotheses(const std::string& path, const Vocabulary& vocab) {
  return parse_hypotheses(read_file(path), vocab);
}

// ---------------------------------------------------------------------------
// Alignment dumps

std::vector<AlignmentRecord> align_dataset(const Dataset& data, const AsrModel& asr) {
  std::vector<AlignmentRecord> out;
  out.reserve(data.size());
  for (const auto& utt : data) out.push_back({utt.id, force_align(asr, utt)});
  return out;
}

std::string serialize_alignments(const std::vector<AlignmentRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : r.path.steps) steps.push_back({s.t, s.u, s.symbol});
    out += nlohmann::json{{"id", r.id}, {"steps", std::move(steps)},
                          {"log_prob", r.path.log_prob}}.dump();
    out += '\n';
  }
  return out;
}

std::vector<AlignmentRecord> parse_alignments(const std::string& text) {
  std::vector<AlignmentRecord> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      AlignmentRecord r;
      r.id = j.at("id").get<std::string>();
      for (const auto& s : j.at("steps")) {
        r.path.steps.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(),
                                s.at(2).get<int>()});
      }
      r.path.log_prob = j.at("log_prob").get<double>();
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw DataError("malformed alignment at line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scoring

CorpusScore score_hypotheses(const Dataset& refs, const std::vector<Hypothesis>& hyps,
                             const Vocabulary& vocab) {
  std::map<std::string, const Hypothesis*> by_id;
  for (const auto& h : hyps) by_id[h.id] = &h;
  std::vector<std::string> ids;
  std::vector<RoleTranscript> ref_words, hyp_words;
  for (const auto& utt : refs) {
    auto it = by_id.find(utt.id);
    if (it == by_id.end()) throw DataError("no hypothesis for utterance " + utt.id);
    ids.push_back(utt.id);
    ref_words.push_back(utt.words);
    hyp_words.push_back(it->second->words);
  }
  return score_corpus(ids, ref_words, hyp_words, role_names_for(vocab));
}

namespace {

nlohmann::json rate_json(double rate) {
  return std::isfinite(rate) ? nlohmann::json(rate) : nlohmann::json("inf");
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

nlohmann::json counts_json(const ErrorCounts& c) {
  const double n = static_cast<double>(c.reference_length());
  auto part = [&](std::int64_t k) { return n > 0 ? k / n : 0.0; };
  return {{"wer", rate_json(c.rate())},
          {"reference_words", c.reference_length()},
          {"correct", c.correct},
          {"substitutions", c.substitutions},
          {"deletions", c.deletions},
          {"insertions", c.insertions},
          {"sub_rate", part(c.substitutions)},
          {"del_rate", part(c.deletions)},
          {"ins_rate", part(c.insertions)}};
}

std::string csv_rate(double v) {
  if (!std::isfinite(v)) return "inf";
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string csv_optional(const std::optional<double>& v) {
  return v ? csv_rate(*v) : std::string();
}

}  // namespace

nlohmann::json score_report(const CorpusScore& score, std::size_t top_n) {
  nlohmann::json j = counts_json(score.counts);
  j["wder"] = optional_json(score.wder.rate());
  j["r_wder"] = optional_json(score.r_wder.rate());
  j["aligned_pairs"] = score.wder.pairs;
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& d : score.deletions) hist.push_back({{"word", d.word}, {"count", d.count}});
  j["deletion_histogram"] = std::move(hist);
  j["top_deleted"] = top_deleted(score.deletions, top_n);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& u : score.utterances) {
    nlohmann::json r = counts_json(u.counts);
    r["id"] = u.id;
    r["wder"] = optional_json(u.wder.rate());
    r["r_wder"] = optional_json(u.r_wder.rate());
    rows.push_back(std::move(r));
  }
  j["utterances"] = std::move(rows);
  return j;
}

std::string score_csv(const CorpusScore& score) {
  std::ostringstream os;
  os << "id,reference_words,correct,substitutions,deletions,insertions,wer,wder,r_wder\n";
  auto row = [&](const std::string& id, const ErrorCounts& c, const RoleErrorCounts& w,
                 const RoleErrorCounts& r) {
    os << id << ',' << c.reference_length() << ',' << c.correct << ',' << c.substitutions
       << ',' << c.deletions << ',' << c.insertions << ',' << csv_rate(c.rate()) << ','
       << csv_optional(w.rate()) << ',' << csv_optional(r.rate()) << '\n';
  };
  for (const auto& u : score.utterances) row(u.id, u.counts, u.wder, u.r_wder);
  row("TOTAL", score.counts, score.wder, score.r_wder);
  return os.str();
}

// ---------------------------------------------------------------------------
// Context sweep

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

DecodeOptions sweep_decode_options(const RunConfig& config, const Vocabulary& vocab) {
  DecodeSettings settings = config.decode;
  settings.suppression.enabled = false;
  return settings.options(vocab);
}

}  // namespace

std::vector<SweepRow> context_sweep(const Corpus& corpus, const RunConfig& config,
                                    const std::function<void(const std::string&)>& log) {
  if (corpus.train.empty() || corpus.test.empty()) {
    throw DataError("context sweep needs non-empty train and test splits");
  }
  const Vocabulary& vocab = corpus.vocab;
  const int feature_dim = static_cast<int>(corpus.train.front().features.dim(1));
  const DecodeOptions decode = sweep_decode_options(config, vocab);
  const bool role_asr = config.sweep.model == "role-asr";

  std::vector<SweepRow> rows;
  for (const auto& ctx : config.sweep.contexts) rows.push_back({ctx, {}, {}, {}, 0.0, 0.0});

  for (std::uint64_t seed : config.sweep.seeds) {
    std::optional<AsrModel> shared_asr;
    if (!role_asr) {
      TrainOptions opts = config.asr_train;
      opts.seed = seed;
      const auto cfg = resolve_asr_config(config.asr, vocab, feature_dim, false);
      shared_asr = AsrModel::from_checkpoint(
          train_asr(corpus.train, corpus.val, cfg, opts).checkpoint);
    }
    for (auto& row : rows) {
      CorpusScore score;
      if (role_asr) {
        AsrModelConfig cfg = config.role_asr;
        cfg.predictor = predictor_for_context(cfg.predictor, row.context);
        cfg = resolve_asr_config(cfg, vocab, feature_dim, true);
        TrainOptions opts = config.role_asr_train;
        opts.seed = seed;
        const AsrModel model =
            AsrModel::from_checkpoint(train_asr(corpus.train, corpus.val, cfg, opts).checkpoint);
        score = score_hypotheses(
            corpus.test, decode_dataset(corpus.test, model, nullptr, vocab, decode,
                                        config.decode.greedy),
            vocab);
      } else {
        RdModelConfig cfg = config.rd;
        cfg.predictor = predictor_for_context(cfg.predictor, row.context);
        TrainOptions opts = config.rd_train;
        opts.seed = seed;
        const RdModel rd = RdModel::from_checkpoint(
            train_rd(corpus.train, corpus.val, *shared_asr, cfg, opts, vocab).checkpoint);
        score = score_hypotheses(
            corpus.test, decode_dataset(corpus.test, *shared_asr, &rd, vocab, decode,
                                        config.decode.greedy),
            vocab);
      }
      row.seeds.push_back(seed);
      row.wer.push_back(score.counts.rate());
      row.r_wder.push_back(score.r_wder.rate().value_or(1.0));
      if (log) {
        std::ostringstream os;
        os << "context " << row.context << " seed " << seed << ": wer " << row.wer.back()
           << " r_wder " << row.r_wder.back();
        log(os.str());
      }
    }
  }
  for (auto& row : rows) {
    row.median_wer = median(row.wer);
    row.median_r_wder = median(row.r_wder);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "context,seeds,median_wer,median_r_wder";
  const std::size_t n = rows.empty() ? 0 : rows.front().seeds.size();
  for (std::size_t i = 0; i < n; ++i) {
    os << ",wer_seed" << rows.front().seeds[i] << ",r_wder_seed" << rows.front().seeds[i];
  }
  os << '\n';
  for (const auto& r : rows) {
    os << r.context << ',' << r.seeds.size() << ',' << r.median_wer << ',' << r.median_r_wder;
    for (std::size_t i = 0; i < r.wer.size(); ++i) os << ',' << r.wer[i] << ',' << r.r_wder[i];
    os << '\n';
  }
  return os.str();
}

}  // namespace rdlab
