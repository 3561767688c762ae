// src/synthdata.cc

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

#include "rdlab/synthdata.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rdlab/errors.h"
#include "rdlab/io.h"
#include "rdlab/layers.h"

namespace rdlab {

namespace {

const char* const kLexicon[] = {
    "yeah",   "okay",  "hello",  "there",  "hi",     "pain",    "fine",
    "today",  "right", "sure",   "chest",  "sleep",  "well",    "back",
    "knee",   "take",  "daily",  "twice",  "week",   "thanks",  "good",
    "morning", "visit", "blood", "pressure", "cough", "fever",  "tired",
    "little", "worse", "better", "since",  "night",  "dose",    "breathe",
    "walk",   "hurts", "started", "maybe", "usually", "allergic", "test"};

constexpr const char* kHeaderWords[2] = {"alpha", "bravo"};

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens, RoleSet roles,
                       std::string other_role)
    : tokens_(std::move(tokens)),
      roles_(std::move(roles)),
      other_role_(std::move(other_role)) {}

int Vocabulary::index(const std::string& token) const {
  auto it = std::find(tokens_.begin(), tokens_.end(), token);
  if (it == tokens_.end()) throw DataError("unknown token '" + token + "'");
  return static_cast<int>(it - tokens_.begin());
}

bool Vocabulary::is_continuation(int id) const {
  const std::string& s = tokens_.at(id);
  return !s.empty() && s.front() == '+';
}

RoleTranscript Vocabulary::detokenize(std::span<const int> tokens,
                                      std::span<const int> token_roles) const {
  RoleTranscript words;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int tok = tokens[i];
    if (is_continuation(tok) && !words.empty()) {
      words.back().text += token(tok).substr(1);
      continue;
    }
    const int role = i < token_roles.size() ? token_roles[i] : 0;
    std::string text = token(tok);
    if (is_continuation(tok)) text = text.substr(1);
    words.push_back({text, roles_.name(role), {}});
  }
  return words;
}

nlohmann::json Vocabulary::to_json() const {
  return {{"tokens", tokens_}, {"roles", roles_.names()}, {"other_role", other_role_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  try {
    return Vocabulary(j.at("tokens").get<std::vector<std::string>>(),
                      RoleSet(j.at("roles").get<std::vector<std::string>>()),
                      j.value("other_role", std::string("OTH")));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed vocabulary: ") + e.what());
  }
}

void SynthConfig::validate() const {
  const RoleSet role_set(roles);
  if (vocab_size < static_cast<int>(roles.size()) + 4) {
    throw std::invalid_argument("SynthConfig: vocab_size must be >= roles + 4");
  }
  if (!role_set.contains(other_role)) {
    throw std::invalid_argument("SynthConfig: other_role '" + other_role +
                                "' is not a role");
  }
  if (role_unigram_bias < 0 || role_unigram_bias > 1) {
    throw std::invalid_argument("SynthConfig: role_unigram_bias must be in [0,1]");
  }
  for (const auto& from : roles) {
    auto it = turn_transition.find(from);
    if (it == turn_transition.end()) {
      throw std::invalid_argument("SynthConfig: no transition row for " + from);
    }
    double sum = 0;
    for (const auto& [to, p] : it->second) {
      if (!role_set.contains(to) || p < 0) {
        throw std::invalid_argument("SynthConfig: bad transition " + from + "->" + to);
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("SynthConfig: transition row " + from +
                                  " does not sum to 1");
    }
  }
  if (mean_turn_length < 1 || min_words < 1 || max_words < min_words ||
      min_frames_per_token < 1 || max_frames_per_token < min_frames_per_token ||
      min_silence_frames < 0 || max_silence_frames < min_silence_frames ||
      subword_split < 1 || feature_dim < 1 || noise_std < 0 ||
      num_train < 0 || num_val < 0 || num_test < 0) {
    throw std::invalid_argument("SynthConfig: invalid ranges");
  }
  const int initial = subword_split > 1 ? (vocab_size + 1) / 2 : vocab_size;
  const int reserved = long_dependency ? 2 : 0;
  if (initial - reserved < static_cast<int>(roles.size())) {
    throw std::invalid_argument("SynthConfig: too few word-initial tokens");
  }
}

Vocabulary make_vocabulary(const SynthConfig& config) {
  config.validate();
  const int V = config.vocab_size;
  const int initial = config.subword_split > 1 ? (V + 1) / 2 : V;
  const int lexicon_size = static_cast<int>(std::size(kLexicon));
  std::vector<std::string> tokens;
  for (int i = 0; i < initial; ++i) {
    if (config.long_dependency && i >= initial - 2) {
      tokens.emplace_back(kHeaderWords[i - (initial - 2)]);
    } else {
      tokens.push_back(i < lexicon_size ? kLexicon[i] : "w" + std::to_string(i));
    }
  }
  static const char* const kPieces[] = {"+er", "+ing", "+ed", "+ly", "+s",
                                        "+al", "+ness", "+ful", "+ment", "+ity"};
  for (int i = initial; i < V; ++i) {
    const int k = i - initial;
    tokens.push_back(k < 10 ? kPieces[k] : "+x" + std::to_string(k));
  }
  return Vocabulary(std::move(tokens), RoleSet(config.roles), config.other_role);
}

RoleNames role_names_for(const Vocabulary& vocab) {
  const RoleSet& roles = vocab.roles();
  return RoleNames{roles.name(0), roles.name(1), vocab.other_role()};
}

Tensor feature_codebook(const SynthConfig& config) {
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor codebook({static_cast<std::size_t>(config.vocab_size + 1),
                   static_cast<std::size_t>(config.feature_dim)});
  for (double& v : codebook.values()) v = normal(rng);
  return codebook;
}

namespace {

class Generator {
 public:
  explicit Generator(const SynthConfig& config)
      : config_(config),
        roles_(config.roles),
        vocab_(make_vocabulary(config)),
        codebook_(feature_codebook(config)),
        rng_(config.seed) {
    const int V = config.vocab_size;
    initial_ = config.subword_split > 1 ? (V + 1) / 2 : V;
    content_ = config.long_dependency ? initial_ - 2 : initial_;
    // Role subsets partition the content tokens: the other role gets a small
    // block at the end, the rest is split evenly in role order.
    const int R = static_cast<int>(roles_.size());
    const int other = roles_.index(config.other_role);
    const int other_size = std::max(1, content_ / 6);
    subsets_.assign(R, {});
    for (int tok = content_ - other_size; tok < content_; ++tok) {
      subsets_[other].push_back(tok);
    }
    const int main_tokens = content_ - other_size;
    int next = 0;
    for (int r = 0, seen = 0; r < R; ++r) {
      if (r == other) continue;
      const int main_roles = R - 1;
      const int count = (main_tokens * (seen + 1)) / main_roles -
                        (main_tokens * seen) / main_roles;
      for (int k = 0; k < count; ++k) subsets_[r].push_back(next++);
      ++seen;
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int r = 0; r < R; ++r) {
      for (int s = 0; s < 3; ++s) {
        std::vector<double> sig(config.feature_dim);
        for (double& v : sig) v = normal(rng_);
        fixed_signatures_[speaker_name(r, s)] = std::move(sig);
      }
    }
  }

  const Vocabulary& vocab() const { return vocab_; }

  Utterance next(const std::string& id) {
    std::uniform_int_distribution<int> nwords(config_.min_words, config_.max_words);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int R = static_cast<int>(roles_.size());
    const int other = roles_.index(config_.other_role);
    const int total_words = nwords(rng_);
    const bool two_others = unif(rng_) < config_.second_other_prob;

    int header = -1;
    if (config_.long_dependency) header = unif(rng_) < 0.5 ? 0 : 1;

    // first role: the non-other roles equally likely, the other role rarely
    std::vector<double> first(R, 0.9 / std::max(1, R - 1));
    first[other] = 0.1;
    int role = sample(first);

    struct Word {
      std::vector<int> tokens;
      int role;
      int speaker;
    };
    std::vector<std::vector<Word>> turns;
    int produced = 0;
    std::geometric_distribution<int> extra(1.0 / config_.mean_turn_length);
    while (produced < total_words) {
      const int len = std::min(total_words - produced, 1 + extra(rng_));
      const int speaker = (role == other && two_others) ? (unif(rng_) < 0.5 ? 0 : 1) : 0;
      std::vector<Word> turn;
      if (header >= 0 && turns.empty()) {
        turn.push_back({{initial_ - 2 + header}, role, speaker});
      }
      for (int w = 0; w < len; ++w) turn.push_back({sample_word(role, header), role, speaker});
      produced += len;
      turns.push_back(std::move(turn));
      role = next_role(role);
    }

    // acoustics
    std::map<std::string, std::vector<double>> signatures;
    std::normal_distribution<double> normal(0.0, 1.0);
    auto signature = [&](int r, int s) -> const std::vector<double>& {
      const std::string name = speaker_name(r, s);
      if (!config_.long_dependency) return fixed_signatures_.at(name);
      auto it = signatures.find(name);
      if (it == signatures.end()) {
        std::vector<double> sig(config_.feature_dim);
        for (double& v : sig) v = normal(rng_);
        it = signatures.emplace(name, std::move(sig)).first;
      }
      return it->second;
    };
    std::uniform_int_distribution<int> dur(config_.min_frames_per_token,
                                           config_.max_frames_per_token);
    std::uniform_int_distribution<int> sil(config_.min_silence_frames,
                                           config_.max_silence_frames);
    std::vector<std::vector<double>> frames;
    auto emit_frame = [&](int row, const std::vector<double>* sig) {
      std::vector<double> f(config_.feature_dim);
      auto code = codebook_.slice(row);
      for (int d = 0; d < config_.feature_dim; ++d) {
        f[d] = code[d] + (sig ? config_.speaker_signal * (*sig)[d] : 0.0) +
               config_.noise_std * normal(rng_);
      }
      frames.push_back(std::move(f));
    };

    Utterance utt;
    utt.id = id;
    for (std::size_t ti = 0; ti < turns.size(); ++ti) {
      if (ti > 0) {
        const int n = sil(rng_);
        for (int k = 0; k < n; ++k) emit_frame(config_.vocab_size, nullptr);
      }
      for (const Word& w : turns[ti]) {
        const auto& sig = signature(w.role, w.speaker);
        std::string text;
        for (int tok : w.tokens) {
          const int begin = static_cast<int>(frames.size());
          const int n = dur(rng_);
          for (int k = 0; k < n; ++k) emit_frame(tok, &sig);
          utt.tokens.push_back(tok);
          utt.token_roles.push_back(w.role);
          utt.spans.emplace_back(begin, static_cast<int>(frames.size()));
          const std::string& s = vocab_.token(tok);
          text += vocab_.is_continuation(tok) ? s.substr(1) : s;
        }
        utt.words.push_back({text, roles_.name(w.role), speaker_name(w.role, w.speaker)});
      }
    }
    utt.features = Tensor({frames.size(), static_cast<std::size_t>(config_.feature_dim)});
    for (std::size_t t = 0; t < frames.size(); ++t) {
      std::copy(frames[t].begin(), frames[t].end(), utt.features.slice(t).begin());
    }
    return utt;
  }

 private:
  std::string speaker_name(int role, int speaker) const {
    const std::string& name = roles_.name(role);
    if (name == config_.other_role) return name + std::to_string(speaker + 1);
    return name;
  }

  int sample(const std::vector<double>& probs) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double x = unif(rng_), acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (x < acc) return static_cast<int>(i);
    }
    for (std::size_t i = probs.size(); i-- > 0;) {
      if (probs[i] > 0) return static_cast<int>(i);
    }
    return 0;
  }

  int next_role(int role) {
    const auto& row = config_.turn_transition.at(roles_.name(role));
    std::vector<double> probs(roles_.size(), 0.0);
    for (const auto& [to, p] : row) probs[roles_.index(to)] = p;
    return sample(probs);
  }

  std::vector<int> sample_word(int role, int header) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int subset_role = role;
    if (header == 1) {
      // swap the first two non-other roles' vocabularies
      const int other = roles_.index(config_.other_role);
      int a = -1, b = -1;
      for (int r = 0; r < static_cast<int>(roles_.size()); ++r) {
        if (r == other) continue;
        if (a < 0) a = r;
        else if (b < 0) b = r;
      }
      if (role == a) subset_role = b;
      else if (role == b) subset_role = a;
    }
    int first;
    if (unif(rng_) < config_.role_unigram_bias) {
      const auto& subset = subsets_[subset_role];
      std::uniform_int_distribution<std::size_t> pick(0, subset.size() - 1);
      first = subset[pick(rng_)];
    } else {
      std::uniform_int_distribution<int> pick(0, content_ - 1);
      first = pick(rng_);
    }
    std::vector<int> tokens{first};
    const int continuations = config_.vocab_size - initial_;
    if (config_.subword_split > 1 && continuations > 0) {
      std::uniform_int_distribution<int> pieces(0, config_.subword_split - 1);
      std::uniform_int_distribution<int> pick(initial_, config_.vocab_size - 1);
      const int n = pieces(rng_);
      for (int k = 0; k < n; ++k) tokens.push_back(pick(rng_));
    }
    return tokens;
  }

  const SynthConfig& config_;
  RoleSet roles_;
  Vocabulary vocab_;
  Tensor codebook_;
  Rng rng_;
  int initial_ = 0;
  int content_ = 0;
  std::vector<std::vector<int>> subsets_;
  std::map<std::string, std::vector<double>> fixed_signatures_;
};

}  // namespace

Corpus gen_corpus(const SynthConfig& config) {
  config.validate();
  Generator gen(config);
  Corpus corpus;
  corpus.vocab = gen.vocab();
  auto fill = [&](Dataset& ds, int n, const std::string& prefix) {
    for (int i = 0; i < n; ++i) {
      std::ostringstream id;
      id << prefix << '-' << std::to_string(100000 + i).substr(1);
      ds.push_back(gen.next(id.str()));
    }
  };
  fill(corpus.train, config.num_train, "train");
  fill(corpus.val, config.num_val, "val");
  fill(corpus.test, config.num_test, "test");
  return corpus;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

nlohmann::json utterance_json(const Utterance& u) {
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t t = 0; t < u.features.dim(0); ++t) {
    auto row = u.features.slice(t);
    features.push_back(std::vector<double>(row.begin(), row.end()));
  }
  nlohmann::json words = nlohmann::json::array();
  for (const auto& w : u.words) {
    nlohmann::json jw = {{"text", w.text}, {"role", w.role}};
    if (!w.speaker.empty()) jw["speaker"] = w.speaker;
    words.push_back(std::move(jw));
  }
  nlohmann::json spans = nlohmann::json::array();
  for (const auto& [b, e] : u.spans) spans.push_back({b, e});
  return {{"id", u.id},         {"features", std::move(features)},
          {"tokens", u.tokens}, {"words", std::move(words)},
          {"token_roles", u.token_roles}, {"spans", std::move(spans)}};
}

Utterance utterance_from_json(const nlohmann::json& j) {
  Utterance u;
  u.id = j.at("id").get<std::string>();
  const auto& features = j.at("features");
  std::vector<double> values;
  std::size_t dim = 0;
  for (const auto& row : features) {
    auto r = row.get<std::vector<double>>();
    if (dim == 0) dim = r.size();
    if (r.size() != dim || dim == 0) throw DataError("ragged feature rows");
    values.insert(values.end(), r.begin(), r.end());
  }
  u.features = Tensor({features.size(), dim}, std::move(values));
  u.tokens = j.at("tokens").get<LabelSequence>();
  for (const auto& w : j.at("words")) {
    u.words.push_back({w.at("text").get<std::string>(), w.at("role").get<std::string>(),
                       w.value("speaker", std::string())});
  }
  if (j.contains("token_roles")) {
    u.token_roles = j.at("token_roles").get<std::vector<int>>();
    if (u.token_roles.size() != u.tokens.size()) {
      throw DataError("token_roles length differs from tokens");
    }
  }
  if (j.contains("spans")) {
    for (const auto& s : j.at("spans")) {
      u.spans.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
    }
  }
  return u;
}

}  // namespace

std::string serialize_dataset(const Dataset& dataset) {
  std::string out;
  for (const auto& u : dataset) {
    out += utterance_json(u).dump();
    out += '\n';
  }
  return out;
}

Dataset parse_dataset(const std::string& text) {
  Dataset ds;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      ds.push_back(utterance_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw DataError("malformed record at line " + std::to_string(line_no) +
                      ": " + e.what());
    }
  }
  return ds;
}

void write_dataset(const std::string& path, const Dataset& dataset) {
  write_file_atomic(path, serialize_dataset(dataset));
}

Dataset read_dataset(const std::string& path) { return parse_dataset(read_file(path)); }

void write_vocabulary(const std::string& path, const Vocabulary& vocab) {
  write_file_atomic(path, vocab.to_json().dump(2) + "\n");
}

Vocabulary read_vocabulary(const std::string& path) {
  try {
    return Vocabulary::from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed vocabulary file '" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Config JSON

void to_json(nlohmann::json& j, const SynthConfig& c) {
  j = {{"vocab_size", c.vocab_size},
       {"roles", c.roles},
       {"other_role", c.other_role},
       {"role_unigram_bias", c.role_unigram_bias},
       {"turn_transition", c.turn_transition},
       {"mean_turn_length", c.mean_turn_length},
       {"min_words", c.min_words},
       {"max_words", c.max_words},
       {"min_frames_per_token", c.min_frames_per_token},
       {"max_frames_per_token", c.max_frames_per_token},
       {"noise_std", c.noise_std},
       {"min_silence_frames", c.min_silence_frames},
       {"max_silence_frames", c.max_silence_frames},
       {"long_dependency", c.long_dependency},
       {"subword_split", c.subword_split},
       {"feature_dim", c.feature_dim},
       {"speaker_signal", c.speaker_signal},
       {"second_other_prob", c.second_other_prob},
       {"num_train", c.num_train},
       {"num_val", c.num_val},
       {"num_test", c.num_test},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, SynthConfig& c) {
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.roles = j.value("roles", c.roles);
  c.other_role = j.value("other_role", c.other_role);
  c.role_unigram_bias = j.value("role_unigram_bias", c.role_unigram_bias);
  c.turn_transition = j.value("turn_transition", c.turn_transition);
  c.mean_turn_length = j.value("mean_turn_length", c.mean_turn_length);
  c.min_words = j.value("min_words", c.min_words);
  c.max_words = j.value("max_words", c.max_words);
  c.min_frames_per_token = j.value("min_frames_per_token", c.min_frames_per_token);
  c.max_frames_per_token = j.value("max_frames_per_token", c.max_frames_per_token);
  c.noise_std = j.value("noise_std", c.noise_std);
  c.min_silence_frames = j.value("min_silence_frames", c.min_silence_frames);
  c.max_silence_frames = j.value("max_silence_frames", c.max_silence_frames);
  c.long_dependency = j.value("long_dependency", c.long_dependency);
  c.subword_split = j.value("subword_split", c.subword_split);
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.speaker_signal = j.value("speaker_signal", c.speaker_signal);
  c.second_other_prob = j.value("second_other_prob", c.second_other_prob);
  c.num_train = j.value("num_train", c.num_train);
  c.num_val = j.value("num_val", c.num_val);
  c.num_test = j.value("num_test", c.num_test);
  c.seed = j.value("seed", c.seed);
}

}  // namespace rdlab
