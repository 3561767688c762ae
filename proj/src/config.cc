// src/config.cc

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

#include "rdlab/config.h"

#include <stdexcept>

#include "rdlab/errors.h"
#include "rdlab/io.h"

namespace rdlab {

RunConfig::RunConfig() {
  asr.encoder.input_dim = data.feature_dim;
  role_asr = asr;
  rd.encoder.kind = EncoderKind::kRecurrent;
  rd.encoder.num_layers = 1;
  rd.encoder.tap_layer = 1;
  rd.predictor.kind = PredictorKind::kRnn;
}

DecodeOptions DecodeSettings::options(const Vocabulary& vocab) const {
  DecodeOptions o;
  o.beam_size = beam_size;
  o.max_symbols_per_frame = max_symbols_per_frame;
  o.hat = hat;
  if (suppression.enabled) {
    SuppressionConfig s;
    s.alpha = suppression.alpha;
    s.beta = suppression.beta;
    s.min_gap = suppression.min_gap;
    s.suppressed_blank_value = suppression.suppressed_blank_value;
    for (const auto& tok : suppression.tokens) s.suppression_set.push_back(vocab.index(tok));
    o.suppression = s;
  }
  o.validate();
  return o;
}

void to_json(nlohmann::json& j, const TrainOptions& o) {
  j = {{"adam", o.adam},         {"epochs", o.epochs},
       {"batch_size", o.batch_size}, {"top_k", o.top_k},
       {"clip_norm", o.clip_norm},   {"seed", o.seed},
       {"select_by_r_wder", o.select_by_r_wder}};
}

void from_json(const nlohmann::json& j, TrainOptions& o) {
  if (j.contains("adam")) from_json(j.at("adam"), o.adam);
  o.epochs = j.value("epochs", o.epochs);
  o.batch_size = j.value("batch_size", o.batch_size);
  o.top_k = j.value("top_k", o.top_k);
  o.clip_norm = j.value("clip_norm", o.clip_norm);
  o.seed = j.value("seed", o.seed);
  o.select_by_r_wder = j.value("select_by_r_wder", o.select_by_r_wder);
}

namespace {

nlohmann::json suppression_json(const SuppressionSettings& s) {
  return {{"enabled", s.enabled}, {"alpha", s.alpha}, {"beta", s.beta},
          {"tokens", s.tokens},   {"min_gap", s.min_gap},
          {"suppressed_blank_value", s.suppressed_blank_value}};
}

void read_suppression(const nlohmann::json& j, SuppressionSettings& s) {
  s.enabled = j.value("enabled", s.enabled);
  s.alpha = j.value("alpha", s.alpha);
  s.beta = j.value("beta", s.beta);
  s.tokens = j.value("tokens", s.tokens);
  s.min_gap = j.value("min_gap", s.min_gap);
  s.suppressed_blank_value = j.value("suppressed_blank_value", s.suppressed_blank_value);
}

template <typename T>
void read_section(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) from_json(j.at(key), out);
}

}  // namespace

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json data, asr, asr_train, role_asr, role_asr_train, rd, rd_train;
  to_json(data, c.data);
  to_json(asr, c.asr);
  to_json(asr_train, c.asr_train);
  to_json(role_asr, c.role_asr);
  to_json(role_asr_train, c.role_asr_train);
  to_json(rd, c.rd);
  to_json(rd_train, c.rd_train);
  return {{"data", data},
          {"asr", {{"model", asr}, {"train", asr_train}}},
          {"role_asr", {{"model", role_asr}, {"train", role_asr_train}}},
          {"rd", {{"model", rd}, {"train", rd_train}}},
          {"decode",
           {{"beam_size", c.decode.beam_size},
            {"max_symbols_per_frame", c.decode.max_symbols_per_frame},
            {"hat", c.decode.hat},
            {"greedy", c.decode.greedy},
            {"suppression", suppression_json(c.decode.suppression)}}},
          {"sweep",
           {{"contexts", c.sweep.contexts},
            {"model", c.sweep.model},
            {"seeds", c.sweep.seeds}}}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    read_section(j, "data", c.data);
    for (auto [key, model, train] :
         {std::tuple{"asr", &c.asr, &c.asr_train},
          std::tuple{"role_asr", &c.role_asr, &c.role_asr_train}}) {
      if (!j.contains(key)) continue;
      read_section(j.at(key), "model", *model);
      read_section(j.at(key), "train", *train);
    }
    if (j.contains("rd")) {
      read_section(j.at("rd"), "model", c.rd);
      read_section(j.at("rd"), "train", c.rd_train);
    }
    if (j.contains("decode")) {
      const auto& d = j.at("decode");
      c.decode.beam_size = d.value("beam_size", c.decode.beam_size);
      c.decode.max_symbols_per_frame =
          d.value("max_symbols_per_frame", c.decode.max_symbols_per_frame);
      c.decode.hat = d.value("hat", c.decode.hat);
      c.decode.greedy = d.value("greedy", c.decode.greedy);
      if (d.contains("suppression")) read_suppression(d.at("suppression"), c.decode.suppression);
    }
    if (j.contains("sweep")) {
      const auto& s = j.at("sweep");
      c.sweep.contexts = s.value("contexts", c.sweep.contexts);
      c.sweep.model = s.value("model", c.sweep.model);
      c.sweep.seeds = s.value("seeds", c.sweep.seeds);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid config: ") + e.what());
  }
  c.data.validate();
  c.asr_train.validate();
  c.role_asr_train.validate();
  c.rd_train.validate();
  if (c.sweep.model != "role-asr" && c.sweep.model != "rd") {
    throw std::invalid_argument("sweep.model must be role-asr or rd");
  }
  return c;
}

void apply_override(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("override '" + assignment + "' is not key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    value = text;
  }
  nlohmann::json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw std::invalid_argument("override '" + assignment + "' has an empty key");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (!node->is_object()) *node = nlohmann::json::object();
    start = dot + 1;
  }
}

namespace {

// Rejects keys absent from the defaults so typos fail loudly. The turn
// transition table is keyed by role names and stays free-form.
void check_known_keys(const nlohmann::json& j, const nlohmann::json& known,
                      const std::string& prefix) {
  for (const auto& [key, value] : j.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!known.contains(key)) throw std::invalid_argument("unknown config key '" + path + "'");
    if (path == "data.turn_transition") continue;
    if (value.is_object() && known[key].is_object()) check_known_keys(value, known[key], path);
  }
}

}  // namespace

RunConfig load_run_config(const std::optional<std::string>& path,
                          std::span<const std::string> overrides) {
  const nlohmann::json defaults = to_json(RunConfig{});
  nlohmann::json j = defaults;
  if (path) {
    nlohmann::json file;
    try {
      file = nlohmann::json::parse(read_file(*path));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("config '" + *path + "' is not valid JSON: " + e.what());
    }
    j.merge_patch(file);
  }
  for (const auto& o : overrides) apply_override(j, o);
  check_known_keys(j, defaults, "");
  return run_config_from_json(j);
}

AsrModelConfig resolve_asr_config(AsrModelConfig config, const Vocabulary& vocab,
                                  int feature_dim, bool role_asr) {
  const int roles = role_asr ? static_cast<int>(vocab.roles().size()) : 0;
  config.num_roles = roles;
  config.num_labels = vocab.size() + roles;
  config.predictor.vocab_size = config.num_labels;
  config.encoder.input_dim = feature_dim;
  config.validate();
  return config;
}

PredictorConfig predictor_for_context(PredictorConfig base, const std::string& context) {
  if (context == "rnn") {
    base.kind = PredictorKind::kRnn;
    return base;
  }
  std::string digits = context.rfind("cnn-", 0) == 0 ? context.substr(4) : context;
  try {
    std::size_t used = 0;
    const int n = std::stoi(digits, &used);
    if (used != digits.size() || n < 1) throw std::invalid_argument("");
    base.kind = PredictorKind::kCnn;
    base.context_n = n;
    return base;
  } catch (const std::exception&) {
    throw std::invalid_argument("unknown predictor context '" + context + "'");
  }
}

}  // namespace rdlab
