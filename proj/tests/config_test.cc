// tests/config_test.cc

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

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "rdlab/config.h"
#include "rdlab/errors.h"

using namespace rdlab;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("rdlab_cfg_" + name);
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST_CASE("defaults survive a JSON round trip") {
  const RunConfig c;
  const nlohmann::json j = to_json(c);
  CHECK(to_json(run_config_from_json(j)) == j);
  CHECK(c.rd.encoder.kind == EncoderKind::kRecurrent);
  CHECK(c.rd.predictor.kind == PredictorKind::kRnn);
  CHECK(c.asr.encoder.input_dim == c.data.feature_dim);
  CHECK(j.at("decode").at("suppression").at("tokens") == nlohmann::json{"yeah", "okay"});
}

TEST_CASE("dotted overrides") {
  nlohmann::json j = to_json(RunConfig{});
  apply_override(j, "decode.beam_size=4");
  apply_override(j, "data.seed=9");
  apply_override(j, "sweep.model=rd");
  apply_override(j, "decode.suppression.tokens=[\"okay\"]");
  apply_override(j, "new.section.value=1.5");
  const RunConfig c = run_config_from_json(j);
  CHECK(c.decode.beam_size == 4);
  CHECK(c.data.seed == 9);
  CHECK(c.sweep.model == "rd");
  CHECK(c.decode.suppression.tokens == std::vector<std::string>{"okay"});
  CHECK(j.at("new").at("section").at("value") == 1.5);
  CHECK_THROWS_AS(apply_override(j, "novalue"), std::invalid_argument);
  CHECK_THROWS_AS(apply_override(j, "=3"), std::invalid_argument);
  CHECK_THROWS_AS(apply_override(j, "a..b=3"), std::invalid_argument);
}

TEST_CASE("file loading merges over defaults") {
  const std::string path = write_temp("partial.json", R"({"decode": {"beam_size": 3}})");
  const std::vector<std::string> overrides{"decode.hat=true"};
  const RunConfig c = load_run_config(path, overrides);
  CHECK(c.decode.beam_size == 3);
  CHECK(c.decode.hat);
  CHECK(c.decode.max_symbols_per_frame == RunConfig{}.decode.max_symbols_per_frame);
  std::filesystem::remove(path);
}

TEST_CASE("bad configs are rejected") {
  const std::string broken = write_temp("broken.json", "{ not json");
  CHECK_THROWS_AS(load_run_config(broken, {}), DataError);
  CHECK_THROWS_AS(load_run_config(std::string("/nonexistent/rdlab.json"), {}), DataError);
  std::filesystem::remove(broken);
  const std::vector<std::string> bad_model{"sweep.model=lstm"};
  CHECK_THROWS_AS(load_run_config(std::nullopt, bad_model), std::invalid_argument);
  const std::vector<std::string> bad_type{"decode.beam_size=\"wide\""};
  CHECK_THROWS_AS(load_run_config(std::nullopt, bad_type), std::invalid_argument);
  const std::vector<std::string> bad_train{"asr.train.batch_size=0"};
  CHECK_THROWS_AS(load_run_config(std::nullopt, bad_train), std::invalid_argument);
  const std::vector<std::string> typo{"decode.beam=3"};
  CHECK_THROWS_AS(load_run_config(std::nullopt, typo), std::invalid_argument);
  const std::string typo_file = write_temp("typo.json", R"({"data": {"noise": 0.1}})");
  CHECK_THROWS_AS(load_run_config(typo_file, {}), std::invalid_argument);
  std::filesystem::remove(typo_file);
  const std::vector<std::string> table{"data.turn_transition.DOC.PAT=0.5",
                                       "data.turn_transition.DOC.OTH=0.5"};
  CHECK_NOTHROW(load_run_config(std::nullopt, table));
}

TEST_CASE("predictor contexts") {
  const PredictorConfig base;
  CHECK(predictor_for_context(base, "1").context_n == 1);
  CHECK(predictor_for_context(base, "cnn-4").context_n == 4);
  CHECK(predictor_for_context(base, "4").kind == PredictorKind::kCnn);
  CHECK(predictor_for_context(base, "rnn").kind == PredictorKind::kRnn);
  CHECK(predictor_for_context(base, "rnn").label() == "rnn");
  CHECK(predictor_for_context(base, "2").label() == "cnn-2");
  for (const char* bad : {"0", "x", "2x", "cnn-", ""})
    CHECK_THROWS_AS(predictor_for_context(base, bad), std::invalid_argument);
}

TEST_CASE("model widths follow the data") {
  const RunConfig c;
  const Vocabulary vocab = make_vocabulary(c.data);
  const AsrModelConfig plain = resolve_asr_config(c.asr, vocab, 16, false);
  CHECK(plain.num_labels == vocab.size());
  CHECK(plain.num_roles == 0);
  CHECK(plain.predictor.vocab_size == vocab.size());
  const AsrModelConfig role = resolve_asr_config(c.role_asr, vocab, 16, true);
  CHECK(role.num_labels == vocab.size() + 3);
  CHECK(role.role_token_offset() == vocab.size());
}

TEST_CASE("decode settings map tokens to ids") {
  RunConfig c;
  const Vocabulary vocab = make_vocabulary(c.data);
  CHECK_FALSE(c.decode.options(vocab).suppression.has_value());
  c.decode.suppression.enabled = true;
  const DecodeOptions o = c.decode.options(vocab);
  REQUIRE(o.suppression.has_value());
  CHECK(o.suppression->suppression_set == std::vector<int>{0, 1});
  c.decode.suppression.tokens = {"nonexistent"};
  CHECK_THROWS_AS(c.decode.options(vocab), DataError);
  c.decode.suppression.tokens = {"yeah"};
  c.decode.beam_size = 0;
  CHECK_THROWS_AS(c.decode.options(vocab), std::invalid_argument);
}
