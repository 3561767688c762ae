// tools/rdlab.cc

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

// rdlab: data generation, training, alignment, decoding and scoring for
// transducer ASR with a synchronized role-diarization head.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rdlab/config.h"
#include "rdlab/errors.h"
#include "rdlab/io.h"
#include "rdlab/pipeline.h"
#include "rdlab/training.h"

namespace fs = std::filesystem;
using namespace rdlab;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;

  RunConfig resolve(std::vector<std::string> extra) const {
    std::vector<std::string> all = overrides;
    all.insert(all.end(), extra.begin(), extra.end());
    std::optional<std::string> path;
    if (!config_path.empty()) path = config_path;
    return load_run_config(path, all);
  }
};

void add_common(CLI::App* cmd, Common& c, bool needs_out = true) {
  cmd->add_option("--config", c.config_path, "JSON config file");
  cmd->add_option("--set", c.overrides, "Override a config key: key.path=value");
  auto* out = cmd->add_option("--out", c.out, "Output directory");
  if (needs_out) out->required();
}

void write_snapshot(const std::string& dir, const RunConfig& config) {
  write_file_atomic((fs::path(dir) / "config.json").string(), to_json(config).dump(2) + "\n");
}

std::string split_path(const std::string& data_dir, const std::string& split) {
  return (fs::path(data_dir) / (split + ".jsonl")).string();
}

Vocabulary load_vocab(const std::string& data_dir) {
  return read_vocabulary((fs::path(data_dir) / "vocab.json").string());
}

int feature_dim_of(const Dataset& data) {
  if (data.empty()) throw DataError("empty dataset");
  return static_cast<int>(data.front().features.dim(1));
}

std::string history_csv(const std::vector<EpochStats>& history) {
  std::ostringstream os;
  os.precision(10);
  os << "epoch,step,train_loss,val_loss,val_metric\n";
  for (const auto& s : history) {
    os << s.epoch << ',' << s.step << ',' << s.train_loss << ',' << s.val_loss << ',';
    if (s.val_metric) os << *s.val_metric;
    os << '\n';
  }
  return os.str();
}

void print_epoch(const EpochStats& s) {
  std::cerr << "epoch " << s.epoch << " step " << s.step << " train " << s.train_loss
            << " val " << s.val_loss;
  if (s.val_metric) std::cerr << " metric " << *s.val_metric;
  std::cerr << '\n';
}

std::string join(const std::vector<std::string>& items) {
  nlohmann::json j = items;
  return j.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transducer ASR with role diarization: a desk-scale laboratory"};
  app.require_subcommand(1);

  // gen-data
  Common gen;
  std::optional<std::uint64_t> gen_seed;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a synthetic conversation corpus");
  add_common(gen_cmd, gen);
  gen_cmd->add_option("--seed", gen_seed, "Generator seed");

  // train-asr / train-role-asr
  struct TrainArgs {
    Common common;
    std::string data;
    std::optional<std::uint64_t> seed;
    std::optional<int> epochs;
  };
  TrainArgs asr_args, role_args;
  auto* asr_cmd = app.add_subcommand("train-asr", "Train the ASR transducer");
  auto* role_cmd = app.add_subcommand("train-role-asr", "Train a Role-ASR transducer");
  for (auto [cmd, args] : {std::pair{asr_cmd, &asr_args}, std::pair{role_cmd, &role_args}}) {
    add_common(cmd, args->common);
    cmd->add_option("--data", args->data, "Dataset directory")->required();
    cmd->add_option("--seed", args->seed, "Training seed");
    cmd->add_option("--epochs", args->epochs, "Training epochs");
  }

  // force-align
  Common align;
  std::string align_data, align_asr, align_split = "train";
  auto* align_cmd = app.add_subcommand("force-align", "Forced alignment with a frozen ASR model");
  add_common(align_cmd, align);
  align_cmd->add_option("--data", align_data, "Dataset directory")->required();
  align_cmd->add_option("--asr", align_asr, "ASR checkpoint")->required();
  align_cmd->add_option("--split", align_split, "Dataset split");

  // train-rd
  Common rd;
  std::string rd_data, rd_asr, rd_init, rd_predictor;
  std::optional<int> rd_context, rd_epochs;
  std::optional<std::uint64_t> rd_seed;
  bool rd_share = false;
  auto* rd_cmd = app.add_subcommand("train-rd", "Train the role-diarization head");
  add_common(rd_cmd, rd);
  rd_cmd->add_option("--data", rd_data, "Dataset directory")->required();
  rd_cmd->add_option("--asr", rd_asr, "Frozen ASR checkpoint")->required();
  rd_cmd->add_option("--predictor", rd_predictor, "RD predictor kind")
      ->check(CLI::IsMember({"cnn", "rnn"}));
  rd_cmd->add_option("--context", rd_context, "CNN predictor context");
  rd_cmd->add_option("--init-from", rd_init, "Initialize the RD predictor from a checkpoint");
  rd_cmd->add_flag("--share-predictor", rd_share, "Use the frozen ASR predictor outputs");
  rd_cmd->add_option("--seed", rd_seed, "Training seed");
  rd_cmd->add_option("--epochs", rd_epochs, "Training epochs");

  // decode
  Common dec;
  std::string dec_data, dec_asr, dec_rd, dec_split = "test";
  std::optional<int> dec_beam, dec_gap;
  std::optional<double> dec_alpha, dec_beta;
  std::vector<std::string> dec_tokens;
  bool dec_suppress = false, dec_greedy = false;
  auto* dec_cmd = app.add_subcommand("decode", "Decode a dataset split");
  add_common(dec_cmd, dec);
  dec_cmd->add_option("--data", dec_data, "Dataset directory")->required();
  dec_cmd->add_option("--split", dec_split, "Dataset split");
  dec_cmd->add_option("--asr", dec_asr, "ASR or Role-ASR checkpoint")->required();
  dec_cmd->add_option("--rd", dec_rd, "RD checkpoint");
  dec_cmd->add_option("--beam", dec_beam, "Beam size");
  dec_cmd->add_flag("--greedy", dec_greedy, "Greedy decoding");
  dec_cmd->add_flag("--suppress", dec_suppress, "Enable RD-guided blank suppression");
  dec_cmd->add_option("--alpha", dec_alpha, "Minimum suppressed-token probability");
  dec_cmd->add_option("--beta", dec_beta, "Minimum role probability");
  dec_cmd->add_option("--gap", dec_gap, "Minimum steps between suppressions");
  dec_cmd->add_option("--suppress-tokens", dec_tokens, "Suppression token set")->delimiter(',');

  // score
  Common sc;
  std::string sc_data, sc_hyp, sc_split = "test";
  std::size_t sc_top = 2;
  auto* sc_cmd = app.add_subcommand("score", "Score hypotheses against references");
  add_common(sc_cmd, sc);
  sc_cmd->add_option("--data", sc_data, "Dataset directory")->required();
  sc_cmd->add_option("--split", sc_split, "Dataset split");
  sc_cmd->add_option("--hyp", sc_hyp, "Hypothesis file")->required();
  sc_cmd->add_option("--top-n", sc_top, "Number of most-deleted words to report");

  // context-sweep
  Common sw;
  std::string sw_data, sw_model;
  std::vector<std::string> sw_contexts;
  std::vector<std::uint64_t> sw_seeds;
  auto* sw_cmd = app.add_subcommand("context-sweep", "Predictor context versus WER and R-WDER");
  add_common(sw_cmd, sw);
  sw_cmd->add_option("--data", sw_data, "Dataset directory")->required();
  sw_cmd->add_option("--contexts", sw_contexts, "Contexts, e.g. 1,2,4,rnn")->delimiter(',');
  sw_cmd->add_option("--model", sw_model, "Model whose predictor varies")
      ->check(CLI::IsMember({"role-asr", "rd"}));
  sw_cmd->add_option("--seeds", sw_seeds, "Training seeds")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen_cmd) {
      std::vector<std::string> extra;
      if (gen_seed) extra.push_back("data.seed=" + std::to_string(*gen_seed));
      const RunConfig cfg = gen.resolve(extra);
      const Corpus corpus = gen_corpus(cfg.data);
      write_dataset(split_path(gen.out, "train"), corpus.train);
      write_dataset(split_path(gen.out, "val"), corpus.val);
      write_dataset(split_path(gen.out, "test"), corpus.test);
      write_vocabulary((fs::path(gen.out) / "vocab.json").string(), corpus.vocab);
      write_snapshot(gen.out, cfg);
      std::cout << "wrote " << corpus.train.size() << "/" << corpus.val.size() << "/"
                << corpus.test.size() << " utterances to " << gen.out << '\n';
      return 0;
    }

    for (auto [cmd, args, role_asr] :
         {std::tuple{asr_cmd, &asr_args, false}, std::tuple{role_cmd, &role_args, true}}) {
      if (!*cmd) continue;
      const std::string section = role_asr ? "role_asr" : "asr";
      std::vector<std::string> extra;
      if (args->seed) extra.push_back(section + ".train.seed=" + std::to_string(*args->seed));
      if (args->epochs) extra.push_back(section + ".train.epochs=" + std::to_string(*args->epochs));
      RunConfig cfg = args->common.resolve(extra);
      const Vocabulary vocab = load_vocab(args->data);
      const Dataset train = read_dataset(split_path(args->data, "train"));
      const Dataset val = read_dataset(split_path(args->data, "val"));
      AsrModelConfig& model_cfg = role_asr ? cfg.role_asr : cfg.asr;
      model_cfg = resolve_asr_config(model_cfg, vocab, feature_dim_of(train), role_asr);
      TrainOptions opts = role_asr ? cfg.role_asr_train : cfg.asr_train;
      opts.on_epoch = print_epoch;
      const TrainResult result = train_asr(train, val, model_cfg, opts);
      const fs::path out(args->common.out);
      write_checkpoint((out / "model.json").string(), result.checkpoint);
      write_file_atomic((out / "metrics.csv").string(), history_csv(result.history));
      write_snapshot(args->common.out, cfg);
      std::cout << "vocabulary size " << model_cfg.num_labels + 1 << " (" << vocab.size()
                << " subwords, " << model_cfg.num_roles << " roles, 1 blank)\n"
                << "checkpoint " << (out / "model.json").string() << '\n';
      return 0;
    }

    if (*align_cmd) {
      const RunConfig cfg = align.resolve({});
      const AsrModel asr = AsrModel::from_checkpoint(read_checkpoint(align_asr));
      const Dataset data = read_dataset(split_path(align_data, align_split));
      const auto records = align_dataset(data, asr);
      write_file_atomic((fs::path(align.out) / "alignments.jsonl").string(),
                        serialize_alignments(records));
      write_snapshot(align.out, cfg);
      std::cout << "aligned " << records.size() << " utterances\n";
      return 0;
    }

    if (*rd_cmd) {
      std::vector<std::string> extra;
      if (!rd_predictor.empty()) extra.push_back("rd.model.predictor.kind=" + rd_predictor);
      if (rd_context) extra.push_back("rd.model.predictor.context_n=" + std::to_string(*rd_context));
      if (rd_share) extra.push_back("rd.model.share_asr_predictor=true");
      if (rd_seed) extra.push_back("rd.train.seed=" + std::to_string(*rd_seed));
      if (rd_epochs) extra.push_back("rd.train.epochs=" + std::to_string(*rd_epochs));
      RunConfig cfg = rd.resolve(extra);
      const Vocabulary vocab = load_vocab(rd_data);
      const AsrModel asr = AsrModel::from_checkpoint(read_checkpoint(rd_asr));
      const Dataset train = read_dataset(split_path(rd_data, "train"));
      const Dataset val = read_dataset(split_path(rd_data, "val"));
      std::optional<Checkpoint> init;
      if (!rd_init.empty()) init = read_checkpoint(rd_init);
      cfg.rd = resolve_rd_config(cfg.rd, asr.config());
      TrainOptions opts = cfg.rd_train;
      opts.on_epoch = print_epoch;
      const TrainResult result = train_rd(train, val, asr, cfg.rd, opts, vocab, init);
      const fs::path out(rd.out);
      write_checkpoint((out / "model.json").string(), result.checkpoint);
      write_file_atomic((out / "metrics.csv").string(), history_csv(result.history));
      write_snapshot(rd.out, cfg);
      std::cout << "asr hash before " << result.asr_hash_before << " after "
                << result.asr_hash_after
                << (result.asr_hash_before == result.asr_hash_after ? " (unchanged)" : " (CHANGED)")
                << '\n';
      return 0;
    }

    if (*dec_cmd) {
      std::vector<std::string> extra;
      if (dec_beam) extra.push_back("decode.beam_size=" + std::to_string(*dec_beam));
      if (dec_greedy) extra.push_back("decode.greedy=true");
      if (dec_suppress) extra.push_back("decode.suppression.enabled=true");
      if (dec_alpha) extra.push_back("decode.suppression.alpha=" + nlohmann::json(*dec_alpha).dump());
      if (dec_beta) extra.push_back("decode.suppression.beta=" + nlohmann::json(*dec_beta).dump());
      if (dec_gap) extra.push_back("decode.suppression.min_gap=" + std::to_string(*dec_gap));
      if (!dec_tokens.empty()) extra.push_back("decode.suppression.tokens=" + join(dec_tokens));
      const RunConfig cfg = dec.resolve(extra);
      const Vocabulary vocab = load_vocab(dec_data);
      const AsrModel asr = AsrModel::from_checkpoint(read_checkpoint(dec_asr));
      std::optional<RdModel> rd_model;
      if (!dec_rd.empty()) rd_model = RdModel::from_checkpoint(read_checkpoint(dec_rd));
      if (cfg.decode.suppression.enabled && !rd_model) {
        throw std::invalid_argument("--suppress needs an RD checkpoint (--rd)");
      }
      const Dataset data = read_dataset(split_path(dec_data, dec_split));
      const DecodeOptions opts = cfg.decode.options(vocab);
      const auto hyps = decode_dataset(data, asr, rd_model ? &*rd_model : nullptr, vocab, opts,
                                       cfg.decode.greedy);
      write_hypotheses((fs::path(dec.out) / "hypotheses.jsonl").string(), hyps, vocab);
      write_snapshot(dec.out, cfg);
      long triggers = 0;
      for (const auto& h : hyps) triggers += h.suppression_triggers;
      const auto& s = cfg.decode.suppression;
      std::cout << "decoded " << hyps.size() << " utterances, beam "
                << (cfg.decode.greedy ? 1 : cfg.decode.beam_size) << '\n';
      if (s.enabled) {
        std::cout << "suppression alpha=" << s.alpha << " beta=" << s.beta
                  << " gap=" << s.min_gap << " tokens=" << join(s.tokens)
                  << " triggers=" << triggers << '\n';
      }
      return 0;
    }

    if (*sc_cmd) {
      const RunConfig cfg = sc.resolve({});
      const Vocabulary vocab = load_vocab(sc_data);
      const Dataset refs = read_dataset(split_path(sc_data, sc_split));
      const auto hyps = read_hypotheses(sc_hyp, vocab);
      const CorpusScore score = score_hypotheses(refs, hyps, vocab);
      const nlohmann::json report = score_report(score, sc_top);
      const fs::path out(sc.out);
      write_file_atomic((out / "report.json").string(), report.dump(2) + "\n");
      write_file_atomic((out / "report.csv").string(), score_csv(score));
      std::ostringstream del;
      del << "word,count\n";
      for (const auto& d : score.deletions) del << d.word << ',' << d.count << '\n';
      write_file_atomic((out / "deletions.csv").string(), del.str());
      write_snapshot(sc.out, cfg);
      auto show = [](const nlohmann::json& v) { return v.is_null() ? std::string("n/a") : v.dump(); };
      std::cout << "WER " << show(report["wer"]) << " SUB " << report["sub_rate"].dump()
                << " DEL " << report["del_rate"].dump() << " INS " << report["ins_rate"].dump()
                << " WDER " << show(report["wder"]) << " R-WDER " << show(report["r_wder"])
                << " top deleted " << report["top_deleted"].dump() << '\n';
      return 0;
    }

    if (*sw_cmd) {
      std::vector<std::string> extra;
      if (!sw_contexts.empty()) extra.push_back("sweep.contexts=" + join(sw_contexts));
      if (!sw_model.empty()) extra.push_back("sweep.model=" + sw_model);
      if (!sw_seeds.empty()) extra.push_back("sweep.seeds=" + nlohmann::json(sw_seeds).dump());
      const RunConfig cfg = sw.resolve(extra);
      Corpus corpus;
      corpus.vocab = load_vocab(sw_data);
      corpus.train = read_dataset(split_path(sw_data, "train"));
      corpus.val = read_dataset(split_path(sw_data, "val"));
      corpus.test = read_dataset(split_path(sw_data, "test"));
      const auto rows =
          context_sweep(corpus, cfg, [](const std::string& line) { std::cerr << line << '\n'; });
      write_file_atomic((fs::path(sw.out) / "sweep.csv").string(), sweep_csv(rows));
      write_snapshot(sw.out, cfg);
      std::cout << sweep_csv(rows);
      return 0;
    }
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
