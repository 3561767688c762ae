// python/bindings.cc

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

// Python bindings for the lattice, decoding, data and training entry points.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rdlab/config.h"
#include "rdlab/errors.h"
#include "rdlab/pipeline.h"
#include "rdlab/training.h"

namespace py = pybind11;
using namespace rdlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  Tensor t(shape);
  std::copy(a.data(), a.data() + a.size(), t.data());
  return t;
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array a(shape);
  std::copy(t.data(), t.data() + t.size(), a.mutable_data());
  return a;
}

LogitLattice lattice(const Array& logits, std::optional<std::size_t> blank) {
  if (logits.ndim() != 3) throw std::invalid_argument("logits must be [T, U+1, V]");
  return LogitLattice(to_tensor(logits), blank);
}

RunConfig run_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
  return load_run_config(path, overrides);
}

py::list words_to_py(const RoleTranscript& words) {
  py::list out;
  for (const auto& w : words) out.append(py::make_tuple(w.text, w.role, w.speaker));
  return out;
}

RoleTranscript words_from_py(const std::vector<std::vector<std::string>>& items) {
  RoleTranscript out;
  for (const auto& it : items) {
    if (it.size() < 2 || it.size() > 3) throw std::invalid_argument("words are (text, role[, speaker])");
    out.push_back({it[0], it[1], it.size() == 3 ? it[2] : std::string()});
  }
  return out;
}

const Dataset& split_of(const Corpus& c, const std::string& split) {
  if (split == "train") return c.train;
  if (split == "val") return c.val;
  if (split == "test") return c.test;
  throw std::invalid_argument("unknown split '" + split + "'");
}

py::dict score_dict(const CorpusScore& s) {
  return py::module_::import("json").attr("loads")(score_report(s, 5).dump());
}

}  // namespace

PYBIND11_MODULE(_rdlab, m) {
  m.doc() = "Transducer ASR with a synchronized role-diarization head";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  // Lattice algorithms.
  m.def("rnnt_log_likelihood",
        [](const Array& logits, const std::vector<int>& labels, std::size_t blank) {
          return rnnt_log_likelihood(lattice(logits, blank), labels);
        },
        py::arg("logits"), py::arg("labels"), py::arg("blank"));
  m.def("rnnt_gradients",
        [](const Array& logits, const std::vector<int>& labels, std::size_t blank) {
          const RnntResult r = rnnt_gradients(lattice(logits, blank), labels);
          return py::make_tuple(r.log_likelihood, to_array(r.gradient));
        },
        py::arg("logits"), py::arg("labels"), py::arg("blank"),
        "Returns (log P, d(-log P)/d logits).");
  m.def("shared_blank_log_likelihood",
        [](const Array& aux_logits, const Array& blank_probs, const std::vector<int>& labels) {
          return rnnt_loss_shared_blank(lattice(aux_logits, std::nullopt), to_tensor(blank_probs),
                                        labels);
        },
        py::arg("aux_logits"), py::arg("blank_probs"), py::arg("labels"));
  m.def("hat_probabilities",
        [](const Array& logits, std::size_t blank) {
          const LogitLattice lat = lattice(logits, blank);
          return py::make_tuple(to_array(hat_blank_probability(lat)),
                                to_array(hat_label_distribution(lat)));
        },
        py::arg("logits"), py::arg("blank"), "Returns (blank [T,U+1], labels [T,U+1,V-1]).");
  m.def("force_align",
        [](const Array& logits, const std::vector<int>& labels, std::size_t blank) {
          const AlignmentPath p = viterbi_force_align(lattice(logits, blank), labels);
          py::list steps;
          for (const auto& s : p.steps)
            steps.append(py::make_tuple(s.t, s.u, s.symbol == kBlankSymbol ? py::object(py::none())
                                                                           : py::int_(s.symbol)));
          return py::make_tuple(p.log_prob, steps);
        },
        py::arg("logits"), py::arg("labels"), py::arg("blank"),
        "Returns (log prob, [(t, u, label or None)]).");

  // Decoding.
  m.def("suppress_blank",
        [](const std::vector<double>& p_asr, const std::vector<double>& p_rd, std::size_t blank,
           const std::vector<int>& tokens, double alpha, double beta, int min_gap,
           double blank_value, int steps_since) {
          SuppressionConfig c{alpha, beta, tokens, min_gap, blank_value};
          const SuppressionResult r = suppress_blank(p_asr, p_rd, blank, c, steps_since);
          return py::make_tuple(r.p_asr, r.triggered);
        },
        py::arg("p_asr"), py::arg("p_rd"), py::arg("blank"), py::arg("tokens"),
        py::arg("alpha") = 0.1, py::arg("beta") = 0.99, py::arg("min_gap") = 3,
        py::arg("blank_value") = 0.01, py::arg("steps_since") = kNeverSuppressed);
  m.def("beam_search",
        [](std::size_t frames, std::size_t blank,
           const std::function<std::vector<double>(std::size_t, std::vector<int>)>& logits,
           int beam, int max_symbols) {
          FunctionScorer scorer(frames, blank, false,
                                [&](std::size_t t, const LabelSequence& prefix,
                                    std::vector<double>& asr, std::vector<double>& rd) {
                                  asr = logits(t, prefix);
                                  rd.clear();
                                });
          DecodeOptions o;
          o.beam_size = beam;
          o.max_symbols_per_frame = max_symbols;
          py::list out;
          for (const auto& h : beam_search(scorer, o)) out.append(py::make_tuple(h.tokens, h.log_score));
          return out;
        },
        py::arg("frames"), py::arg("blank"), py::arg("logits"), py::arg("beam") = 20,
        py::arg("max_symbols") = 10,
        "Beam search over a callable (t, prefix) -> logits; returns [(tokens, log score)].");

  // Metrics.
  m.def("score",
        [](const std::vector<std::vector<std::vector<std::string>>>& refs,
           const std::vector<std::vector<std::vector<std::string>>>& hyps) {
          if (refs.size() != hyps.size()) throw std::invalid_argument("refs and hyps differ in length");
          std::vector<std::string> ids;
          std::vector<RoleTranscript> r, h;
          for (std::size_t i = 0; i < refs.size(); ++i) {
            ids.push_back(std::to_string(i));
            r.push_back(words_from_py(refs[i]));
            h.push_back(words_from_py(hyps[i]));
          }
          return score_dict(score_corpus(ids, r, h));
        },
        py::arg("refs"), py::arg("hyps"),
        "Scores lists of (text, role[, speaker]) transcripts; returns the report dict.");

  // Configuration, data and models.
  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init(&run_config), py::arg("path") = std::nullopt,
           py::arg("overrides") = std::vector<std::string>{})
      .def("to_json", [](const RunConfig& c) { return to_json(c).dump(); });

  py::class_<Corpus>(m, "Corpus")
      .def(py::init([](const RunConfig& c) { return gen_corpus(c.data); }), py::arg("config"))
      .def_property_readonly("vocab", [](const Corpus& c) { return c.vocab.tokens(); })
      .def("size", [](const Corpus& c, const std::string& s) { return split_of(c, s).size(); })
      .def("words",
           [](const Corpus& c, const std::string& s) {
             py::list out;
             for (const auto& u : split_of(c, s)) out.append(words_to_py(u.words));
             return out;
           })
      .def("features",
           [](const Corpus& c, const std::string& s, std::size_t i) {
             return to_array(split_of(c, s).at(i).features);
           })
      .def("to_jsonl", [](const Corpus& c, const std::string& s) {
        return py::bytes(serialize_dataset(split_of(c, s)));
      });

  py::class_<AsrModel>(m, "AsrModel")
      .def_property_readonly("parameter_hash", &AsrModel::parameter_hash)
      .def("checkpoint", [](const AsrModel& a) { return py::bytes(serialize_checkpoint(a.to_checkpoint())); });
  py::class_<RdModel>(m, "RdModel").def("checkpoint", [](const RdModel& r) {
    return py::bytes(serialize_checkpoint(r.to_checkpoint()));
  });

  m.def("train_asr",
        [](const Corpus& corpus, const RunConfig& c) {
          py::gil_scoped_release release;
          const int dim = static_cast<int>(corpus.train.at(0).features.dim(1));
          const AsrModelConfig cfg = resolve_asr_config(c.asr, corpus.vocab, dim, false);
          return AsrModel::from_checkpoint(train_asr(corpus.train, corpus.val, cfg, c.asr_train).checkpoint);
        },
        py::arg("corpus"), py::arg("config"));
  m.def("train_rd",
        [](const Corpus& corpus, const AsrModel& asr, const RunConfig& c) {
          py::gil_scoped_release release;
          return RdModel::from_checkpoint(
              train_rd(corpus.train, corpus.val, asr, c.rd, c.rd_train, corpus.vocab).checkpoint);
        },
        py::arg("corpus"), py::arg("asr"), py::arg("config"));
  m.def("decode",
        [](const Corpus& corpus, const AsrModel& asr, const RdModel* rd, const RunConfig& c,
           const std::string& split) {
          std::vector<Hypothesis> hyps;
          {
            py::gil_scoped_release release;
            hyps = decode_dataset(split_of(corpus, split), asr, rd, corpus.vocab,
                                  c.decode.options(corpus.vocab), c.decode.greedy);
          }
          py::list out;
          for (const auto& h : hyps) out.append(words_to_py(h.words));
          return out;
        },
        py::arg("corpus"), py::arg("asr"), py::arg("rd") = nullptr, py::arg("config"),
        py::arg("split") = "test", "Returns one list of (text, role, speaker) words per utterance.");
}
