// src/models.cc

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

#include "rdlab/models.h"

#include <cmath>
#include <stdexcept>

#include "rdlab/errors.h"
#include "rdlab/io.h"

namespace rdlab {

// ---------------------------------------------------------------------------
// Encoder

void EncoderConfig::validate() const {
  if (num_layers < 1 || hidden_dim < 1 || input_dim < 1) {
    throw std::invalid_argument("EncoderConfig: sizes must be positive");
  }
  if (tap_layer < 1 || tap_layer > num_layers) {
    throw std::invalid_argument("EncoderConfig: tap_layer must be in [1, num_layers]");
  }
  if (subsample_factor < 1) {
    throw std::invalid_argument("EncoderConfig: subsample_factor must be >= 1");
  }
}

Tensor subsample_frames(const Tensor& features, int factor) {
  if (factor == 1) return features;
  const std::size_t T_in = features.dim(0), D = features.dim(1);
  const std::size_t f = static_cast<std::size_t>(factor);
  const std::size_t T = (T_in + f - 1) / f;
  Tensor out({T, D});
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t begin = t * f, end = std::min(T_in, begin + f);
    auto dst = out.slice(t);
    for (std::size_t s = begin; s < end; ++s) axpy(1.0, features.slice(s), dst);
    for (double& v : dst) v /= static_cast<double>(end - begin);
  }
  return out;
}

Encoder::Encoder(const EncoderConfig& config, Rng& rng) : config_(config) {
  config_.validate();
  for (int l = 0; l < config_.num_layers; ++l) {
    const std::size_t in = l == 0 ? config_.input_dim : config_.hidden_dim;
    if (config_.kind == EncoderKind::kFeedforward) {
      dense_.emplace_back(in, config_.hidden_dim, rng);
    } else {
      lstm_.emplace_back(in, config_.hidden_dim, rng);
    }
  }
}

bool Encoder::residual(std::size_t layer) const {
  return layer > 0 || config_.input_dim == config_.hidden_dim;
}

Encoder::Output Encoder::forward(const Tensor& features, Cache* cache) const {
  if (features.rank() != 2 || features.dim(0) == 0 ||
      features.dim(1) != static_cast<std::size_t>(config_.input_dim)) {
    throw std::invalid_argument("Encoder: expected features [T >= 1, " +
                                std::to_string(config_.input_dim) + "], got " +
                                shape_to_string(features.shape()));
  }
  Tensor x = subsample_frames(features, config_.subsample_factor);
  const std::size_t T = x.dim(0), H = config_.hidden_dim;
  Output result;
  if (cache) {
    cache->inputs.clear();
    cache->branch.clear();
    cache->lstm.clear();
  }
  for (std::size_t l = 0; l < static_cast<std::size_t>(config_.num_layers); ++l) {
    Tensor y;
    if (config_.kind == EncoderKind::kFeedforward) {
      y = Tensor({T, H});
      for (std::size_t t = 0; t < T; ++t) {
        auto row = y.slice(t);
        dense_[l].forward(x.slice(t), row);
        for (double& v : row) v = std::tanh(v);
      }
      if (cache) cache->branch.push_back(y);
    } else {
      Lstm::Cache lc;
      y = lstm_[l].forward(x, cache ? &lc : nullptr);
      if (cache) cache->lstm.push_back(std::move(lc));
    }
    if (residual(l)) axpy(1.0, x.values(), y.values());
    if (cache) cache->inputs.push_back(std::move(x));
    x = std::move(y);
    if (l + 1 == static_cast<std::size_t>(config_.tap_layer)) result.tapped = x;
  }
  result.out = std::move(x);
  return result;
}

void Encoder::backward(const Cache& cache, const Tensor& d_out,
                       const Tensor* d_tapped) {
  const std::size_t L = config_.num_layers;
  Tensor d = d_out;
  for (std::size_t l = L; l-- > 0;) {
    if (d_tapped && l + 1 == static_cast<std::size_t>(config_.tap_layer)) {
      axpy(1.0, d_tapped->values(), d.values());
    }
    const Tensor& x = cache.inputs[l];
    const bool need_dx = l > 0;
    Tensor dx;
    if (config_.kind == EncoderKind::kFeedforward) {
      const Tensor& y = cache.branch[l];
      if (need_dx) dx = Tensor(x.shape());
      std::vector<double> dpre(config_.hidden_dim);
      for (std::size_t t = 0; t < x.dim(0); ++t) {
        auto dy = d.slice(t);
        auto yt = y.slice(t);
        for (std::size_t k = 0; k < dpre.size(); ++k) {
          dpre[k] = dy[k] * (1.0 - yt[k] * yt[k]);
        }
        dense_[l].backward(x.slice(t), dpre,
                           need_dx ? dx.slice(t) : std::span<double>());
      }
    } else {
      lstm_[l].backward(cache.lstm[l], d, need_dx ? &dx : nullptr);
    }
    if (!need_dx) break;
    if (residual(l)) axpy(1.0, d.values(), dx.values());
    d = std::move(dx);
  }
}

void Encoder::zero_init() {
  std::vector<NamedParameter> params;
  collect("", params);
  for (auto& p : params) p.param->value.set_zero();
}

void Encoder::collect(const std::string& prefix,
                      std::vector<NamedParameter>& out) {
  for (std::size_t l = 0; l < dense_.size(); ++l) {
    dense_[l].collect(prefix + "layer" + std::to_string(l) + ".", out);
  }
  for (std::size_t l = 0; l < lstm_.size(); ++l) {
    lstm_[l].collect(prefix + "layer" + std::to_string(l) + ".", out);
  }
}

// ---------------------------------------------------------------------------
// Predictor

void PredictorConfig::validate() const {
  if (kind == PredictorKind::kCnn && context_n < 1) {
    throw std::invalid_argument("PredictorConfig: cnn context_n must be >= 1");
  }
  if (embed_dim < 1 || hidden_dim < 1 || vocab_size < 1) {
    throw std::invalid_argument("PredictorConfig: sizes must be positive");
  }
}

std::string PredictorConfig::label() const {
  return kind == PredictorKind::kCnn ? "cnn-" + std::to_string(context_n) : "rnn";
}

Predictor::Predictor(const PredictorConfig& config, Rng& rng) : config_(config) {
  config_.validate();
  const std::size_t V = config_.vocab_size, E = config_.embed_dim,
                    H = config_.hidden_dim;
  embedding = Parameter(Shape{V + 1, E});
  uniform_init(embedding.value, 1.0, rng);
  if (config_.kind == PredictorKind::kCnn) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(E * config_.context_n));
    for (int k = 0; k < config_.context_n; ++k) {
      kernels.emplace_back(Shape{H, E});
      uniform_init(kernels.back().value, bound, rng);
    }
    conv_bias = Parameter(Shape{H});
  } else {
    lstm = Lstm(E, H, rng);
  }
}

std::vector<double> Predictor::cnn_output(std::span<const int> window) const {
  // window holds context_n symbols, oldest first; kernel k sees lag k
  const std::size_t n = kernels.size();
  std::vector<double> out(conv_bias.value.values().begin(),
                          conv_bias.value.values().end());
  for (std::size_t k = 0; k < n; ++k) {
    gemv_acc(kernels[k].value, embedding.value.slice(window[n - 1 - k]), out);
  }
  return out;
}

Tensor Predictor::forward(std::span<const int> tokens, Cache* cache) const {
  const std::size_t U = tokens.size(), H = config_.hidden_dim;
  std::vector<int> symbols;
  symbols.reserve(U + 1);
  symbols.push_back(start_symbol());
  for (int tok : tokens) {
    if (tok < 0 || tok >= config_.vocab_size) {
      throw std::invalid_argument("Predictor: token " + std::to_string(tok) +
                                  " out of range");
    }
    symbols.push_back(tok);
  }
  Tensor out({U + 1, H});
  if (config_.kind == PredictorKind::kCnn) {
    const int n = config_.context_n;
    std::vector<int> window(n);
    for (std::size_t u = 0; u <= U; ++u) {
      for (int k = 0; k < n; ++k) {
        const long pos = static_cast<long>(u) - (n - 1 - k);
        window[k] = pos < 0 ? start_symbol() : symbols[pos];
      }
      auto g = cnn_output(window);
      std::copy(g.begin(), g.end(), out.slice(u).begin());
    }
    if (cache) cache->symbols = std::move(symbols);
  } else {
    Tensor x({U + 1, static_cast<std::size_t>(config_.embed_dim)});
    for (std::size_t u = 0; u <= U; ++u) {
      auto e = embedding.value.slice(symbols[u]);
      std::copy(e.begin(), e.end(), x.slice(u).begin());
    }
    out = lstm.forward(x, cache ? &cache->lstm : nullptr);
    if (cache) cache->symbols = std::move(symbols);
  }
  return out;
}

void Predictor::backward(const Cache& cache, const Tensor& d_outputs) {
  const std::size_t U1 = cache.symbols.size();
  if (config_.kind == PredictorKind::kCnn) {
    const int n = config_.context_n;
    for (std::size_t u = 0; u < U1; ++u) {
      auto dg = d_outputs.slice(u);
      axpy(1.0, dg, conv_bias.grad.values());
      for (int k = 0; k < n; ++k) {
        const long pos = static_cast<long>(u) - k;
        const int sym = pos < 0 ? start_symbol() : cache.symbols[pos];
        ger_acc(dg, embedding.value.slice(sym), kernels[k].grad);
        gemv_t_acc(kernels[k].value, dg, embedding.grad.slice(sym));
      }
    }
  } else {
    Tensor dx;
    lstm.backward(cache.lstm, d_outputs, &dx);
    for (std::size_t u = 0; u < U1; ++u) {
      axpy(1.0, dx.slice(u), embedding.grad.slice(cache.symbols[u]));
    }
  }
}

Predictor::State Predictor::start() const {
  State s;
  if (config_.kind == PredictorKind::kCnn) {
    s.window.assign(config_.context_n, start_symbol());
    s.output = cnn_output(s.window);
  } else {
    s.lstm = lstm.step(lstm.initial_state(), embedding.value.slice(start_symbol()));
    s.output = s.lstm.h;
  }
  return s;
}

Predictor::State Predictor::advance(const State& state, int token) const {
  if (token < 0 || token >= config_.vocab_size) {
    throw std::invalid_argument("Predictor: token " + std::to_string(token) +
                                " out of range");
  }
  State s;
  if (config_.kind == PredictorKind::kCnn) {
    s.window.assign(state.window.begin() + 1, state.window.end());
    s.window.push_back(token);
    s.output = cnn_output(s.window);
  } else {
    s.lstm = lstm.step(state.lstm, embedding.value.slice(token));
    s.output = s.lstm.h;
  }
  return s;
}

void Predictor::collect(const std::string& prefix,
                        std::vector<NamedParameter>& out) {
  out.push_back({prefix + "embedding", &embedding});
  if (config_.kind == PredictorKind::kCnn) {
    for (std::size_t k = 0; k < kernels.size(); ++k) {
      out.push_back({prefix + "kernel" + std::to_string(k), &kernels[k]});
    }
    out.push_back({prefix + "conv_bias", &conv_bias});
  } else {
    lstm.collect(prefix + "lstm.", out);
  }
}

// ---------------------------------------------------------------------------
// Joiner

Joiner::Joiner(std::size_t encoder_dim, std::size_t predictor_dim,
               std::size_t joint_dim, std::size_t vocab, Rng& rng)
    : P(Shape{joint_dim, encoder_dim}),
      Q(Shape{joint_dim, predictor_dim}),
      A(Shape{vocab, joint_dim}),
      b_h(Shape{joint_dim}),
      b_s(Shape{vocab}) {
  uniform_init(P.value, 1.0 / std::sqrt(static_cast<double>(encoder_dim)), rng);
  uniform_init(Q.value, 1.0 / std::sqrt(static_cast<double>(predictor_dim)), rng);
  uniform_init(A.value, 1.0 / std::sqrt(static_cast<double>(joint_dim)), rng);
}

JoinerParams Joiner::snapshot() const {
  return {P.value, Q.value, A.value, b_h.value, b_s.value};
}

std::vector<Joiner::Cell> all_cells(std::size_t frames, std::size_t labels) {
  std::vector<Joiner::Cell> cells;
  cells.reserve(frames * (labels + 1));
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t u = 0; u <= labels; ++u) cells.push_back({t, u});
  }
  return cells;
}

namespace {

Tensor project_rows(const Tensor& w, const Tensor& x, const Tensor* bias) {
  const std::size_t N = x.dim(0), J = w.dim(0);
  Tensor out({N, J});
  for (std::size_t i = 0; i < N; ++i) {
    auto row = out.slice(i);
    if (bias) std::copy(bias->values().begin(), bias->values().end(), row.begin());
    gemv_acc(w, x.slice(i), row);
  }
  return out;
}

}  // namespace

Tensor Joiner::cells_forward(const Tensor& enc, const Tensor& pred,
                             std::span<const Cell> cells, Cache* cache) const {
  if (enc.dim(1) != P.value.dim(1) || pred.dim(1) != Q.value.dim(1)) {
    throw std::invalid_argument("Joiner: input dimension mismatch");
  }
  const std::size_t J = joint_dim(), V = vocab_size();
  const Tensor pf = project_rows(P.value, enc, &b_h.value);
  const Tensor qg = project_rows(Q.value, pred, nullptr);
  Tensor out({cells.size(), V});
  if (cache) cache->hidden = Tensor({cells.size(), J});
  std::vector<double> h(J);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto a = pf.slice(cells[i].t);
    auto b = qg.slice(cells[i].u);
    for (std::size_t k = 0; k < J; ++k) h[k] = std::tanh(a[k] + b[k]);
    auto row = out.slice(i);
    std::copy(b_s.value.values().begin(), b_s.value.values().end(), row.begin());
    gemv_acc(A.value, h, row);
    if (cache) std::copy(h.begin(), h.end(), cache->hidden.slice(i).begin());
  }
  return out;
}

void Joiner::cells_backward(const Tensor& enc, const Tensor& pred,
                            std::span<const Cell> cells, const Cache& cache,
                            const Tensor& d_logits, Tensor* d_enc,
                            Tensor* d_pred) {
  const std::size_t J = joint_dim();
  Tensor d_pf({enc.dim(0), J});
  Tensor d_qg({pred.dim(0), J});
  std::vector<double> dh(J);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto dz = d_logits.slice(i);
    bool nonzero = false;
    for (double v : dz) nonzero = nonzero || v != 0.0;
    if (!nonzero) continue;
    auto h = cache.hidden.slice(i);
    ger_acc(dz, h, A.grad);
    axpy(1.0, dz, b_s.grad.values());
    std::fill(dh.begin(), dh.end(), 0.0);
    gemv_t_acc(A.value, dz, dh);
    for (std::size_t k = 0; k < J; ++k) dh[k] *= 1.0 - h[k] * h[k];
    axpy(1.0, dh, d_pf.slice(cells[i].t));
    axpy(1.0, dh, d_qg.slice(cells[i].u));
  }
  if (d_enc) *d_enc = Tensor(enc.shape());
  if (d_pred) *d_pred = Tensor(pred.shape());
  for (std::size_t t = 0; t < enc.dim(0); ++t) {
    auto d = d_pf.slice(t);
    axpy(1.0, d, b_h.grad.values());
    ger_acc(d, enc.slice(t), P.grad);
    if (d_enc) gemv_t_acc(P.value, d, d_enc->slice(t));
  }
  for (std::size_t u = 0; u < pred.dim(0); ++u) {
    auto d = d_qg.slice(u);
    ger_acc(d, pred.slice(u), Q.grad);
    if (d_pred) gemv_t_acc(Q.value, d, d_pred->slice(u));
  }
}

Tensor Joiner::lattice_forward(const Tensor& enc, const Tensor& pred,
                               Cache* cache) const {
  const auto cells = all_cells(enc.dim(0), pred.dim(0) - 1);
  Tensor out = cells_forward(enc, pred, cells, cache);
  out.reshape({enc.dim(0), pred.dim(0), vocab_size()});
  return out;
}

void Joiner::lattice_backward(const Tensor& enc, const Tensor& pred,
                              const Cache& cache, const Tensor& d_logits,
                              Tensor* d_enc, Tensor* d_pred) {
  const auto cells = all_cells(enc.dim(0), pred.dim(0) - 1);
  Tensor flat = d_logits;
  flat.reshape({cells.size(), vocab_size()});
  cells_backward(enc, pred, cells, cache, flat, d_enc, d_pred);
}

std::vector<double> Joiner::project_encoder(std::span<const double> f) const {
  std::vector<double> out(b_h.value.values().begin(), b_h.value.values().end());
  gemv_acc(P.value, f, out);
  return out;
}

std::vector<double> Joiner::project_predictor(std::span<const double> g) const {
  std::vector<double> out(joint_dim(), 0.0);
  gemv_acc(Q.value, g, out);
  return out;
}

std::vector<double> Joiner::logits(std::span<const double> enc_proj,
                                   std::span<const double> pred_proj) const {
  std::vector<double> h(joint_dim());
  for (std::size_t k = 0; k < h.size(); ++k) {
    h[k] = std::tanh(enc_proj[k] + pred_proj[k]);
  }
  std::vector<double> out(b_s.value.values().begin(), b_s.value.values().end());
  gemv_acc(A.value, h, out);
  return out;
}

void Joiner::collect(const std::string& prefix, std::vector<NamedParameter>& out) {
  out.push_back({prefix + "P", &P});
  out.push_back({prefix + "Q", &Q});
  out.push_back({prefix + "A", &A});
  out.push_back({prefix + "b_h", &b_h});
  out.push_back({prefix + "b_s", &b_s});
}

// ---------------------------------------------------------------------------
// Checkpoints

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  nlohmann::json tensors = nlohmann::json::object();
  for (const auto& [name, tensor] : checkpoint.tensors) {
    check_finite(tensor, "checkpoint tensor '" + name + "'");
    tensors[name] = {{"shape", tensor.shape()},
                     {"values", std::vector<double>(tensor.values().begin(),
                                                    tensor.values().end())}};
  }
  nlohmann::json j = {{"config", checkpoint.config},
                      {"step", checkpoint.step},
                      {"metric", checkpoint.metric},
                      {"metric_name", checkpoint.metric_name},
                      {"tensors", std::move(tensors)}};
  return j.dump() + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  Checkpoint ck;
  try {
    const auto j = nlohmann::json::parse(text);
    ck.config = j.at("config");
    ck.step = j.at("step").get<std::int64_t>();
    ck.metric = j.at("metric").get<double>();
    ck.metric_name = j.at("metric_name").get<std::string>();
    for (const auto& [name, t] : j.at("tensors").items()) {
      ck.tensors.emplace(name, Tensor(t.at("shape").get<Shape>(),
                                      t.at("values").get<std::vector<double>>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
  return ck;
}

void write_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  write_file_atomic(path, serialize_checkpoint(checkpoint));
}

Checkpoint read_checkpoint(const std::string& path) {
  return parse_checkpoint(read_file(path));
}

Checkpoint average_checkpoints(std::span<const Checkpoint> checkpoints) {
  if (checkpoints.empty()) {
    throw std::invalid_argument("average_checkpoints: no checkpoints");
  }
  Checkpoint avg = checkpoints.front();
  for (std::size_t i = 1; i < checkpoints.size(); ++i) {
    const auto& other = checkpoints[i].tensors;
    if (other.size() != avg.tensors.size()) {
      throw std::invalid_argument("average_checkpoints: tensor sets differ");
    }
    for (auto& [name, tensor] : avg.tensors) {
      auto it = other.find(name);
      if (it == other.end() || it->second.shape() != tensor.shape()) {
        throw std::invalid_argument("average_checkpoints: mismatch at '" + name + "'");
      }
      axpy(1.0, it->second.values(), tensor.values());
    }
  }
  const double n = static_cast<double>(checkpoints.size());
  if (checkpoints.size() > 1) {
    for (auto& [name, tensor] : avg.tensors) {
      for (double& v : tensor.values()) v /= n;
    }
  }
  return avg;
}

Checkpoint checkpoint_from(std::span<const NamedParameter> params) {
  Checkpoint ck;
  for (const auto& p : params) ck.tensors.emplace(p.name, p.param->value);
  return ck;
}

void load_parameters(const Checkpoint& checkpoint,
                     std::span<const NamedParameter> params) {
  for (const auto& p : params) {
    auto it = checkpoint.tensors.find(p.name);
    if (it == checkpoint.tensors.end()) {
      throw DataError("checkpoint is missing tensor '" + p.name + "'");
    }
    if (it->second.shape() != p.param->value.shape()) {
      throw DataError("checkpoint tensor '" + p.name + "' has shape " +
                      shape_to_string(it->second.shape()) + ", expected " +
                      shape_to_string(p.param->value.shape()));
    }
    p.param->value = it->second;
    p.param->grad = Tensor(it->second.shape());
  }
}

// ---------------------------------------------------------------------------
// Transducers

void AsrModelConfig::validate() const {
  encoder.validate();
  predictor.validate();
  if (num_labels < 1 || joint_dim < 1 || num_roles < 0 || num_roles >= num_labels) {
    throw std::invalid_argument("AsrModelConfig: invalid sizes");
  }
  if (predictor.vocab_size != num_labels) {
    throw std::invalid_argument("AsrModelConfig: predictor vocabulary must equal num_labels");
  }
}

AsrModel::AsrModel(const AsrModelConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  Rng rng(seed);
  encoder = Encoder(config_.encoder, rng);
  predictor = Predictor(config_.predictor, rng);
  joiner = Joiner(config_.encoder.hidden_dim, config_.predictor.hidden_dim,
                  config_.joint_dim, config_.num_labels + 1, rng);
}

std::vector<NamedParameter> AsrModel::parameters() {
  std::vector<NamedParameter> out;
  encoder.collect("encoder.", out);
  predictor.collect("predictor.", out);
  joiner.collect("joiner.", out);
  return out;
}

void AsrModel::set_frozen(bool frozen) {
  for (auto& p : parameters()) p.param->frozen = frozen;
}

std::uint64_t AsrModel::parameter_hash() const {
  auto params = const_cast<AsrModel*>(this)->parameters();
  return hash_values(params);
}

Checkpoint AsrModel::to_checkpoint() const {
  Checkpoint ck = checkpoint_from(const_cast<AsrModel*>(this)->parameters());
  ck.config = {{"model_type", config_.num_roles > 0 ? "role_asr" : "asr"},
               {"model", config_}};
  return ck;
}

AsrModel AsrModel::from_checkpoint(const Checkpoint& checkpoint) {
  AsrModelConfig config;
  try {
    config = checkpoint.config.at("model").get<AsrModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint has no ASR model config: ") + e.what());
  }
  AsrModel model(config, 0);
  load_parameters(checkpoint, model.parameters());
  return model;
}

void RdModelConfig::validate() const {
  encoder.validate();
  if (!share_asr_predictor) predictor.validate();
  if (num_roles < 2 || joint_dim < 1) {
    throw std::invalid_argument("RdModelConfig: need >= 2 roles and joint_dim >= 1");
  }
  if (encoder.subsample_factor != 1) {
    throw std::invalid_argument("RdModelConfig: the RD encoder must preserve the frame rate");
  }
}

RdModel::RdModel(const RdModelConfig& config, int asr_predictor_dim,
                 std::uint64_t seed)
    : config_(config), asr_predictor_dim_(asr_predictor_dim) {
  config_.validate();
  Rng rng(seed);
  encoder = Encoder(config_.encoder, rng);
  int pred_dim = asr_predictor_dim;
  if (!config_.share_asr_predictor) {
    predictor = Predictor(config_.predictor, rng);
    pred_dim = config_.predictor.hidden_dim;
  }
  if (pred_dim < 1) throw std::invalid_argument("RdModel: predictor width unknown");
  joiner = Joiner(config_.encoder.hidden_dim, pred_dim, config_.joint_dim,
                  config_.num_roles, rng);
}

std::vector<NamedParameter> RdModel::parameters() {
  std::vector<NamedParameter> out;
  encoder.collect("encoder.", out);
  if (predictor) predictor->collect("predictor.", out);
  joiner.collect("joiner.", out);
  return out;
}

Checkpoint RdModel::to_checkpoint() const {
  Checkpoint ck = checkpoint_from(const_cast<RdModel*>(this)->parameters());
  ck.config = {{"model_type", "rd"},
               {"model", config_},
               {"asr_predictor_dim", asr_predictor_dim_}};
  return ck;
}

RdModel RdModel::from_checkpoint(const Checkpoint& checkpoint) {
  RdModelConfig config;
  int asr_dim = 0;
  try {
    config = checkpoint.config.at("model").get<RdModelConfig>();
    asr_dim = checkpoint.config.at("asr_predictor_dim").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint has no RD model config: ") + e.what());
  }
  RdModel model(config, asr_dim, 0);
  load_parameters(checkpoint, model.parameters());
  return model;
}

Predictor init_rd_predictor_from(const Checkpoint& checkpoint,
                                 const PredictorConfig& rd_config) {
  PredictorConfig source;
  try {
    source = checkpoint.config.at("model").at("predictor").get<PredictorConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint has no predictor config: ") + e.what());
  }
  const bool compatible =
      source.kind == rd_config.kind && source.embed_dim == rd_config.embed_dim &&
      source.hidden_dim == rd_config.hidden_dim &&
      (source.kind == PredictorKind::kRnn || source.context_n == rd_config.context_n) &&
      source.vocab_size >= rd_config.vocab_size;
  if (!compatible) {
    throw std::invalid_argument("cannot initialize a " + rd_config.label() +
                                " predictor from a " + source.label() +
                                " predictor with different sizes");
  }
  Rng rng(0);
  Predictor src(source, rng);
  std::vector<NamedParameter> src_params;
  src.collect("predictor.", src_params);
  load_parameters(checkpoint, src_params);

  Predictor dst(rd_config, rng);
  std::vector<NamedParameter> dst_params;
  dst.collect("predictor.", dst_params);
  for (std::size_t i = 0; i < dst_params.size(); ++i) {
    Tensor& to = dst_params[i].param->value;
    const Tensor& from = src_params[i].param->value;
    if (dst_params[i].name.ends_with("embedding")) {
      const std::size_t V = rd_config.vocab_size;
      for (std::size_t r = 0; r < V; ++r) {
        std::copy(from.slice(r).begin(), from.slice(r).end(), to.slice(r).begin());
      }
      auto start = from.slice(source.vocab_size);
      std::copy(start.begin(), start.end(), to.slice(V).begin());
    } else {
      to = from;
    }
  }
  return dst;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::string kind_name(EncoderKind k) {
  return k == EncoderKind::kFeedforward ? "feedforward" : "recurrent";
}
EncoderKind encoder_kind(const std::string& s) {
  if (s == "feedforward") return EncoderKind::kFeedforward;
  if (s == "recurrent") return EncoderKind::kRecurrent;
  throw std::invalid_argument("unknown encoder kind '" + s + "'");
}
std::string kind_name(PredictorKind k) {
  return k == PredictorKind::kCnn ? "cnn" : "rnn";
}
PredictorKind predictor_kind(const std::string& s) {
  if (s == "cnn") return PredictorKind::kCnn;
  if (s == "rnn") return PredictorKind::kRnn;
  throw std::invalid_argument("unknown predictor kind '" + s + "'");
}

}  // namespace

void to_json(nlohmann::json& j, const EncoderConfig& c) {
  j = {{"kind", kind_name(c.kind)},       {"num_layers", c.num_layers},
       {"hidden_dim", c.hidden_dim},      {"input_dim", c.input_dim},
       {"tap_layer", c.tap_layer},        {"subsample_factor", c.subsample_factor}};
}
void from_json(const nlohmann::json& j, EncoderConfig& c) {
  c.kind = encoder_kind(j.value("kind", kind_name(c.kind)));
  c.num_layers = j.value("num_layers", c.num_layers);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.input_dim = j.value("input_dim", c.input_dim);
  c.tap_layer = j.value("tap_layer", c.tap_layer);
  c.subsample_factor = j.value("subsample_factor", c.subsample_factor);
}
void to_json(nlohmann::json& j, const PredictorConfig& c) {
  j = {{"kind", kind_name(c.kind)},    {"context_n", c.context_n},
       {"embed_dim", c.embed_dim},     {"hidden_dim", c.hidden_dim},
       {"vocab_size", c.vocab_size}};
}
void from_json(const nlohmann::json& j, PredictorConfig& c) {
  c.kind = predictor_kind(j.value("kind", kind_name(c.kind)));
  c.context_n = j.value("context_n", c.context_n);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
}
void to_json(nlohmann::json& j, const AsrModelConfig& c) {
  j = {{"encoder", c.encoder},     {"predictor", c.predictor},
       {"joint_dim", c.joint_dim}, {"num_labels", c.num_labels},
       {"num_roles", c.num_roles}};
}
void from_json(const nlohmann::json& j, AsrModelConfig& c) {
  if (j.contains("encoder")) from_json(j.at("encoder"), c.encoder);
  if (j.contains("predictor")) from_json(j.at("predictor"), c.predictor);
  c.joint_dim = j.value("joint_dim", c.joint_dim);
  c.num_labels = j.value("num_labels", c.num_labels);
  c.num_roles = j.value("num_roles", c.num_roles);
}
void to_json(nlohmann::json& j, const RdModelConfig& c) {
  j = {{"encoder", c.encoder},
       {"predictor", c.predictor},
       {"share_asr_predictor", c.share_asr_predictor},
       {"joint_dim", c.joint_dim},
       {"num_roles", c.num_roles}};
}
void from_json(const nlohmann::json& j, RdModelConfig& c) {
  if (j.contains("encoder")) from_json(j.at("encoder"), c.encoder);
  if (j.contains("predictor")) from_json(j.at("predictor"), c.predictor);
  c.share_asr_predictor = j.value("share_asr_predictor", c.share_asr_predictor);
  c.joint_dim = j.value("joint_dim", c.joint_dim);
  c.num_roles = j.value("num_roles", c.num_roles);
}
void to_json(nlohmann::json& j, const AdamConfig& c) {
  j = {{"learning_rate", c.learning_rate}, {"beta1", c.beta1},
       {"beta2", c.beta2},                 {"epsilon", c.epsilon},
       {"weight_decay", c.weight_decay},   {"warmup_steps", c.warmup_steps}};
}
void from_json(const nlohmann::json& j, AdamConfig& c) {
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
}

}  // namespace rdlab
