// include/rdlab/models.h

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

#ifndef RDLAB_MODELS_H_
#define RDLAB_MODELS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rdlab/lattice.h"
#include "rdlab/layers.h"
#include "rdlab/numerics.h"

namespace rdlab {

// ---------------------------------------------------------------------------
// Encoder

enum class EncoderKind { kFeedforward, kRecurrent };

struct EncoderConfig {
  EncoderKind kind = EncoderKind::kRecurrent;
  int num_layers = 2;
  int hidden_dim = 32;
  int input_dim = 16;
  int tap_layer = 1;  // 1-based layer whose output feeds the RD encoder
  int subsample_factor = 1;

  void validate() const;
};

/// Stack of residual layers. Layer l computes branch(x) + x (the skip is
/// dropped when the input and hidden widths differ); the branch is
/// tanh(W x + b) for feedforward layers and an LSTM for recurrent ones.
/// Frames are average-pooled in groups of `subsample_factor` first.
class Encoder {
 public:
  Encoder() = default;
  Encoder(const EncoderConfig& config, Rng& rng);

  const EncoderConfig& config() const { return config_; }

  struct Output {
    Tensor out;     // [T, hidden]
    Tensor tapped;  // [T, hidden]
  };
  struct Cache {
    std::vector<Tensor> inputs;  // per-layer inputs
    std::vector<Tensor> branch;  // feedforward branch outputs
    std::vector<Lstm::Cache> lstm;
  };

  Output forward(const Tensor& features, Cache* cache) const;
  /// d_tapped may be null.
  void backward(const Cache& cache, const Tensor& d_out, const Tensor* d_tapped);

  /// Zeroes every weight so each residual layer is the identity.
  void zero_init();
  void collect(const std::string& prefix, std::vector<NamedParameter>& out);

 private:
  bool residual(std::size_t layer) const;

  EncoderConfig config_;
  std::vector<Linear> dense_;
  std::vector<Lstm> lstm_;
};

Tensor subsample_frames(const Tensor& features, int factor);

// ---------------------------------------------------------------------------
// Predictor

enum class PredictorKind { kCnn, kRnn };

struct PredictorConfig {
  PredictorKind kind = PredictorKind::kCnn;
  int context_n = 2;
  int embed_dim = 16;
  int hidden_dim = 32;
  int vocab_size = 0;  // tokens consumed; the start symbol is vocab_size

  void validate() const;
  std::string label() const;  // "cnn-2", "rnn"
};

class Predictor {
 public:
  Predictor() = default;
  Predictor(const PredictorConfig& config, Rng& rng);

  const PredictorConfig& config() const { return config_; }
  int start_symbol() const { return config_.vocab_size; }

  struct Cache {
    std::vector<int> symbols;  // start symbol followed by the tokens
    Lstm::Cache lstm;
  };
  /// Outputs g_0..g_U, shape [U+1, hidden].
  Tensor forward(std::span<const int> tokens, Cache* cache) const;
  void backward(const Cache& cache, const Tensor& d_outputs);

  struct State {
    std::vector<int> window;  // cnn: last context_n symbols, oldest first
    Lstm::State lstm;
    std::vector<double> output;
  };
  State start() const;
  State advance(const State& state, int token) const;

  void collect(const std::string& prefix, std::vector<NamedParameter>& out);

  Parameter embedding;  // [vocab + 1, embed]
  std::vector<Parameter> kernels;  // cnn: context_n x [hidden, embed]
  Parameter conv_bias;             // cnn: [hidden]
  Lstm lstm;                       // rnn

 private:
  std::vector<double> cnn_output(std::span<const int> window) const;

  PredictorConfig config_;
};

// ---------------------------------------------------------------------------
// Joiner

/// Trainable joiner; logits = A tanh(P f + Q g + b_h) + b_s.
class Joiner {
 public:
  Joiner() = default;
  Joiner(std::size_t encoder_dim, std::size_t predictor_dim,
         std::size_t joint_dim, std::size_t vocab, Rng& rng);

  std::size_t vocab_size() const { return A.value.dim(0); }
  std::size_t joint_dim() const { return A.value.dim(1); }
  JoinerParams snapshot() const;

  struct Cell {
    std::size_t t;
    std::size_t u;
  };
  struct Cache {
    Tensor hidden;  // tanh(h) per cell, [cells, joint]
  };
  /// Logits for the listed cells, [cells, vocab].
  Tensor cells_forward(const Tensor& enc, const Tensor& pred,
                       std::span<const Cell> cells, Cache* cache) const;
  /// dEnc / dPred (may be null) are overwritten with input gradients.
  void cells_backward(const Tensor& enc, const Tensor& pred,
                      std::span<const Cell> cells, const Cache& cache,
                      const Tensor& d_logits, Tensor* d_enc, Tensor* d_pred);

  /// Full lattice, [T, U+1, vocab].
  Tensor lattice_forward(const Tensor& enc, const Tensor& pred,
                         Cache* cache) const;
  void lattice_backward(const Tensor& enc, const Tensor& pred,
                        const Cache& cache, const Tensor& d_logits,
                        Tensor* d_enc, Tensor* d_pred);

  // Decoding helpers: P f + b_h, Q g, and the logits from both.
  std::vector<double> project_encoder(std::span<const double> f) const;
  std::vector<double> project_predictor(std::span<const double> g) const;
  std::vector<double> logits(std::span<const double> enc_proj,
                             std::span<const double> pred_proj) const;

  void collect(const std::string& prefix, std::vector<NamedParameter>& out);

  Parameter P, Q, A, b_h, b_s;
};

std::vector<Joiner::Cell> all_cells(std::size_t frames, std::size_t labels);

// ---------------------------------------------------------------------------
// Checkpoints

/// Named tensors plus the configuration echo and training metadata.
struct Checkpoint {
  std::map<std::string, Tensor> tensors;
  nlohmann::json config = nlohmann::json::object();
  std::int64_t step = 0;
  double metric = 0.0;
  std::string metric_name;
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(const std::string& text);
void write_checkpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::string& path);

/// Elementwise mean over checkpoints sharing names and shapes. Metadata is
/// taken from the first checkpoint.
Checkpoint average_checkpoints(std::span<const Checkpoint> checkpoints);

Checkpoint checkpoint_from(std::span<const NamedParameter> params);
/// Copies every parameter from the checkpoint; shapes must match.
void load_parameters(const Checkpoint& checkpoint,
                     std::span<const NamedParameter> params);

// ---------------------------------------------------------------------------
// Full transducers

struct AsrModelConfig {
  EncoderConfig encoder;
  PredictorConfig predictor;
  int joint_dim = 32;
  int num_labels = 24;  // non-blank output tokens; blank is num_labels
  int num_roles = 0;    // > 0 for Role-ASR, whose last labels are roles

  void validate() const;
  int role_token_offset() const { return num_labels - num_roles; }
};

class AsrModel {
 public:
  AsrModel() = default;
  AsrModel(const AsrModelConfig& config, std::uint64_t seed);

  const AsrModelConfig& config() const { return config_; }
  std::size_t blank() const { return static_cast<std::size_t>(config_.num_labels); }
  std::size_t vocab_size() const { return blank() + 1; }

  std::vector<NamedParameter> parameters();
  void set_frozen(bool frozen);
  std::uint64_t parameter_hash() const;

  Checkpoint to_checkpoint() const;
  static AsrModel from_checkpoint(const Checkpoint& checkpoint);

  Encoder encoder;
  Predictor predictor;
  Joiner joiner;

 private:
  AsrModelConfig config_;
};

struct RdModelConfig {
  EncoderConfig encoder;
  PredictorConfig predictor;
  bool share_asr_predictor = false;  // reuse the frozen ASR predictor outputs
  int joint_dim = 32;
  int num_roles = 3;

  void validate() const;
};

class RdModel {
 public:
  RdModel() = default;
  /// `asr_predictor_dim` sizes Q when the ASR predictor is shared.
  RdModel(const RdModelConfig& config, int asr_predictor_dim,
          std::uint64_t seed);

  const RdModelConfig& config() const { return config_; }
  std::vector<NamedParameter> parameters();

  Checkpoint to_checkpoint() const;
  static RdModel from_checkpoint(const Checkpoint& checkpoint);

  Encoder encoder;
  std::optional<Predictor> predictor;  // empty when sharing the ASR predictor
  Joiner joiner;

 private:
  RdModelConfig config_;
  int asr_predictor_dim_ = 0;
};

/// Builds an RD predictor whose weights are copied from the predictor stored
/// in an ASR or Role-ASR checkpoint. Kinds, context and widths must agree;
/// the source vocabulary may be larger (Role-ASR), in which case the shared
/// token rows and the start row are copied.
Predictor init_rd_predictor_from(const Checkpoint& checkpoint,
                                 const PredictorConfig& rd_config);

// JSON conversions for the configuration types.
void to_json(nlohmann::json& j, const EncoderConfig& c);
void from_json(const nlohmann::json& j, EncoderConfig& c);
void to_json(nlohmann::json& j, const PredictorConfig& c);
void from_json(const nlohmann::json& j, PredictorConfig& c);
void to_json(nlohmann::json& j, const AsrModelConfig& c);
void from_json(const nlohmann::json& j, AsrModelConfig& c);
void to_json(nlohmann::json& j, const RdModelConfig& c);
void from_json(const nlohmann::json& j, RdModelConfig& c);
void to_json(nlohmann::json& j, const AdamConfig& c);
void from_json(const nlohmann::json& j, AdamConfig& c);

}  // namespace rdlab

#endif  // RDLAB_MODELS_H_
