// SPDX-License-Identifier: Apache-2.0
/**
 * @file   seqmodel.hpp
 * @brief  Embedding -> (bi-directional) LSTM -> dropout -> dense sigmoid.
 *
 * One LSTM direction computes, with z = [h_{t-1}, x_t] (hidden state first):
 *
 *   f_t  = sigmoid(W_f z + b_f)          forget gate
 *   r_t  = sigmoid(W_r z + b_r)          remember (input) gate
 *   u_t  = tanh(W_u z + b_u)             candidate cell state
 *   C_t  = f_t * C_{t-1} + r_t * u_t
 *   o_t  = sigmoid(W_o z + b_o)
 *   h_t  = o_t * tanh(C_t)
 *
 * The bi-directional variant runs a second direction with its own weights
 * over the reversed sequence and concatenates the two final hidden states.
 * Sequences of any length >= 1 are processed without padding.
 */
#ifndef FAILSEQ_SEQMODEL_HPP
#define FAILSEQ_SEQMODEL_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "failseq/events.hpp"
#include "failseq/linalg.hpp"
#include "failseq/rng.hpp"

namespace failseq {

enum class LstmType { standard, bidirectional };

std::string_view to_string(LstmType type);
LstmType parse_lstm_type(std::string_view text);

enum class OptimizerKind { sgd, adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view text);

struct HyperParams {
  std::size_t embedding_size = 3;
  std::size_t lstm_size = 6;
  LstmType lstm_type = LstmType::bidirectional;
  double learning_rate = 0.02;
  double dropout_rate = 0.4;
  std::size_t batch_size = 512;
  std::size_t max_epochs = 150;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t directions() const { return lstm_type == LstmType::bidirectional ? 2 : 1; }
  /// Width of the concatenated final hidden state fed to the dense layer.
  std::size_t feature_width() const { return directions() * lstm_size; }

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

struct DirectionParams {
  Matrix w_forget, w_remember, w_update, w_output;  // l x (l + n)
  Vector b_forget, b_remember, b_update, b_output;  // l

  friend bool operator==(const DirectionParams&, const DirectionParams&) = default;
};

struct ModelParams {
  Matrix embedding;  // (vocab_size + 1) x n, row 0 is the don't-care token
  std::vector<DirectionParams> directions;
  Vector dense_w;
  double dense_b = 0.0;

  /// Same shapes, every entry zero.
  static ModelParams zeros_like(const ModelParams& p);

  std::size_t vocab_rows() const { return embedding.rows(); }
  std::size_t embedding_size() const { return embedding.cols(); }
  std::size_t lstm_size() const { return directions.empty() ? 0 : directions.front().b_forget.size(); }

  /// Visits every tensor in a fixed order with a stable name, its shape and
  /// its storage. The dense bias is a 1x1 tensor.
  void for_each_tensor(const std::function<void(const std::string&, std::size_t rows, std::size_t cols,
                                                std::span<double>)>& fn);
  void for_each_tensor(const std::function<void(const std::string&, std::size_t rows, std::size_t cols,
                                                std::span<const double>)>& fn) const;

  std::size_t count() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Weights uniform in [-0.08, 0.08]; biases zero except the forget-gate bias,
/// which is 1. Draw order: embedding, then per direction W_f, W_r, W_u, W_o,
/// then the dense weights.
ModelParams init_params(const HyperParams& hp, std::size_t vocab_size, Rng& rng);

/// Trainable parameter count: per direction 4 l (l + n) + 4 l, plus the
/// (vocab_size + 1) x n embedding and the dense layer.
std::size_t param_count(const HyperParams& hp, std::size_t vocab_size);

struct CellState {
  Vector h;
  Vector c;
};

/// Activations of one step, kept for backpropagation.
struct GateCache {
  Vector input;  // [h_{t-1}, x_t]
  Vector forget, remember, update, output;
  Vector c_prev, c, tanh_c;
};

struct StepResult {
  CellState state;
  GateCache cache;
};

StepResult lstm_step(std::span<const double> x, const CellState& prev, const DirectionParams& dir);

/// Flat per-direction record of a forward pass. Row t of every block holds
/// step t in processing order (reversed for the backward direction).
struct DirectionTrace {
  std::vector<EventId> events;  // in processing order
  std::vector<double> input;    // T x (l + n)
  std::vector<double> gates;    // T x 4l: forget, remember, update, output
  std::vector<double> cell;     // (T + 1) x l, row 0 is C_0 = 0
  std::vector<double> tanh_cell;  // T x l
};

struct ForwardPass {
  double prob = 0.5;
  double logit = 0.0;
  Vector features;  // concatenated final hidden states, before dropout
  Vector mask;      // dropout mask; empty in inference
  std::vector<DirectionTrace> traces;
};

/// Training-mode forward pass; draws the dropout mask from `dropout_rng`.
ForwardPass forward_train(std::span<const EventId> seq, const ModelParams& params, const HyperParams& hp,
                          Rng& dropout_rng);

/// Inference-mode forward pass (no dropout).
ForwardPass forward_infer(std::span<const EventId> seq, const ModelParams& params);

/// Failure probability only; does not retain the trace.
double predict_proba(std::span<const EventId> seq, const ModelParams& params);

/// Adds d(loss)/d(params) to `grads`, given d(loss)/d(logit).
void accumulate_gradients(const ForwardPass& pass, const ModelParams& params, double dlogit, ModelParams& grads);

/// 1 iff prob >= 0.5.
inline int predict_label(double prob) { return prob >= 0.5 ? 1 : 0; }

/// A trained network together with the vocabulary it was trained on.
struct SequenceModel {
  HyperParams hp;
  Vocab vocab;
  ModelParams params;

  /// Rejects event indices outside [0, vocab.size()].
  double probability(std::span<const EventId> seq) const;
  int predict(std::span<const EventId> seq) const { return predict_label(probability(seq)); }
};

}  // namespace failseq

#endif  // FAILSEQ_SEQMODEL_HPP
