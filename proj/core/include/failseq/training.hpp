// SPDX-License-Identifier: Apache-2.0
/**
 * @file   training.hpp
 * @brief  Cross-entropy loss, BPTT gradients, minibatch training, metrics
 *         and k-fold cross-validation.
 */
#ifndef FAILSEQ_TRAINING_HPP
#define FAILSEQ_TRAINING_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "failseq/events.hpp"
#include "failseq/seqmodel.hpp"

namespace failseq {

/// Confusion counts and derived scores for the failure (positive) class.
/// Precision, recall and F1 are reported as 0 when their denominator is 0.
struct Metrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;

  static Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);
  std::size_t total() const { return tp + fp + tn + fn; }
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  Metrics train;  // from the dropout forward passes of the epoch
  bool has_valid = false;
  double valid_loss = 0.0;
  Metrics valid;
};

/// "epoch=3 loss=0.41 acc=... prec=... rec=... f1=..." with validation fields
/// appended when present.
std::string format_epoch(const EpochRecord& r);

struct TrainReport {
  std::vector<EpochRecord> history;
  ModelParams params;
  std::size_t epochs_run = 0;
};

/// Mean binary cross-entropy; predictions are clamped to [1e-12, 1 - 1e-12].
double cross_entropy(std::span<const int> y, std::span<const double> y_hat);

struct BatchGradients {
  ModelParams grads;
  double loss = 0.0;
  std::vector<double> probs;  // training-mode prediction per batch entry
};

/// Exact gradient of the mean batch loss. Sequence i of the batch draws its
/// dropout mask from Rng(derive_seed(dropout_seed, i)), so repeated calls
/// with the same seed see the same masks. Work is split into fixed chunks
/// whose partial sums are added in chunk order; the result does not depend
/// on `threads`.
BatchGradients backward(std::span<const Session> batch, const ModelParams& params, const HyperParams& hp,
                        std::uint64_t dropout_seed, std::size_t threads = 1);

/// Rescales `grads` in place to global L2 norm `max_norm` if it exceeds it.
/// Returns the norm before clipping.
double clip_global_norm(ModelParams& grads, double max_norm);

/// p <- p - lr * g. Throws std::runtime_error naming the tensor if a
/// gradient entry is not finite; `params` is then left untouched.
void sgd_step(ModelParams& params, const ModelParams& grads, double learning_rate);

/// Adam with beta1 = 0.9, beta2 = 0.999, eps = 1e-8 and bias correction.
class AdamState {
 public:
  explicit AdamState(const ModelParams& like);
  void step(ModelParams& params, const ModelParams& grads, double learning_rate);

 private:
  ModelParams m_, v_;
  std::size_t t_ = 0;
};

struct TrainOptions {
  std::size_t threads = 1;
  double clip_norm = 5.0;
  /// Stop once validation F1 >= early_stop_f1 for early_stop_patience
  /// consecutive epochs. Needs a validation set.
  double early_stop_f1 = 0.999;
  std::size_t early_stop_patience = 5;
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Shuffles every epoch (seeded from hp.seed), runs minibatches of
/// hp.batch_size and records metrics. `valid` may be null.
TrainReport train(const Dataset& train_ds, const Dataset* valid, const HyperParams& hp,
                  const TrainOptions& opts = {});

/// Metrics at threshold 0.5.
Metrics evaluate(const ModelParams& params, const Dataset& ds, std::size_t threads = 1);
Metrics evaluate(const SequenceModel& model, const Dataset& ds, std::size_t threads = 1);

/// Mean inference-mode loss over a dataset.
double dataset_loss(const ModelParams& params, const Dataset& ds, std::size_t threads = 1);

/// Mean held-out F1 over k seeded folds. Fold membership depends on the
/// session multiset and `fold_seed`, not on the order of `ds`.
double kfold_f1(const Dataset& ds, const HyperParams& hp, std::size_t k = 5, std::uint64_t fold_seed = 0,
                const TrainOptions& opts = {});

/// Fold assignment used by kfold_f1: fold index per session.
std::vector<std::size_t> assign_folds(const Dataset& ds, std::size_t k, std::uint64_t fold_seed);

}  // namespace failseq

#endif  // FAILSEQ_TRAINING_HPP
