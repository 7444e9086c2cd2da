// SPDX-License-Identifier: Apache-2.0
/**
 * @file   hyperopt.hpp
 * @brief  Gaussian-process Bayesian optimisation with expected improvement.
 *
 * The optimiser works in an encoded unit hypercube. A snapping function maps
 * any point of the cube onto the nearest admissible point (integer levels,
 * binary choices), and is applied to every candidate before it is scored.
 * The objective is maximised.
 */
#ifndef FAILSEQ_HYPEROPT_HPP
#define FAILSEQ_HYPEROPT_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "failseq/events.hpp"
#include "failseq/linalg.hpp"
#include "failseq/rng.hpp"
#include "failseq/seqmodel.hpp"
#include "failseq/training.hpp"

namespace failseq {

/// Squared-exponential kernel s2 * exp(-|a - b|^2 / (2 l^2)) plus noise on
/// the diagonal.
struct GpKernel {
  double length_scale = 0.3;
  double signal_variance = 0.25;
  double noise_variance = 1e-4;

  double operator()(std::span<const double> a, std::span<const double> b) const;
};

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;
  double stddev() const;
};

/// Exact GP regression with a constant prior mean equal to mean(y).
class GpPosterior {
 public:
  /// Throws std::invalid_argument on empty or ragged input and
  /// std::domain_error if the kernel matrix stays singular after jitter.
  static GpPosterior fit(std::vector<Vector> x, Vector y, const GpKernel& kernel = {});

  GpPrediction predict(std::span<const double> x) const;

  const std::vector<Vector>& points() const { return x_; }
  const Vector& values() const { return y_; }
  double prior_mean() const { return prior_mean_; }
  double best_value() const;
  const GpKernel& kernel() const { return kernel_; }

 private:
  std::vector<Vector> x_;
  Vector y_;
  GpKernel kernel_;
  double prior_mean_ = 0.0;
  Matrix chol_;
  Vector alpha_;
};

double normal_pdf(double z);
double normal_cdf(double z);

/// Maximisation-form EI for a Gaussian with the given mean and stddev.
double expected_improvement(double mean, double stddev, double best);
double expected_improvement(std::span<const double> x, const GpPosterior& gp, double best);

using Snapper = std::function<Vector(std::span<const double>)>;

/// Identity snapping (continuous cube).
Vector snap_identity(std::span<const double> x);

/// Draws pool_size uniform points in [0,1]^dims, snaps each, and returns the
/// EI argmax against gp.best_value(); ties go to the earliest draw.
Vector propose_next(const GpPosterior& gp, Rng& rng, std::size_t dims, const Snapper& snap,
                    std::size_t pool_size = 2048);

struct BayesOptConfig {
  std::size_t budget = 20;
  std::size_t init = 5;
  std::size_t pool_size = 2048;
  std::uint64_t seed = 0;
  GpKernel kernel;
};

struct Trial {
  Vector point;
  double value = 0.0;
  bool failed = false;
};

struct BayesOptResult {
  Vector best_point;
  double best_value = 0.0;
  std::vector<Trial> trace;
};

/// `init` seeded random (snapped) points, then GP fit / EI proposal rounds
/// until `budget` evaluations. An objective that throws is recorded with
/// value 0 and failed = true.
BayesOptResult bayes_optimize(const std::function<double(std::span<const double>)>& objective, std::size_t dims,
                              const Snapper& snap, const BayesOptConfig& cfg,
                              const std::function<void(std::size_t, const Trial&)>& on_trial = {});

/// Search space over learning rate (log scale), embedding size, LSTM size and
/// LSTM type. Encoded coordinates: [lr, embedding, lstm, type].
struct SearchSpace {
  double lr_min = 1e-3, lr_max = 1e-1;
  std::size_t embedding_min = 2, embedding_max = 8;
  std::size_t lstm_min = 4, lstm_max = 16;

  static constexpr std::size_t kDims = 4;

  Vector snap(std::span<const double> u) const;
  Vector encode(const HyperParams& hp) const;
  /// Copies every field not in the search space from `base`.
  HyperParams decode(std::span<const double> u, const HyperParams& base) const;
};

struct TuneConfig {
  BayesOptConfig bayes;
  SearchSpace space;
  std::size_t folds = 5;
  std::uint64_t fold_seed = 0;
  /// Reduced epoch budget for each cross-validation training run.
  std::size_t cv_epochs = 30;
  TrainOptions train;
};

struct TuneResult {
  HyperParams best;
  double best_f1 = 0.0;
  std::vector<std::pair<HyperParams, double>> trace;
};

/// "iteration=1 lr=... n=... l=... type=... cv_f1=..."
std::string format_trial(std::size_t iteration, const HyperParams& hp, double f1);

/// Maximises k-fold F1 on `ds`. Requires budget >= init >= 1.
TuneResult tune(const Dataset& ds, const HyperParams& base, const TuneConfig& cfg,
                const std::function<void(std::size_t, const HyperParams&, double)>& on_trial = {});

}  // namespace failseq

#endif  // FAILSEQ_HYPEROPT_HPP
