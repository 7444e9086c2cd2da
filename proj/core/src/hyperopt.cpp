// SPDX-License-Identifier: Apache-2.0
#include "failseq/hyperopt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace failseq {

namespace {

double snap_level(double u, std::size_t lo, std::size_t hi) {
  if (hi == lo) return 0.0;
  const double span = static_cast<double>(hi - lo);
  const double level = std::round(std::clamp(u, 0.0, 1.0) * span);
  return level / span;
}

std::size_t decode_level(double u, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(std::llround(std::clamp(u, 0.0, 1.0) * static_cast<double>(hi - lo)));
}

}  // namespace

double GpKernel::operator()(std::span<const double> a, std::span<const double> b) const {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  return signal_variance * std::exp(-sq / (2.0 * length_scale * length_scale));
}

double GpPrediction::stddev() const { return std::sqrt(std::max(variance, 0.0)); }

GpPosterior GpPosterior::fit(std::vector<Vector> x, Vector y, const GpKernel& kernel) {
  if (x.empty() || x.size() != y.size()) throw std::invalid_argument("gp_fit: need |X| = |y| >= 1");
  const std::size_t dims = x.front().size();
  for (const auto& p : x)
    if (p.size() != dims) throw std::invalid_argument("gp_fit: ragged input points");

  GpPosterior gp;
  gp.x_ = std::move(x);
  gp.y_ = std::move(y);
  gp.kernel_ = kernel;
  const std::size_t n = gp.x_.size();
  gp.prior_mean_ = std::accumulate(gp.y_.begin(), gp.y_.end(), 0.0) / static_cast<double>(n);

  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) k(i, j) = k(j, i) = kernel(gp.x_[i], gp.x_[j]);

  double jitter = 0.0;
  for (int attempt = 0;; ++attempt) {
    Matrix kn = k;
    for (std::size_t i = 0; i < n; ++i) kn(i, i) += kernel.noise_variance + jitter;
    try {
      gp.chol_ = cholesky(kn);
      break;
    } catch (const std::domain_error&) {
      if (attempt >= 8) throw std::domain_error("gp_fit: kernel matrix singular after jitter escalation");
      jitter = jitter == 0.0 ? 1e-10 * kernel.signal_variance : jitter * 10.0;
    }
  }

  Vector centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = gp.y_[i] - gp.prior_mean_;
  gp.alpha_ = solve_lower_transpose(gp.chol_, solve_lower(gp.chol_, centered));
  return gp;
}

GpPrediction GpPosterior::predict(std::span<const double> x) const {
  const std::size_t n = x_.size();
  Vector k(n);
  for (std::size_t i = 0; i < n; ++i) k[i] = kernel_(x, x_[i]);
  GpPrediction out;
  out.mean = prior_mean_ + dot(k, alpha_);
  const Vector v = solve_lower(chol_, k);
  out.variance = std::max(0.0, kernel_.signal_variance - dot(v, v));
  return out;
}

double GpPosterior::best_value() const { return *std::max_element(y_.begin(), y_.end()); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mean, double stddev, double best) {
  const double gain = mean - best;
  if (!(stddev > 0.0)) return std::max(gain, 0.0);
  const double z = gain / stddev;
  return std::max(0.0, gain * normal_cdf(z) + stddev * normal_pdf(z));
}

double expected_improvement(std::span<const double> x, const GpPosterior& gp, double best) {
  const GpPrediction p = gp.predict(x);
  return expected_improvement(p.mean, p.stddev(), best);
}

Vector snap_identity(std::span<const double> x) {
  Vector out(x.begin(), x.end());
  for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  return out;
}

Vector propose_next(const GpPosterior& gp, Rng& rng, std::size_t dims, const Snapper& snap, std::size_t pool_size) {
  if (pool_size == 0) throw std::invalid_argument("propose_next: empty candidate pool");
  const double best = gp.best_value();
  Vector best_point;
  double best_ei = -1.0;
  Vector u(dims);
  for (std::size_t c = 0; c < pool_size; ++c) {
    for (double& v : u) v = rng.uniform();
    Vector cand = snap(u);
    const double ei = expected_improvement(cand, gp, best);
    if (ei > best_ei) {
      best_ei = ei;
      best_point = std::move(cand);
    }
  }
  return best_point;
}

BayesOptResult bayes_optimize(const std::function<double(std::span<const double>)>& objective, std::size_t dims,
                              const Snapper& snap, const BayesOptConfig& cfg,
                              const std::function<void(std::size_t, const Trial&)>& on_trial) {
  if (cfg.init < 1 || cfg.budget < cfg.init) throw std::invalid_argument("bayes_optimize: need budget >= init >= 1");
  Rng rng(cfg.seed);
  BayesOptResult res;

  auto evaluate = [&](Vector point) {
    Trial t;
    t.point = std::move(point);
    try {
      t.value = objective(t.point);
      if (!std::isfinite(t.value)) throw std::runtime_error("non-finite objective");
    } catch (const std::exception&) {
      t.value = 0.0;
      t.failed = true;
    }
    res.trace.push_back(t);
    if (on_trial) on_trial(res.trace.size(), t);
  };

  for (std::size_t i = 0; i < cfg.init; ++i) {
    Vector u(dims);
    for (double& v : u) v = rng.uniform();
    evaluate(snap(u));
  }
  while (res.trace.size() < cfg.budget) {
    std::vector<Vector> xs;
    Vector ys;
    for (const auto& t : res.trace) {
      xs.push_back(t.point);
      ys.push_back(t.value);
    }
    const GpPosterior gp = GpPosterior::fit(std::move(xs), std::move(ys), cfg.kernel);
    evaluate(propose_next(gp, rng, dims, snap, cfg.pool_size));
  }

  const auto best = std::max_element(res.trace.begin(), res.trace.end(),
                                     [](const Trial& a, const Trial& b) { return a.value < b.value; });
  res.best_point = best->point;
  res.best_value = best->value;
  return res;
}

Vector SearchSpace::snap(std::span<const double> u) const {
  if (u.size() != kDims) throw std::invalid_argument("SearchSpace: expected 4 coordinates");
  return {std::clamp(u[0], 0.0, 1.0), snap_level(u[1], embedding_min, embedding_max),
          snap_level(u[2], lstm_min, lstm_max), u[3] >= 0.5 ? 1.0 : 0.0};
}

Vector SearchSpace::encode(const HyperParams& hp) const {
  const double lr = std::clamp(hp.learning_rate, lr_min, lr_max);
  auto level = [](std::size_t v, std::size_t lo, std::size_t hi) {
    if (hi == lo) return 0.0;
    return static_cast<double>(std::clamp(v, lo, hi) - lo) / static_cast<double>(hi - lo);
  };
  return {std::log(lr / lr_min) / std::log(lr_max / lr_min), level(hp.embedding_size, embedding_min, embedding_max),
          level(hp.lstm_size, lstm_min, lstm_max), hp.lstm_type == LstmType::bidirectional ? 1.0 : 0.0};
}

HyperParams SearchSpace::decode(std::span<const double> u, const HyperParams& base) const {
  if (u.size() != kDims) throw std::invalid_argument("SearchSpace: expected 4 coordinates");
  HyperParams hp = base;
  hp.learning_rate = lr_min * std::pow(lr_max / lr_min, std::clamp(u[0], 0.0, 1.0));
  hp.embedding_size = decode_level(u[1], embedding_min, embedding_max);
  hp.lstm_size = decode_level(u[2], lstm_min, lstm_max);
  hp.lstm_type = u[3] >= 0.5 ? LstmType::bidirectional : LstmType::standard;
  return hp;
}

std::string format_trial(std::size_t iteration, const HyperParams& hp, double f1) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "iteration=%zu lr=%.6g n=%zu l=%zu type=%s cv_f1=%.6f", iteration,
                hp.learning_rate, hp.embedding_size, hp.lstm_size, std::string(to_string(hp.lstm_type)).c_str(), f1);
  return buf;
}

TuneResult tune(const Dataset& ds, const HyperParams& base, const TuneConfig& cfg,
                const std::function<void(std::size_t, const HyperParams&, double)>& on_trial) {
  HyperParams cv_base = base;
  cv_base.max_epochs = cfg.cv_epochs;
  const SearchSpace& space = cfg.space;

  auto objective = [&](std::span<const double> u) {
    return kfold_f1(ds, space.decode(u, cv_base), cfg.folds, cfg.fold_seed, cfg.train);
  };
  auto snap = [&](std::span<const double> u) { return space.snap(u); };

  TuneResult out;
  const BayesOptResult r = bayes_optimize(objective, SearchSpace::kDims, snap, cfg.bayes,
                                          [&](std::size_t i, const Trial& t) {
                                            const HyperParams hp = space.decode(t.point, base);
                                            out.trace.emplace_back(hp, t.value);
                                            if (on_trial) on_trial(i, hp, t.value);
                                          });
  out.best = space.decode(r.best_point, base);
  out.best_f1 = r.best_value;
  return out;
}

}  // namespace failseq
