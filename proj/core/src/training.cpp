// SPDX-License-Identifier: Apache-2.0
#include "failseq/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "failseq/rng.hpp"
#include "parallel.hpp"

namespace failseq {

namespace {

constexpr double kProbEps = 1e-12;
constexpr std::size_t kChunk = 32;

struct TensorView {
  std::string name;
  std::span<double> data;
};

std::vector<TensorView> views(ModelParams& p) {
  std::vector<TensorView> out;
  p.for_each_tensor([&](const std::string& name, std::size_t, std::size_t, std::span<double> t) {
    out.push_back({name, t});
  });
  return out;
}

void add_into(ModelParams& acc, ModelParams& x) {
  auto a = views(acc);
  auto b = views(x);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].data.size(); ++j) a[i].data[j] += b[i].data[j];
}

double bce(int y, double p) {
  p = std::clamp(p, kProbEps, 1.0 - kProbEps);
  return y == 1 ? -std::log(p) : -std::log(1.0 - p);
}

std::vector<double> predict_all(const ModelParams& params, const Dataset& ds, std::size_t threads) {
  std::vector<double> probs(ds.size());
  detail::parallel_for(ds.size(), threads,
                       [&](std::size_t i) { probs[i] = predict_proba(ds.sessions[i].events, params); });
  return probs;
}

Metrics metrics_from(std::span<const Session> sessions, std::span<const double> probs) {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const int pred = predict_label(probs[i]);
    const int y = sessions[i].label;
    if (pred == 1 && y == 1) ++tp;
    else if (pred == 1) ++fp;
    else if (y == 1) ++fn;
    else ++tn;
  }
  return Metrics::from_counts(tp, fp, tn, fn);
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> idx) {
  Dataset out;
  out.vocab = ds.vocab;
  out.provenance = ds.provenance;
  out.sessions.reserve(idx.size());
  for (std::size_t i : idx) out.sessions.push_back(ds.sessions[i]);
  return out;
}

}  // namespace

Metrics Metrics::from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  const double total = static_cast<double>(tp + fp + tn + fn);
  m.accuracy = total > 0 ? static_cast<double>(tp + tn) / total : 0.0;
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

std::string format_epoch(const EpochRecord& r) {
  char buf[320];
  int len = std::snprintf(buf, sizeof buf, "epoch=%zu loss=%.6f acc=%.6f prec=%.6f rec=%.6f f1=%.6f", r.epoch,
                          r.train_loss, r.train.accuracy, r.train.precision, r.train.recall, r.train.f1);
  if (r.has_valid) {
    std::snprintf(buf + len, sizeof buf - static_cast<std::size_t>(len),
                  " val_loss=%.6f val_acc=%.6f val_prec=%.6f val_rec=%.6f val_f1=%.6f", r.valid_loss,
                  r.valid.accuracy, r.valid.precision, r.valid.recall, r.valid.f1);
  }
  return buf;
}

double cross_entropy(std::span<const int> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) {
    throw std::invalid_argument("cross_entropy: " + std::to_string(y.size()) + " labels vs " +
                                std::to_string(y_hat.size()) + " predictions");
  }
  if (y.empty()) throw std::invalid_argument("cross_entropy: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) total += bce(y[i], y_hat[i]);
  return total / static_cast<double>(y.size());
}

BatchGradients backward(std::span<const Session> batch, const ModelParams& params, const HyperParams& hp,
                        std::uint64_t dropout_seed, std::size_t threads) {
  if (batch.empty()) throw std::invalid_argument("backward: empty batch");
  const std::size_t chunks = (batch.size() + kChunk - 1) / kChunk;
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<ModelParams> partial(chunks);
  std::vector<double> partial_loss(chunks, 0.0);
  std::vector<double> probs(batch.size());

  detail::parallel_for(chunks, threads, [&](std::size_t c) {
    ModelParams g = ModelParams::zeros_like(params);
    double loss = 0.0;
    const std::size_t end = std::min(batch.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      Rng rng(derive_seed(dropout_seed, i));
      const ForwardPass pass = forward_train(batch[i].events, params, hp, rng);
      probs[i] = pass.prob;
      loss += bce(batch[i].label, pass.prob);
      accumulate_gradients(pass, params, (pass.prob - batch[i].label) * scale, g);
    }
    partial[c] = std::move(g);
    partial_loss[c] = loss;
  });

  BatchGradients out;
  out.grads = std::move(partial[0]);
  out.loss = partial_loss[0];
  for (std::size_t c = 1; c < chunks; ++c) {
    add_into(out.grads, partial[c]);
    out.loss += partial_loss[c];
  }
  out.loss *= scale;
  out.probs = std::move(probs);
  return out;
}

double clip_global_norm(ModelParams& grads, double max_norm) {
  double sq = 0.0;
  for (auto& v : views(grads))
    for (double x : v.data) sq += x * x;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto& v : views(grads))
      for (double& x : v.data) x *= s;
  }
  return norm;
}

void sgd_step(ModelParams& params, const ModelParams& grads, double learning_rate) {
  auto g = views(const_cast<ModelParams&>(grads));
  for (const auto& v : g) {
    if (!all_finite(v.data)) throw std::runtime_error("sgd_step: non-finite gradient in " + v.name);
  }
  auto p = views(params);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < p[i].data.size(); ++j) p[i].data[j] -= learning_rate * g[i].data[j];
}

AdamState::AdamState(const ModelParams& like)
    : m_(ModelParams::zeros_like(like)), v_(ModelParams::zeros_like(like)) {}

void AdamState::step(ModelParams& params, const ModelParams& grads, double learning_rate) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  auto g = views(const_cast<ModelParams&>(grads));
  for (const auto& v : g) {
    if (!all_finite(v.data)) throw std::runtime_error("adam: non-finite gradient in " + v.name);
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
  auto p = views(params);
  auto m = views(m_);
  auto v = views(v_);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p[i].data.size(); ++j) {
      const double gj = g[i].data[j];
      m[i].data[j] = beta1 * m[i].data[j] + (1.0 - beta1) * gj;
      v[i].data[j] = beta2 * v[i].data[j] + (1.0 - beta2) * gj * gj;
      p[i].data[j] -= learning_rate * (m[i].data[j] / c1) / (std::sqrt(v[i].data[j] / c2) + eps);
    }
  }
}

TrainReport train(const Dataset& train_ds, const Dataset* valid, const HyperParams& hp, const TrainOptions& opts) {
  hp.validate();
  if (train_ds.empty()) throw std::invalid_argument("train: empty training set");
  if (valid && !(valid->vocab == train_ds.vocab)) {
    throw std::invalid_argument("train: training and validation vocabularies differ");
  }
  if (valid && valid->empty()) valid = nullptr;

  TrainReport report;
  Rng init_rng(hp.seed);
  report.params = init_params(hp, train_ds.vocab.size(), init_rng);
  AdamState adam(report.params);

  std::vector<std::size_t> order(train_ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Session> batch;
  std::size_t streak = 0;

  for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(hp.seed, 2 * epoch));
    shuffle(std::span<std::size_t>(order), shuffle_rng);
    const std::uint64_t epoch_seed = derive_seed(hp.seed, 2 * epoch + 1);

    double loss_sum = 0.0;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += hp.batch_size, ++b) {
      const std::size_t end = std::min(order.size(), start + hp.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_ds.sessions[order[i]]);
      const std::uint64_t batch_seed = derive_seed(epoch_seed, b);

      BatchGradients bg = backward(batch, report.params, hp, batch_seed, opts.threads);
      // Training metrics come from the dropout passes of the gradient,
      // evaluated before the update.
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const int pred = predict_label(bg.probs[i]);
        const int y = batch[i].label;
        if (pred == 1 && y == 1) ++tp;
        else if (pred == 1) ++fp;
        else if (y == 1) ++fn;
        else ++tn;
      }
      loss_sum += bg.loss * static_cast<double>(batch.size());
      if (opts.clip_norm > 0.0) clip_global_norm(bg.grads, opts.clip_norm);
      if (hp.optimizer == OptimizerKind::adam) {
        adam.step(report.params, bg.grads, hp.learning_rate);
      } else {
        sgd_step(report.params, bg.grads, hp.learning_rate);
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.train = Metrics::from_counts(tp, fp, tn, fn);
    if (valid) {
      const auto vp = predict_all(report.params, *valid, opts.threads);
      rec.has_valid = true;
      rec.valid = metrics_from(valid->sessions, vp);
      double vl = 0.0;
      for (std::size_t i = 0; i < vp.size(); ++i) vl += bce(valid->sessions[i].label, vp[i]);
      rec.valid_loss = vl / static_cast<double>(vp.size());
    }
    report.history.push_back(rec);
    report.epochs_run = epoch;
    if (opts.on_epoch) opts.on_epoch(rec);

    if (rec.has_valid) {
      streak = rec.valid.f1 >= opts.early_stop_f1 ? streak + 1 : 0;
      if (opts.early_stop_patience > 0 && streak >= opts.early_stop_patience) break;
    }
  }
  return report;
}

Metrics evaluate(const ModelParams& params, const Dataset& ds, std::size_t threads) {
  if (ds.empty()) throw std::invalid_argument("evaluate: empty dataset");
  const auto probs = predict_all(params, ds, threads);
  return metrics_from(ds.sessions, probs);
}

Metrics evaluate(const SequenceModel& model, const Dataset& ds, std::size_t threads) {
  if (!(model.vocab == ds.vocab)) throw std::invalid_argument("evaluate: dataset vocabulary differs from model");
  return evaluate(model.params, ds, threads);
}

double dataset_loss(const ModelParams& params, const Dataset& ds, std::size_t threads) {
  if (ds.empty()) throw std::invalid_argument("dataset_loss: empty dataset");
  const auto probs = predict_all(params, ds, threads);
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) total += bce(ds.sessions[i].label, probs[i]);
  return total / static_cast<double>(probs.size());
}

std::vector<std::size_t> assign_folds(const Dataset& ds, std::size_t k, std::uint64_t fold_seed) {
  if (k < 2) throw std::invalid_argument("kfold: k must be >= 2");
  if (ds.size() < k) throw std::invalid_argument("kfold: fewer sessions than folds");
  // Canonical order first, so the assignment depends only on the multiset.
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = ds.sessions[a];
    const auto& sb = ds.sessions[b];
    if (sa.label != sb.label) return sa.label < sb.label;
    return sa.events < sb.events;
  });
  Rng rng(fold_seed);
  shuffle(std::span<std::size_t>(order), rng);
  std::vector<std::size_t> fold(ds.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) fold[order[pos]] = pos * k / order.size();
  return fold;
}

double kfold_f1(const Dataset& ds, const HyperParams& hp, std::size_t k, std::uint64_t fold_seed,
                const TrainOptions& opts) {
  const auto fold = assign_folds(ds, k, fold_seed);
  // Same canonical ordering as assign_folds, so each fold's training set is
  // built in an order independent of the input order.
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = ds.sessions[a];
    const auto& sb = ds.sessions[b];
    if (sa.label != sb.label) return sa.label < sb.label;
    return sa.events < sb.events;
  });

  double total = 0.0;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i : order) (fold[i] == f ? test_idx : train_idx).push_back(i);
    const Dataset train_part = subset(ds, train_idx);
    const Dataset test_part = subset(ds, test_idx);
    const TrainReport rep = train(train_part, nullptr, hp, opts);
    total += evaluate(rep.params, test_part, opts.threads).f1;
  }
  return total / static_cast<double>(k);
}

}  // namespace failseq
