// SPDX-License-Identifier: Apache-2.0
#include "failseq/seqmodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace failseq {

namespace {

constexpr double kInitRange = 0.08;
constexpr double kForgetBias = 1.0;
constexpr double kCellBound = 1e6;

const char* direction_name(std::size_t d) { return d == 0 ? "fwd" : "bwd"; }

std::array<const Matrix*, 4> gate_weights(const DirectionParams& d) {
  return {&d.w_forget, &d.w_remember, &d.w_update, &d.w_output};
}
std::array<Matrix*, 4> gate_weights(DirectionParams& d) {
  return {&d.w_forget, &d.w_remember, &d.w_update, &d.w_output};
}
std::array<const Vector*, 4> gate_biases(const DirectionParams& d) {
  return {&d.b_forget, &d.b_remember, &d.b_update, &d.b_output};
}
std::array<Vector*, 4> gate_biases(DirectionParams& d) {
  return {&d.b_forget, &d.b_remember, &d.b_update, &d.b_output};
}

// One cell update. `z` is [h_prev, x] (length l + n); writes the four gate
// activations into `gates` (length 4l) and the new cell/hidden state.
void step_kernel(const DirectionParams& d, const double* z, const double* c_prev, double* gates, double* c,
                 double* tanh_c, double* h, std::size_t l) {
  const auto weights = gate_weights(d);
  const auto biases = gate_biases(d);
  const std::size_t width = weights[0]->cols();
  for (std::size_t g = 0; g < 4; ++g) {
    const double* w = weights[g]->data().data();
    const double* b = biases[g]->data();
    double* out = gates + g * l;
    for (std::size_t i = 0; i < l; ++i, w += width) {
      double acc = b[i];
      for (std::size_t k = 0; k < width; ++k) acc += w[k] * z[k];
      out[i] = g == 2 ? std::tanh(acc) : sigmoid(acc);
    }
  }
  for (std::size_t i = 0; i < l; ++i) {
    c[i] = gates[i] * c_prev[i] + gates[l + i] * gates[2 * l + i];
    if (!(std::abs(c[i]) < kCellBound)) throw std::logic_error("lstm: cell state diverged");
    tanh_c[i] = std::tanh(c[i]);
    h[i] = gates[3 * l + i] * tanh_c[i];
  }
}

void check_events(std::span<const EventId> seq, const ModelParams& params) {
  if (seq.empty()) throw std::invalid_argument("forward: empty sequence");
  for (EventId e : seq) {
    if (e >= params.vocab_rows()) {
      throw std::invalid_argument("forward: event index " + std::to_string(e) + " outside vocabulary of " +
                                  std::to_string(params.vocab_rows() - 1));
    }
  }
}

// Runs one direction; fills `trace` when non-null. Returns the final h in `h`.
void run_direction(std::span<const EventId> seq, bool reversed, const ModelParams& params,
                   const DirectionParams& dir, DirectionTrace* trace, std::span<double> h) {
  const std::size_t T = seq.size();
  const std::size_t l = params.lstm_size();
  const std::size_t n = params.embedding_size();
  const std::size_t width = l + n;

  std::vector<double> z(width), gates(4 * l), c_prev(l, 0.0), c(l), tanh_c(l);
  std::fill(h.begin(), h.end(), 0.0);
  if (trace) {
    trace->events.resize(T);
    trace->input.assign(T * width, 0.0);
    trace->gates.assign(T * 4 * l, 0.0);
    trace->cell.assign((T + 1) * l, 0.0);
    trace->tanh_cell.assign(T * l, 0.0);
  }
  for (std::size_t t = 0; t < T; ++t) {
    const EventId e = reversed ? seq[T - 1 - t] : seq[t];
    std::copy(h.begin(), h.end(), z.begin());
    const auto emb = params.embedding.row(e);
    std::copy(emb.begin(), emb.end(), z.begin() + static_cast<std::ptrdiff_t>(l));
    step_kernel(dir, z.data(), c_prev.data(), gates.data(), c.data(), tanh_c.data(), h.data(), l);
    if (trace) {
      trace->events[t] = e;
      std::copy(z.begin(), z.end(), trace->input.begin() + static_cast<std::ptrdiff_t>(t * width));
      std::copy(gates.begin(), gates.end(), trace->gates.begin() + static_cast<std::ptrdiff_t>(t * 4 * l));
      std::copy(c.begin(), c.end(), trace->cell.begin() + static_cast<std::ptrdiff_t>((t + 1) * l));
      std::copy(tanh_c.begin(), tanh_c.end(), trace->tanh_cell.begin() + static_cast<std::ptrdiff_t>(t * l));
    }
    std::swap(c_prev, c);
  }
}

ForwardPass run_forward(std::span<const EventId> seq, const ModelParams& params, bool keep_trace) {
  check_events(seq, params);
  const std::size_t l = params.lstm_size();
  ForwardPass pass;
  pass.features.assign(params.directions.size() * l, 0.0);
  if (keep_trace) pass.traces.resize(params.directions.size());
  for (std::size_t d = 0; d < params.directions.size(); ++d) {
    run_direction(seq, d == 1, params, params.directions[d], keep_trace ? &pass.traces[d] : nullptr,
                  std::span<double>(pass.features).subspan(d * l, l));
  }
  return pass;
}

void finish(ForwardPass& pass, const ModelParams& params) {
  double logit = params.dense_b;
  for (std::size_t i = 0; i < pass.features.size(); ++i) {
    const double m = pass.mask.empty() ? 1.0 : pass.mask[i];
    logit += params.dense_w[i] * pass.features[i] * m;
  }
  pass.logit = logit;
  pass.prob = sigmoid(logit);
}

}  // namespace

std::string_view to_string(LstmType type) {
  return type == LstmType::bidirectional ? "bidirectional" : "standard";
}

LstmType parse_lstm_type(std::string_view text) {
  if (text == "standard" || text == "std" || text == "uni") return LstmType::standard;
  if (text == "bidirectional" || text == "bi") return LstmType::bidirectional;
  throw std::invalid_argument("unknown LSTM type '" + std::string(text) + "'");
}

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(std::string_view text) {
  if (text == "sgd") return OptimizerKind::sgd;
  if (text == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + std::string(text) + "'");
}

void HyperParams::validate() const {
  if (embedding_size < 1) throw std::invalid_argument("HyperParams: embedding size must be >= 1");
  if (lstm_size < 1) throw std::invalid_argument("HyperParams: LSTM size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("HyperParams: learning rate must be positive");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw std::invalid_argument("HyperParams: dropout rate must be in [0, 1)");
  }
  if (batch_size < 1) throw std::invalid_argument("HyperParams: batch size must be >= 1");
}

ModelParams ModelParams::zeros_like(const ModelParams& p) {
  ModelParams z = p;
  z.for_each_tensor([](const std::string&, std::size_t, std::size_t, std::span<double> t) {
    std::fill(t.begin(), t.end(), 0.0);
  });
  return z;
}

void ModelParams::for_each_tensor(
    const std::function<void(const std::string&, std::size_t, std::size_t, std::span<double>)>& fn) {
  fn("embedding", embedding.rows(), embedding.cols(), embedding.data());
  for (std::size_t d = 0; d < directions.size(); ++d) {
    const std::string prefix = direction_name(d);
    auto& dir = directions[d];
    fn(prefix + ".w_forget", dir.w_forget.rows(), dir.w_forget.cols(), dir.w_forget.data());
    fn(prefix + ".w_remember", dir.w_remember.rows(), dir.w_remember.cols(), dir.w_remember.data());
    fn(prefix + ".w_update", dir.w_update.rows(), dir.w_update.cols(), dir.w_update.data());
    fn(prefix + ".w_output", dir.w_output.rows(), dir.w_output.cols(), dir.w_output.data());
    fn(prefix + ".b_forget", 1, dir.b_forget.size(), dir.b_forget);
    fn(prefix + ".b_remember", 1, dir.b_remember.size(), dir.b_remember);
    fn(prefix + ".b_update", 1, dir.b_update.size(), dir.b_update);
    fn(prefix + ".b_output", 1, dir.b_output.size(), dir.b_output);
  }
  fn("dense.w", 1, dense_w.size(), dense_w);
  fn("dense.b", 1, 1, std::span<double>(&dense_b, 1));
}

void ModelParams::for_each_tensor(
    const std::function<void(const std::string&, std::size_t, std::size_t, std::span<const double>)>& fn) const {
  const_cast<ModelParams*>(this)->for_each_tensor(
      [&](const std::string& name, std::size_t r, std::size_t c, std::span<double> t) {
        fn(name, r, c, std::span<const double>(t));
      });
}

std::size_t ModelParams::count() const {
  std::size_t total = 0;
  for_each_tensor([&](const std::string&, std::size_t, std::size_t, std::span<const double> t) {
    total += t.size();
  });
  return total;
}

ModelParams init_params(const HyperParams& hp, std::size_t vocab_size, Rng& rng) {
  hp.validate();
  const std::size_t n = hp.embedding_size;
  const std::size_t l = hp.lstm_size;
  auto fill_uniform = [&](std::span<double> t) {
    for (auto& v : t) v = rng.uniform(-kInitRange, kInitRange);
  };

  ModelParams p;
  p.embedding = Matrix(vocab_size + 1, n);
  fill_uniform(p.embedding.data());
  p.directions.resize(hp.directions());
  for (auto& dir : p.directions) {
    for (Matrix* w : gate_weights(dir)) {
      *w = Matrix(l, l + n);
      fill_uniform(w->data());
    }
    for (Vector* b : gate_biases(dir)) b->assign(l, 0.0);
    dir.b_forget.assign(l, kForgetBias);
  }
  p.dense_w.assign(hp.feature_width(), 0.0);
  fill_uniform(p.dense_w);
  p.dense_b = 0.0;
  return p;
}

std::size_t param_count(const HyperParams& hp, std::size_t vocab_size) {
  hp.validate();
  const std::size_t n = hp.embedding_size;
  const std::size_t l = hp.lstm_size;
  const std::size_t per_direction = 4 * l * (l + n) + 4 * l;
  return hp.directions() * per_direction + (vocab_size + 1) * n + hp.feature_width() + 1;
}

StepResult lstm_step(std::span<const double> x, const CellState& prev, const DirectionParams& dir) {
  const std::size_t l = dir.b_forget.size();
  if (prev.h.size() != l || prev.c.size() != l) {
    throw ShapeError("lstm_step: state size " + std::to_string(prev.h.size()) + "/" +
                     std::to_string(prev.c.size()) + " vs LSTM size " + std::to_string(l));
  }
  if (dir.w_forget.cols() != l + x.size()) {
    throw ShapeError("lstm_step: W" + dir.w_forget.shape_string() + " incompatible with [h(" +
                     std::to_string(l) + "), x(" + std::to_string(x.size()) + ")]");
  }
  StepResult out;
  auto& cache = out.cache;
  cache.input.assign(prev.h.begin(), prev.h.end());
  cache.input.insert(cache.input.end(), x.begin(), x.end());
  cache.c_prev = prev.c;
  Vector gates(4 * l);
  cache.c.resize(l);
  cache.tanh_c.resize(l);
  out.state.h.resize(l);
  step_kernel(dir, cache.input.data(), cache.c_prev.data(), gates.data(), cache.c.data(), cache.tanh_c.data(),
              out.state.h.data(), l);
  auto slice = [&](std::size_t g) { return Vector(gates.begin() + g * l, gates.begin() + (g + 1) * l); };
  cache.forget = slice(0);
  cache.remember = slice(1);
  cache.update = slice(2);
  cache.output = slice(3);
  out.state.c = cache.c;
  return out;
}

ForwardPass forward_train(std::span<const EventId> seq, const ModelParams& params, const HyperParams& hp,
                          Rng& dropout_rng) {
  ForwardPass pass = run_forward(seq, params, true);
  pass.mask = dropout_mask(pass.features.size(), hp.dropout_rate, dropout_rng);
  finish(pass, params);
  return pass;
}

ForwardPass forward_infer(std::span<const EventId> seq, const ModelParams& params) {
  ForwardPass pass = run_forward(seq, params, true);
  finish(pass, params);
  return pass;
}

double predict_proba(std::span<const EventId> seq, const ModelParams& params) {
  ForwardPass pass = run_forward(seq, params, false);
  finish(pass, params);
  return pass.prob;
}

void accumulate_gradients(const ForwardPass& pass, const ModelParams& params, double dlogit, ModelParams& grads) {
  const std::size_t l = params.lstm_size();
  const std::size_t n = params.embedding_size();
  const std::size_t width = l + n;
  const std::size_t feat = pass.features.size();

  grads.dense_b += dlogit;
  Vector dfeat(feat);
  for (std::size_t i = 0; i < feat; ++i) {
    const double m = pass.mask.empty() ? 1.0 : pass.mask[i];
    grads.dense_w[i] += dlogit * pass.features[i] * m;
    dfeat[i] = dlogit * params.dense_w[i] * m;
  }

  std::vector<double> dh(l), dc(l), dpre(4 * l), dz(width);
  for (std::size_t d = 0; d < params.directions.size(); ++d) {
    const DirectionTrace& tr = pass.traces.at(d);
    const auto weights = gate_weights(params.directions[d]);
    const auto gw = gate_weights(grads.directions[d]);
    const auto gb = gate_biases(grads.directions[d]);
    std::copy(dfeat.begin() + static_cast<std::ptrdiff_t>(d * l),
              dfeat.begin() + static_cast<std::ptrdiff_t>((d + 1) * l), dh.begin());
    std::fill(dc.begin(), dc.end(), 0.0);

    for (std::size_t t = tr.events.size(); t-- > 0;) {
      const double* g = &tr.gates[t * 4 * l];
      const double* c_prev = &tr.cell[t * l];
      const double* tc = &tr.tanh_cell[t * l];
      const double* z = &tr.input[t * width];
      for (std::size_t i = 0; i < l; ++i) {
        const double f = g[i], r = g[l + i], u = g[2 * l + i], o = g[3 * l + i];
        const double dct = dc[i] + dh[i] * o * (1.0 - tc[i] * tc[i]);
        dpre[i] = dct * c_prev[i] * f * (1.0 - f);
        dpre[l + i] = dct * u * r * (1.0 - r);
        dpre[2 * l + i] = dct * r * (1.0 - u * u);
        dpre[3 * l + i] = dh[i] * tc[i] * o * (1.0 - o);
        dc[i] = dct * f;
      }
      std::fill(dz.begin(), dz.end(), 0.0);
      for (std::size_t k = 0; k < 4; ++k) {
        const double* w = weights[k]->data().data();
        double* gwk = gw[k]->data().data();
        Vector& gbk = *gb[k];
        for (std::size_t i = 0; i < l; ++i) {
          const double dp = dpre[k * l + i];
          gbk[i] += dp;
          const double* wrow = w + i * width;
          double* grow = gwk + i * width;
          for (std::size_t j = 0; j < width; ++j) {
            grow[j] += dp * z[j];
            dz[j] += dp * wrow[j];
          }
        }
      }
      std::copy(dz.begin(), dz.begin() + static_cast<std::ptrdiff_t>(l), dh.begin());
      auto erow = grads.embedding.row(tr.events[t]);
      for (std::size_t j = 0; j < n; ++j) erow[j] += dz[l + j];
    }
  }
}

double SequenceModel::probability(std::span<const EventId> seq) const {
  for (EventId e : seq) {
    if (e != kDontCare && !vocab.valid(e)) {
      throw std::invalid_argument("model: event index " + std::to_string(e) + " not in model vocabulary");
    }
  }
  return predict_proba(seq, params);
}

}  // namespace failseq
