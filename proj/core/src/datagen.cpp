// SPDX-License-Identifier: Apache-2.0
#include "failseq/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "failseq/rng.hpp"

namespace failseq {

namespace {

std::vector<EventId> uniform_sequence(std::size_t len, std::size_t vocab_size, Rng& rng) {
  std::vector<EventId> seq(len);
  for (auto& e : seq) e = static_cast<EventId>(1 + rng.below(vocab_size));
  return seq;
}

bool has_blocker(std::span<const EventId> seq, const RuleSpec& rules) {
  return std::any_of(seq.begin(), seq.end(), [&](EventId e) { return rules.blocker_events.contains(e); });
}

// Strictly increasing positions, uniform over all k-subsets of [0, n).
std::vector<std::size_t> choose_positions(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<EventId> injected_positive(const GenConfig& cfg, const RuleSpec& rules, Rng& rng) {
  constexpr int kMaxAttempts = 100000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto seq = uniform_sequence(cfg.seq_len, cfg.vocab_size, rng);
    const auto& pattern = rules.contributor_patterns[rng.below(rules.contributor_patterns.size())];
    const auto pos = choose_positions(cfg.seq_len, pattern.size(), rng);
    for (std::size_t i = 0; i < pattern.size(); ++i) seq[pos[i]] = pattern[i];
    if (!has_blocker(seq, rules)) return seq;
  }
  throw std::runtime_error("generate: could not draw a blocker-free positive sequence");
}

}  // namespace

Dataset generate(const GenConfig& cfg) {
  Dataset ds;
  ds.vocab = Vocab::letters(cfg.vocab_size);
  const RuleSpec rules = cfg.rules ? *cfg.rules : RuleSpec::default_rules(ds.vocab);
  rules.validate();
  std::size_t longest = 0;
  for (const auto& p : rules.contributor_patterns) {
    longest = std::max(longest, p.size());
    for (EventId e : p)
      if (!ds.vocab.valid(e)) throw std::invalid_argument("generate: pattern event outside the vocabulary");
  }
  for (EventId e : rules.blocker_events)
    if (!ds.vocab.valid(e)) throw std::invalid_argument("generate: blocker event outside the vocabulary");
  ds.provenance = rules;
  if (cfg.seq_len == 0) throw std::invalid_argument("generate: seq_len must be positive");

  Rng rng(cfg.seed);
  ds.sessions.reserve(cfg.num_sequences);

  if (!cfg.target_positive_rate) {
    for (std::size_t i = 0; i < cfg.num_sequences; ++i) {
      auto seq = uniform_sequence(cfg.seq_len, cfg.vocab_size, rng);
      const int label = label_oracle(seq, rules);
      ds.sessions.push_back({std::move(seq), label});
    }
    return ds;
  }

  const double rate = *cfg.target_positive_rate;
  if (!(rate > 0.0 && rate < 1.0)) throw std::invalid_argument("generate: target rate must be in (0, 1)");
  if (longest > cfg.seq_len) {
    throw std::invalid_argument("generate: target rate infeasible, pattern of length " +
                                std::to_string(longest) + " exceeds sequence length " +
                                std::to_string(cfg.seq_len));
  }

  const auto want_pos = static_cast<std::size_t>(std::llround(rate * static_cast<double>(cfg.num_sequences)));
  const std::size_t want_neg = cfg.num_sequences - want_pos;
  std::vector<Session> pos, neg;
  pos.reserve(want_pos);
  neg.reserve(want_neg);

  // Natural draws fill the negative quota and contribute whatever positives
  // they happen to produce; injection tops up the rest.
  const std::size_t max_draws = 1000 * (cfg.num_sequences + 1);
  for (std::size_t draws = 0; neg.size() < want_neg; ++draws) {
    if (draws >= max_draws) throw std::runtime_error("generate: rules leave no room for negatives");
    auto seq = uniform_sequence(cfg.seq_len, cfg.vocab_size, rng);
    const int label = label_oracle(seq, rules);
    if (label == 1) {
      if (pos.size() < want_pos) pos.push_back({std::move(seq), 1});
    } else {
      neg.push_back({std::move(seq), 0});
    }
  }
  while (pos.size() < want_pos) {
    auto seq = injected_positive(cfg, rules, rng);
    pos.push_back({std::move(seq), 1});
  }

  ds.sessions = std::move(neg);
  ds.sessions.insert(ds.sessions.end(), std::make_move_iterator(pos.begin()), std::make_move_iterator(pos.end()));
  shuffle(std::span<Session>(ds.sessions), rng);
  return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split: fraction must be in (0, 1)");
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  shuffle(std::span<std::size_t>(order), rng);
  const auto n_first = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(ds.size())));

  std::pair<Dataset, Dataset> out;
  for (Dataset* part : {&out.first, &out.second}) {
    part->vocab = ds.vocab;
    part->provenance = ds.provenance;
  }
  out.first.sessions.reserve(n_first);
  out.second.sessions.reserve(ds.size() - n_first);
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_first ? out.first : out.second).sessions.push_back(ds.sessions[order[i]]);
  return out;
}

Dataset head(const Dataset& ds, std::size_t count) {
  Dataset out;
  out.vocab = ds.vocab;
  out.provenance = ds.provenance;
  count = std::min(count, ds.size());
  out.sessions.assign(ds.sessions.begin(), ds.sessions.begin() + static_cast<std::ptrdiff_t>(count));
  return out;
}

}  // namespace failseq
