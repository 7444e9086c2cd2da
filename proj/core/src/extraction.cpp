// SPDX-License-Identifier: Apache-2.0
#include "failseq/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "parallel.hpp"

namespace failseq {

std::string_view to_string(PerturbMode mode) {
  return mode == PerturbMode::zero_insert ? "zero" : "void";
}

PerturbMode parse_perturb_mode(std::string_view text) {
  if (text == "void" || text == "void_insert") return PerturbMode::void_insert;
  if (text == "zero" || text == "zero_insert") return PerturbMode::zero_insert;
  throw std::invalid_argument("unknown perturbation mode '" + std::string(text) + "'");
}

void ExtractConfig::validate() const {
  if (!(conf_th > 0.0 && conf_th < 1.0)) throw std::invalid_argument("ExtractConfig: conf_th must be in (0, 1)");
  if (!(diff_th > 0.0 && diff_th < 1.0)) throw std::invalid_argument("ExtractConfig: diff_th must be in (0, 1)");
}

std::set<EventId> ExtractionResult::contributor_types() const {
  std::set<EventId> out;
  for (const auto& o : contributors) out.insert(o.event);
  return out;
}

std::set<EventId> ExtractionResult::blocker_types() const {
  std::set<EventId> out;
  for (const auto& o : blockers) out.insert(o.event);
  return out;
}

Predictor model_predictor(const SequenceModel& model) {
  return [&model](std::span<const EventId> seq) {
    if (seq.empty()) return sigmoid(model.params.dense_b);
    return predict_proba(seq, model.params);
  };
}

Predictor oracle_predictor(const RuleSpec& rules) {
  return [rules](std::span<const EventId> seq) { return static_cast<double>(label_oracle(seq, rules)); };
}

std::vector<EventId> perturb(std::span<const EventId> seq, std::size_t k,
                             const std::set<std::size_t>& protected_positions, PerturbMode mode) {
  if (k < 1 || k > seq.size()) {
    throw std::out_of_range("perturb: position " + std::to_string(k) + " outside sequence of length " +
                            std::to_string(seq.size()));
  }
  const EventId target = seq[k - 1];
  std::vector<EventId> out;
  out.reserve(seq.size());
  for (std::size_t j = 1; j <= seq.size(); ++j) {
    const bool removed = j <= k && seq[j - 1] == target && !protected_positions.contains(j);
    if (!removed) {
      out.push_back(seq[j - 1]);
    } else if (mode == PerturbMode::zero_insert) {
      out.push_back(kDontCare);
    }
  }
  return out;
}

ExtractionResult extract(std::span<const EventId> seq, const Predictor& prob, const ExtractConfig& cfg) {
  cfg.validate();
  if (seq.empty()) throw std::invalid_argument("extract: empty sequence");
  ExtractionResult res;
  res.base_prob = prob(seq);
  res.prediction = predict_label(res.base_prob);
  res.confident = std::max(res.base_prob, 1.0 - res.base_prob) > cfg.conf_th;
  if (!res.confident) return res;

  std::set<std::size_t> decided;
  res.diffs.reserve(seq.size());
  for (std::size_t k = 1; k <= seq.size(); ++k) {
    const auto m = perturb(seq, k, decided, cfg.mode);
    const double diff = prob(m) - res.base_prob;
    res.diffs.push_back(diff);
    if (std::abs(diff) > cfg.diff_th) {
      (diff < 0.0 ? res.contributors : res.blockers).push_back({k, seq[k - 1]});
      decided.insert(k);
    }
  }
  return res;
}

ExtractionResult extract(std::span<const EventId> seq, const SequenceModel& model, const ExtractConfig& cfg) {
  for (EventId e : seq) {
    if (!model.vocab.valid(e)) {
      throw std::invalid_argument("extract: event index " + std::to_string(e) + " not in model vocabulary");
    }
  }
  return extract(seq, model_predictor(model), cfg);
}

double SetScore::precision() const {
  return extracted ? static_cast<double>(hits) / static_cast<double>(extracted) : 0.0;
}

double SetScore::recall() const { return gold ? static_cast<double>(hits) / static_cast<double>(gold) : 0.0; }

ExtractionScore evaluate_extraction(const Dataset& ds, const Predictor& prob, const ExtractConfig& cfg,
                                    std::size_t threads) {
  if (!ds.provenance) throw std::invalid_argument("evaluate_extraction: dataset has no rule provenance");
  cfg.validate();
  struct Partial {
    bool scored = false;
    SetScore c, b;
  };
  std::vector<Partial> parts(ds.size());
  detail::parallel_for(ds.size(), threads, [&](std::size_t i) {
    const auto& events = ds.sessions[i].events;
    const ExtractionResult r = extract(events, prob, cfg);
    if (!r.confident) return;
    const Attribution gold = gold_attribution(events, *ds.provenance);
    auto score = [](const std::set<EventId>& got, const std::set<EventId>& want) {
      SetScore s;
      s.extracted = got.size();
      s.gold = want.size();
      s.hits = static_cast<std::size_t>(
          std::count_if(got.begin(), got.end(), [&](EventId e) { return want.contains(e); }));
      return s;
    };
    parts[i] = {true, score(r.contributor_types(), gold.contributors), score(r.blocker_types(), gold.blockers)};
  });

  ExtractionScore total;
  for (const auto& p : parts) {
    if (!p.scored) continue;
    ++total.sequences;
    total.contributors.hits += p.c.hits;
    total.contributors.extracted += p.c.extracted;
    total.contributors.gold += p.c.gold;
    total.blockers.hits += p.b.hits;
    total.blockers.extracted += p.b.extracted;
    total.blockers.gold += p.b.gold;
  }
  return total;
}

ExtractionScore evaluate_extraction(const Dataset& ds, const SequenceModel& model, const ExtractConfig& cfg,
                                    std::size_t threads) {
  if (!(model.vocab == ds.vocab)) throw std::invalid_argument("evaluate_extraction: vocabulary mismatch");
  return evaluate_extraction(ds, model_predictor(model), cfg, threads);
}

}  // namespace failseq
