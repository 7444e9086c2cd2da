// SPDX-License-Identifier: Apache-2.0
/**
 * @file   extraction.hpp
 * @brief  Greedy perturbation search for contributor and blocker events.
 *
 * For a confidently classified sequence S every position k (left to right)
 * is probed: the event at k is removed together with every earlier
 * occurrence of the same event type that has not already been classified,
 * and the failure probability of the perturbed sequence is compared with
 * that of S. A drop larger than diff_th marks k as a contributor, a rise
 * larger than diff_th marks it as a blocker.
 *
 * Positions in results are 1-based.
 */
#ifndef FAILSEQ_EXTRACTION_HPP
#define FAILSEQ_EXTRACTION_HPP

#include <functional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "failseq/events.hpp"
#include "failseq/seqmodel.hpp"

namespace failseq {

enum class PerturbMode {
  void_insert,  // delete the probed events; the sequence gets shorter
  zero_insert,  // overwrite them with the don't-care token 0
};

std::string_view to_string(PerturbMode mode);
PerturbMode parse_perturb_mode(std::string_view text);

struct ExtractConfig {
  PerturbMode mode = PerturbMode::void_insert;
  double conf_th = 0.9;
  double diff_th = 0.4;

  void validate() const;
};

struct Occurrence {
  std::size_t position = 0;  // 1-based
  EventId event = 0;

  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

struct ExtractionResult {
  double base_prob = 0.0;
  int prediction = 0;
  /// max(p, 1 - p) > conf_th; nothing is probed otherwise.
  bool confident = false;
  std::vector<Occurrence> contributors;
  std::vector<Occurrence> blockers;
  /// Prob(M) - Prob(S) for every probed position, in probe order.
  std::vector<double> diffs;

  std::set<EventId> contributor_types() const;
  std::set<EventId> blocker_types() const;
};

/// Failure probability of a (possibly empty) event sequence.
using Predictor = std::function<double(std::span<const EventId>)>;

/// Wraps a model. The empty sequence (void-inserting a length-1 session)
/// scores sigmoid(dense bias), i.e. a zero final hidden state.
Predictor model_predictor(const SequenceModel& model);

/// label_oracle as a 0/1 probability.
Predictor oracle_predictor(const RuleSpec& rules);

/// Removes (void) or zeroes (zero) every position j <= k with
/// seq[j] == seq[k] that is not in `protected_positions`. `k` and the
/// protected positions are 1-based.
std::vector<EventId> perturb(std::span<const EventId> seq, std::size_t k,
                             const std::set<std::size_t>& protected_positions, PerturbMode mode);

ExtractionResult extract(std::span<const EventId> seq, const Predictor& prob, const ExtractConfig& cfg);

/// Checks that every event belongs to the model's vocabulary first.
ExtractionResult extract(std::span<const EventId> seq, const SequenceModel& model, const ExtractConfig& cfg);

struct SetScore {
  std::size_t hits = 0;       // extracted types that are gold
  std::size_t extracted = 0;  // extracted types
  std::size_t gold = 0;       // gold types
  /// 0 when the denominator is 0.
  double precision() const;
  double recall() const;
};

struct ExtractionScore {
  std::size_t sequences = 0;  // sequences that passed the confidence gate
  SetScore contributors;
  SetScore blockers;
};

/// Type-level micro-averaged precision/recall against gold_attribution over
/// the confidently predicted sessions. Requires ds.provenance.
ExtractionScore evaluate_extraction(const Dataset& ds, const Predictor& prob, const ExtractConfig& cfg,
                                    std::size_t threads = 1);
ExtractionScore evaluate_extraction(const Dataset& ds, const SequenceModel& model, const ExtractConfig& cfg,
                                    std::size_t threads = 1);

}  // namespace failseq

#endif  // FAILSEQ_EXTRACTION_HPP
