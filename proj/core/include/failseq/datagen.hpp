// SPDX-License-Identifier: Apache-2.0
/**
 * @file   datagen.hpp
 * @brief  Synthetic telemetry sessions labelled by a rule oracle.
 */
#ifndef FAILSEQ_DATAGEN_HPP
#define FAILSEQ_DATAGEN_HPP

#include <cstdint>
#include <optional>
#include <utility>

#include "failseq/events.hpp"

namespace failseq {

struct GenConfig {
  std::size_t vocab_size = 20;
  std::size_t seq_len = 15;
  std::size_t num_sequences = 30000;
  /// Defaults to RuleSpec::default_rules over the letter vocabulary.
  std::optional<RuleSpec> rules;
  /// When set, the dataset is mixed to exactly round(rate * num_sequences)
  /// positives; missing positives come from pattern injection.
  std::optional<double> target_positive_rate = 0.25;
  std::uint64_t seed = 7;
};

/// Sequences are uniform over event indices 1..vocab_size and labelled with
/// label_oracle. The event names are the first vocab_size letters.
Dataset generate(const GenConfig& cfg);

/// Shuffled disjoint split. The first part gets floor(train_fraction * N)
/// sessions. Both parts keep the vocab and provenance.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, std::uint64_t seed);

/// First `count` sessions, same vocab and provenance.
Dataset head(const Dataset& ds, std::size_t count);

}  // namespace failseq

#endif  // FAILSEQ_DATAGEN_HPP
