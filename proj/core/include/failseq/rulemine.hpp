// SPDX-License-Identifier: Apache-2.0
/**
 * @file   rulemine.hpp
 * @brief  Sequential rules "pattern => failure" scored by support,
 *         confidence and lift.
 *
 * Patterns are fully ordered subsequences. For a pattern X:
 *   support    = P(X present and label = 1)
 *   confidence = support / P(X present)
 *   lift       = confidence / P(label = 1)
 */
#ifndef FAILSEQ_RULEMINE_HPP
#define FAILSEQ_RULEMINE_HPP

#include <optional>
#include <span>
#include <vector>

#include "failseq/events.hpp"

namespace failseq {

struct SequentialRule {
  std::vector<EventId> antecedent;
  double support = 0.0;
  double confidence = 0.0;
  double lift = 0.0;
};

/// Fraction of sessions that contain `pattern` as an ordered subsequence.
double pattern_frequency(const Dataset& ds, std::span<const EventId> pattern);

/// std::nullopt when the pattern never occurs (confidence undefined).
/// Lift is 0 when the dataset has no failures.
std::optional<SequentialRule> rule_stats(const Dataset& ds, std::span<const EventId> pattern);

struct MineConfig {
  std::size_t max_pattern_len = 3;
  double min_support = 0.05;
  double min_confidence = 0.25;
};

/// Breadth-first pattern growth with support pruning. Rules meeting both
/// thresholds are returned ordered by lift, then confidence, then support
/// (all descending), then pattern.
std::vector<SequentialRule> mine_rules(const Dataset& ds, const MineConfig& cfg = {});

}  // namespace failseq

#endif  // FAILSEQ_RULEMINE_HPP
