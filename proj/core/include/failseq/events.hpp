// SPDX-License-Identifier: Apache-2.0
/**
 * @file   events.hpp
 * @brief  Event vocabulary, sessions, datasets and the rule-based label oracle.
 *
 * Label polarity throughout: 1 = code failure, 0 = no code failure.
 */
#ifndef FAILSEQ_EVENTS_HPP
#define FAILSEQ_EVENTS_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace failseq {

using EventId = std::uint32_t;

/// Reserved "don't care" token. Never emitted by the generator; used by
/// zero-inserting perturbation.
inline constexpr EventId kDontCare = 0;

class Vocab {
 public:
  Vocab() = default;
  /// Assigns indices 1..names.size() in order. Names must be unique,
  /// non-empty and free of whitespace, ',' and ';'.
  explicit Vocab(std::vector<std::string> names);

  /// The first `count` lowercase letters: a, b, c, ...
  static Vocab letters(std::size_t count);

  /// Number of real events (excludes the reserved index 0).
  std::size_t size() const { return names_.size(); }

  EventId lookup(std::string_view name) const;
  std::optional<EventId> find(std::string_view name) const;
  const std::string& name(EventId id) const;
  bool valid(EventId id) const { return id >= 1 && id <= names_.size(); }

  const std::vector<std::string>& names() const { return names_; }

  std::vector<EventId> encode(std::span<const std::string> names) const;
  /// Splits on whitespace and looks every token up.
  std::vector<EventId> parse(std::string_view text) const;
  std::string format(std::span<const EventId> events) const;

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, EventId> index_;
};

struct Session {
  std::vector<EventId> events;
  int label = 0;

  friend bool operator==(const Session&, const Session&) = default;
};

struct RuleSpec {
  std::vector<std::vector<EventId>> contributor_patterns;
  std::set<EventId> blocker_events;

  /// Throws std::invalid_argument if a pattern is empty or a blocker event
  /// appears inside a contributor pattern.
  void validate() const;

  /// Pattern [f, b, c] with blocker {e}.
  static RuleSpec default_rules(const Vocab& vocab);

  friend bool operator==(const RuleSpec&, const RuleSpec&) = default;
};

struct Dataset {
  Vocab vocab;
  std::vector<Session> sessions;
  std::optional<RuleSpec> provenance;

  std::size_t size() const { return sessions.size(); }
  bool empty() const { return sessions.empty(); }
  std::size_t positives() const;
  double positive_rate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// True iff `pattern` occurs in `seq` in order, not necessarily contiguously.
bool contains_subsequence(std::span<const EventId> seq, std::span<const EventId> pattern);

/// Number of distinct index tuples at which `pattern` embeds into `seq`.
std::uint64_t count_embeddings(std::span<const EventId> seq, std::span<const EventId> pattern);

/// 1 iff some contributor pattern is an ordered subsequence and no blocker
/// event occurs anywhere.
int label_oracle(std::span<const EventId> seq, const RuleSpec& rules);

struct Attribution {
  std::set<EventId> contributors;
  std::set<EventId> blockers;

  friend bool operator==(const Attribution&, const Attribution&) = default;
};

/// Event-type ground truth: a type is a contributor (blocker) if the oracle
/// labels the sequence 1 (0) and deleting every occurrence of that type
/// flips the label.
Attribution gold_attribution(std::span<const EventId> seq, const RuleSpec& rules);

/// Removes every occurrence of the named events; sessions left empty are
/// dropped. Labels are untouched.
Dataset filter_signature_events(const Dataset& ds, std::span<const std::string> blacklist);

}  // namespace failseq

#endif  // FAILSEQ_EVENTS_HPP
