// SPDX-License-Identifier: Apache-2.0
#include "failseq/rulemine.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>

namespace failseq {

namespace {

SequentialRule make_rule(std::vector<EventId> pattern, std::size_t present, std::size_t present_and_fail,
                         std::size_t total, std::size_t failures) {
  SequentialRule r;
  r.antecedent = std::move(pattern);
  const double n = static_cast<double>(total);
  r.support = static_cast<double>(present_and_fail) / n;
  r.confidence = static_cast<double>(present_and_fail) / static_cast<double>(present);
  r.lift = failures ? r.confidence / (static_cast<double>(failures) / n) : 0.0;
  return r;
}

// next[s][p * (V + 1) + e] = smallest position q >= p with events[q] == e,
// or len when there is none.
class NextTable {
 public:
  NextTable(const Dataset& ds) : stride_(ds.vocab.size() + 1) {
    tables_.reserve(ds.size());
    for (const auto& s : ds.sessions) {
      const std::size_t len = s.events.size();
      std::vector<std::uint16_t> t((len + 1) * stride_, static_cast<std::uint16_t>(len));
      for (std::size_t p = len; p-- > 0;) {
        std::copy_n(t.begin() + static_cast<std::ptrdiff_t>((p + 1) * stride_), stride_,
                    t.begin() + static_cast<std::ptrdiff_t>(p * stride_));
        t[p * stride_ + s.events[p]] = static_cast<std::uint16_t>(p);
      }
      tables_.push_back(std::move(t));
    }
  }

  std::size_t next(std::size_t session, std::size_t pos, EventId e) const {
    return tables_[session][pos * stride_ + e];
  }

 private:
  std::size_t stride_;
  std::vector<std::vector<std::uint16_t>> tables_;
};

struct Projected {
  std::vector<EventId> pattern;
  // (session, position just past the earliest match of the pattern)
  std::vector<std::pair<std::uint32_t, std::uint16_t>> rows;
};

}  // namespace

double pattern_frequency(const Dataset& ds, std::span<const EventId> pattern) {
  if (pattern.empty()) throw std::invalid_argument("pattern_frequency: empty pattern");
  if (ds.empty()) throw std::invalid_argument("pattern_frequency: empty dataset");
  const auto hits = std::count_if(ds.sessions.begin(), ds.sessions.end(),
                                  [&](const Session& s) { return contains_subsequence(s.events, pattern); });
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

std::optional<SequentialRule> rule_stats(const Dataset& ds, std::span<const EventId> pattern) {
  if (pattern.empty()) throw std::invalid_argument("rule_stats: empty pattern");
  if (ds.empty()) throw std::invalid_argument("rule_stats: empty dataset");
  std::size_t present = 0, present_fail = 0;
  for (const auto& s : ds.sessions) {
    if (!contains_subsequence(s.events, pattern)) continue;
    ++present;
    if (s.label == 1) ++present_fail;
  }
  if (present == 0) return std::nullopt;
  return make_rule({pattern.begin(), pattern.end()}, present, present_fail, ds.size(), ds.positives());
}

std::vector<SequentialRule> mine_rules(const Dataset& ds, const MineConfig& cfg) {
  if (cfg.max_pattern_len < 1) throw std::invalid_argument("mine_rules: max_pattern_len must be >= 1");
  std::vector<SequentialRule> rules;
  if (ds.empty()) return rules;
  for (const auto& s : ds.sessions) {
    if (s.events.size() >= 0xFFFF) throw std::invalid_argument("mine_rules: session too long");
  }

  const NextTable table(ds);
  const std::size_t total = ds.size();
  const std::size_t failures = ds.positives();
  const std::size_t vocab = ds.vocab.size();

  std::deque<Projected> frontier;
  {
    Projected root;
    root.rows.reserve(total);
    for (std::size_t s = 0; s < total; ++s) root.rows.emplace_back(static_cast<std::uint32_t>(s), 0);
    frontier.push_back(std::move(root));
  }

  while (!frontier.empty()) {
    Projected cur = std::move(frontier.front());
    frontier.pop_front();
    if (cur.pattern.size() >= cfg.max_pattern_len) continue;
    for (EventId e = 1; e <= vocab; ++e) {
      Projected ext;
      ext.pattern = cur.pattern;
      ext.pattern.push_back(e);
      std::size_t fail_hits = 0;
      for (const auto& [s, pos] : cur.rows) {
        const std::size_t len = ds.sessions[s].events.size();
        const std::size_t q = table.next(s, pos, e);
        if (q >= len) continue;
        ext.rows.emplace_back(s, static_cast<std::uint16_t>(q + 1));
        if (ds.sessions[s].label == 1) ++fail_hits;
      }
      if (ext.rows.empty()) continue;
      const double support = static_cast<double>(fail_hits) / static_cast<double>(total);
      // Rule support is anti-monotone: no extension can recover.
      if (support < cfg.min_support) continue;
      SequentialRule r = make_rule(ext.pattern, ext.rows.size(), fail_hits, total, failures);
      if (r.confidence >= cfg.min_confidence) rules.push_back(std::move(r));
      frontier.push_back(std::move(ext));
    }
  }

  std::sort(rules.begin(), rules.end(), [](const SequentialRule& a, const SequentialRule& b) {
    if (a.lift != b.lift) return a.lift > b.lift;
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.support != b.support) return a.support > b.support;
    return a.antecedent < b.antecedent;
  });
  return rules;
}

}  // namespace failseq
