// SPDX-License-Identifier: Apache-2.0
#include "failseq/events.hpp"

#include <algorithm>
#include <sstream>

namespace failseq {

namespace {

bool valid_name(std::string_view name) {
  if (name.empty()) return false;
  return std::none_of(name.begin(), name.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ',' || c == ';';
  });
}

std::vector<EventId> remove_type(std::span<const EventId> seq, EventId type) {
  std::vector<EventId> out;
  out.reserve(seq.size());
  for (EventId e : seq)
    if (e != type) out.push_back(e);
  return out;
}

}  // namespace

Vocab::Vocab(std::vector<std::string> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!valid_name(names_[i])) throw std::invalid_argument("Vocab: invalid event name '" + names_[i] + "'");
    if (!index_.emplace(names_[i], static_cast<EventId>(i + 1)).second) {
      throw std::invalid_argument("Vocab: duplicate event name '" + names_[i] + "'");
    }
  }
}

Vocab Vocab::letters(std::size_t count) {
  if (count > 26) throw std::invalid_argument("Vocab::letters: at most 26 letters");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < count; ++i) names.emplace_back(1, static_cast<char>('a' + i));
  return Vocab(std::move(names));
}

std::optional<EventId> Vocab::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EventId Vocab::lookup(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw std::invalid_argument("unknown event name '" + std::string(name) + "'");
}

const std::string& Vocab::name(EventId id) const {
  if (!valid(id)) throw std::out_of_range("Vocab: invalid event index " + std::to_string(id));
  return names_[id - 1];
}

std::vector<EventId> Vocab::encode(std::span<const std::string> names) const {
  std::vector<EventId> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(lookup(n));
  return out;
}

std::vector<EventId> Vocab::parse(std::string_view text) const {
  std::istringstream in{std::string(text)};
  std::vector<EventId> out;
  std::string tok;
  while (in >> tok) out.push_back(lookup(tok));
  return out;
}

std::string Vocab::format(std::span<const EventId> events) const {
  std::string out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i) out += ' ';
    out += events[i] == kDontCare ? std::string("0") : name(events[i]);
  }
  return out;
}

void RuleSpec::validate() const {
  if (contributor_patterns.empty()) throw std::invalid_argument("RuleSpec: no contributor patterns");
  for (const auto& p : contributor_patterns) {
    if (p.empty()) throw std::invalid_argument("RuleSpec: empty contributor pattern");
    for (EventId e : p) {
      if (e == kDontCare) throw std::invalid_argument("RuleSpec: pattern uses reserved token 0");
      if (blocker_events.contains(e)) {
        throw std::invalid_argument("RuleSpec: blocker event " + std::to_string(e) +
                                    " appears in a contributor pattern");
      }
    }
  }
}

RuleSpec RuleSpec::default_rules(const Vocab& vocab) {
  RuleSpec r;
  r.contributor_patterns.push_back({vocab.lookup("f"), vocab.lookup("b"), vocab.lookup("c")});
  r.blocker_events.insert(vocab.lookup("e"));
  return r;
}

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(
      std::count_if(sessions.begin(), sessions.end(), [](const Session& s) { return s.label == 1; }));
}

double Dataset::positive_rate() const {
  return sessions.empty() ? 0.0 : static_cast<double>(positives()) / static_cast<double>(sessions.size());
}

bool contains_subsequence(std::span<const EventId> seq, std::span<const EventId> pattern) {
  std::size_t matched = 0;
  for (std::size_t i = 0; i < seq.size() && matched < pattern.size(); ++i)
    if (seq[i] == pattern[matched]) ++matched;
  return matched == pattern.size();
}

std::uint64_t count_embeddings(std::span<const EventId> seq, std::span<const EventId> pattern) {
  // ways[j] = number of embeddings of pattern[0..j) into the prefix seen so far.
  std::vector<std::uint64_t> ways(pattern.size() + 1, 0);
  ways[0] = 1;
  for (EventId e : seq)
    for (std::size_t j = pattern.size(); j > 0; --j)
      if (pattern[j - 1] == e) ways[j] += ways[j - 1];
  return ways[pattern.size()];
}

int label_oracle(std::span<const EventId> seq, const RuleSpec& rules) {
  for (EventId e : seq)
    if (rules.blocker_events.contains(e)) return 0;
  for (const auto& p : rules.contributor_patterns)
    if (contains_subsequence(seq, p)) return 1;
  return 0;
}

Attribution gold_attribution(std::span<const EventId> seq, const RuleSpec& rules) {
  Attribution gold;
  const int base = label_oracle(seq, rules);
  const std::set<EventId> types(seq.begin(), seq.end());
  for (EventId t : types) {
    const int flipped = label_oracle(remove_type(seq, t), rules);
    if (flipped == base) continue;
    (base == 1 ? gold.contributors : gold.blockers).insert(t);
  }
  return gold;
}

Dataset filter_signature_events(const Dataset& ds, std::span<const std::string> blacklist) {
  std::set<EventId> drop;
  for (const auto& name : blacklist) drop.insert(ds.vocab.lookup(name));
  Dataset out;
  out.vocab = ds.vocab;
  out.provenance = ds.provenance;
  out.sessions.reserve(ds.sessions.size());
  for (const auto& s : ds.sessions) {
    Session kept{{}, s.label};
    for (EventId e : s.events)
      if (!drop.contains(e)) kept.events.push_back(e);
    if (!kept.events.empty()) out.sessions.push_back(std::move(kept));
  }
  return out;
}

}  // namespace failseq
