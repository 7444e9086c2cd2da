// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <map>

#include "failseq/datagen.hpp"
#include "failseq/rulemine.hpp"
#include "oracles.hpp"

using namespace failseq;

namespace {

const Vocab kVocab = Vocab::letters(20);

std::vector<EventId> seq(const char* text) { return kVocab.parse(text); }

Dataset toy() {
  Dataset ds;
  ds.vocab = kVocab;
  ds.sessions = {{seq("f b c"), 1}, {seq("b c"), 0}, {seq("f b"), 0}, {seq("a"), 0}};
  return ds;
}

// Every ordered pattern up to max_len, scored by brute force.
std::map<std::vector<EventId>, SequentialRule> brute_force_rules(const Dataset& ds, std::size_t max_len,
                                                                 const MineConfig& cfg) {
  std::map<std::vector<EventId>, SequentialRule> out;
  std::vector<std::vector<EventId>> level{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::vector<EventId>> next;
    for (const auto& p : level) {
      for (EventId e = 1; e <= ds.vocab.size(); ++e) {
        auto q = p;
        q.push_back(e);
        next.push_back(q);
        std::size_t present = 0, both = 0;
        for (const auto& s : ds.sessions) {
          if (!testkit::is_subsequence_recursive(s.events, q)) continue;
          ++present;
          both += s.label == 1;
        }
        if (present == 0) continue;
        const double n = static_cast<double>(ds.size());
        SequentialRule r{q, both / n, static_cast<double>(both) / present, 0.0};
        r.lift = r.confidence / (static_cast<double>(ds.positives()) / n);
        if (r.support >= cfg.min_support && r.confidence >= cfg.min_confidence) out[q] = r;
      }
    }
    level = std::move(next);
  }
  return out;
}

}  // namespace

TEST(PatternFrequency, ToyExamples) {
  const Dataset ds = toy();
  EXPECT_DOUBLE_EQ(pattern_frequency(ds, seq("b")), 0.75);
  EXPECT_DOUBLE_EQ(pattern_frequency(ds, seq("f b c")), 0.25);
  EXPECT_DOUBLE_EQ(pattern_frequency(ds, seq("c b")), 0.0);
  Dataset all = ds;
  for (auto& s : all.sessions) s.events.push_back(kVocab.lookup("q"));
  EXPECT_DOUBLE_EQ(pattern_frequency(all, seq("q")), 1.0);
  EXPECT_THROW(pattern_frequency(ds, {}), std::invalid_argument);
  EXPECT_THROW(pattern_frequency(Dataset{}, seq("a")), std::invalid_argument);
}

TEST(RuleStats, ToyExamples) {
  const Dataset ds = toy();
  const auto fbc = rule_stats(ds, seq("f b c"));
  ASSERT_TRUE(fbc);
  EXPECT_DOUBLE_EQ(fbc->support, 0.25);
  EXPECT_DOUBLE_EQ(fbc->confidence, 1.0);
  EXPECT_DOUBLE_EQ(fbc->lift, 4.0);

  const auto b = rule_stats(ds, seq("b"));
  ASSERT_TRUE(b);
  EXPECT_DOUBLE_EQ(b->support, 0.25);
  EXPECT_DOUBLE_EQ(b->confidence, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(b->lift, 4.0 / 3.0);

  EXPECT_FALSE(rule_stats(ds, seq("q")).has_value());
}

TEST(MineRules, MatchesBruteForce) {
  GenConfig g;
  g.vocab_size = 6;
  g.seq_len = 6;
  g.num_sequences = 300;
  const Dataset ds = generate(g);
  const MineConfig cfg{3, 0.02, 0.1};
  const auto mined = mine_rules(ds, cfg);
  const auto expect = brute_force_rules(ds, 3, cfg);
  ASSERT_EQ(mined.size(), expect.size());
  for (const auto& r : mined) {
    const auto it = expect.find(r.antecedent);
    ASSERT_NE(it, expect.end());
    EXPECT_DOUBLE_EQ(r.support, it->second.support);
    EXPECT_DOUBLE_EQ(r.confidence, it->second.confidence);
    EXPECT_DOUBLE_EQ(r.lift, it->second.lift);
  }
}

TEST(MineRules, RankedByLiftThenConfidence) {
  GenConfig g;
  g.num_sequences = 2000;
  const auto rules = mine_rules(generate(g));
  ASSERT_FALSE(rules.empty());
  for (std::size_t i = 1; i < rules.size(); ++i) {
    ASSERT_GE(rules[i - 1].lift, rules[i].lift);
    if (rules[i - 1].lift == rules[i].lift) ASSERT_GE(rules[i - 1].confidence, rules[i].confidence);
  }
  for (const auto& r : rules) {
    EXPECT_LE(r.support, r.confidence + 1e-15);
    EXPECT_LE(r.confidence, 1.0);
  }
}

TEST(MineRules, SupportIsAntiMonotone) {
  GenConfig g;
  g.num_sequences = 1000;
  const Dataset ds = generate(g);
  const auto rules = mine_rules(ds, {3, 0.0, 0.0});
  std::map<std::vector<EventId>, double> support;
  for (const auto& r : rules) support[r.antecedent] = r.support;
  for (const auto& [pattern, s] : support) {
    for (std::size_t drop = 0; drop < pattern.size() && pattern.size() > 1; ++drop) {
      auto sub = pattern;
      sub.erase(sub.begin() + static_cast<std::ptrdiff_t>(drop));
      const auto it = support.find(sub);
      ASSERT_NE(it, support.end());
      EXPECT_GE(it->second, s);
    }
  }
}

TEST(MineRules, EmptyDatasetAndBadLength) {
  EXPECT_TRUE(mine_rules(Dataset{}).empty());
  EXPECT_THROW(mine_rules(toy(), {0, 0.1, 0.1}), std::invalid_argument);
}
