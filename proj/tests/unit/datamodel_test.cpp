// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "failseq/events.hpp"
#include "failseq/rng.hpp"
#include "oracles.hpp"

using namespace failseq;

namespace {

const Vocab kVocab = Vocab::letters(20);
const RuleSpec kRules = RuleSpec::default_rules(kVocab);

std::vector<EventId> seq(const char* text) { return kVocab.parse(text); }

std::set<EventId> types(const char* text) {
  const auto v = seq(text);
  return {v.begin(), v.end()};
}

}  // namespace

TEST(Vocab, LettersAndLookup) {
  EXPECT_EQ(kVocab.size(), 20u);
  EXPECT_EQ(kVocab.lookup("a"), 1u);
  EXPECT_EQ(kVocab.lookup("t"), 20u);
  EXPECT_EQ(kVocab.name(6), "f");
  for (EventId id = 1; id <= 20; ++id) EXPECT_EQ(kVocab.lookup(kVocab.name(id)), id);
  EXPECT_FALSE(kVocab.valid(0));
  EXPECT_FALSE(kVocab.find("zz").has_value());
}

TEST(Vocab, RejectsBadNames) {
  EXPECT_THROW(Vocab({"a", "a"}), std::invalid_argument);
  EXPECT_THROW(Vocab({"a b"}), std::invalid_argument);
  EXPECT_THROW(Vocab({""}), std::invalid_argument);
  EXPECT_THROW(kVocab.lookup("zz"), std::invalid_argument);
}

TEST(Vocab, FormatParseRoundTrip) {
  const auto v = seq("a f b c e f");
  EXPECT_EQ(kVocab.format(v), "a f b c e f");
  EXPECT_EQ(kVocab.format(std::vector<EventId>{1, 0, 2}), "a 0 b");
}

TEST(Subsequence, BasicCases) {
  const auto pattern = seq("f b c");
  EXPECT_TRUE(contains_subsequence(seq("a b b f b c j d"), pattern));
  EXPECT_TRUE(contains_subsequence(seq("a b"), {}));
  EXPECT_FALSE(contains_subsequence(seq("f c b"), pattern));
}

TEST(Subsequence, AgreesWithRecursiveOracle) {
  Rng rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<EventId> s(rng.below(9)), p(rng.below(4));
    for (auto& e : s) e = static_cast<EventId>(1 + rng.below(4));
    for (auto& e : p) e = static_cast<EventId>(1 + rng.below(4));
    ASSERT_EQ(contains_subsequence(s, p), testkit::is_subsequence_recursive(s, p));
  }
}

TEST(Subsequence, EmbeddingCount) {
  EXPECT_EQ(count_embeddings(seq("f b b c"), seq("f b c")), 2u);
  EXPECT_EQ(count_embeddings(seq("f c b"), seq("f b c")), 0u);
  EXPECT_EQ(count_embeddings(seq("f f b c c"), seq("f b c")), 4u);
}

TEST(LabelOracle, BasicCases) {
  EXPECT_EQ(label_oracle(seq("a b b f b c j d"), kRules), 1);
  EXPECT_EQ(label_oracle(seq("a b b f e b c j d"), kRules), 0);
  EXPECT_EQ(label_oracle(seq("a f b c e f"), kRules), 0);
  EXPECT_EQ(label_oracle(seq("c b f"), kRules), 0);
}

TEST(GoldAttribution, Examples) {
  const Attribution pos = gold_attribution(seq("a f b c a"), kRules);
  EXPECT_EQ(pos.contributors, types("f b c"));
  EXPECT_TRUE(pos.blockers.empty());

  const Attribution blocked = gold_attribution(seq("a f b c e f"), kRules);
  EXPECT_TRUE(blocked.contributors.empty());
  EXPECT_EQ(blocked.blockers, types("e"));

  EXPECT_EQ(gold_attribution(seq("a d g"), kRules), Attribution{});
}

TEST(RuleSpec, DefaultsAndValidation) {
  ASSERT_EQ(kRules.contributor_patterns.size(), 1u);
  EXPECT_EQ(kRules.contributor_patterns[0], seq("f b c"));
  EXPECT_EQ(kRules.blocker_events, types("e"));
  RuleSpec bad = kRules;
  bad.blocker_events.insert(kVocab.lookup("b"));
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  RuleSpec empty;
  empty.contributor_patterns.push_back({});
  EXPECT_THROW(empty.validate(), std::invalid_argument);
}

TEST(FilterSignatureEvents, RemovesBlacklistedEvents) {
  const Vocab v({"a", "x", "b"});
  Dataset ds;
  ds.vocab = v;
  ds.sessions = {{v.parse("a x b"), 0}, {v.parse("a b"), 1}, {v.parse("x x a"), 0}};

  const Dataset same = filter_signature_events(ds, {});
  EXPECT_EQ(same, ds);

  const std::vector<std::string> blacklist{"x"};
  const Dataset out = filter_signature_events(ds, blacklist);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out.sessions[0].events, v.parse("a b"));
  for (const auto& s : out.sessions) {
    for (EventId e : s.events) EXPECT_NE(e, v.lookup("x"));
  }
  EXPECT_EQ(out.sessions[1].label, 1);
}

TEST(FilterSignatureEvents, RejectsUnknownName) {
  Dataset ds;
  ds.vocab = kVocab;
  const std::vector<std::string> blacklist{"nope"};
  EXPECT_THROW(filter_signature_events(ds, blacklist), std::invalid_argument);
}
