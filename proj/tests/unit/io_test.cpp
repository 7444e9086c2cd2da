// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "failseq/datagen.hpp"
#include "failseq/io.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

using namespace failseq;

namespace {

SequenceModel random_model(LstmType type, std::uint64_t seed) {
  SequenceModel m;
  m.hp.lstm_type = type;
  m.hp.seed = seed;
  m.vocab = Vocab::letters(20);
  m.params = testkit::random_params(m.hp, 20, seed, 1.0);
  return m;
}

std::string model_text(const SequenceModel& m) {
  std::ostringstream out;
  write_model(out, m);
  return out.str();
}

}  // namespace

TEST(FormatDouble, RoundTripsExactly) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-1e3, 1e3) * std::pow(10.0, rng.uniform(-20, 20));
    ASSERT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_THROW(parse_double("1.5x"), std::invalid_argument);
  EXPECT_THROW(parse_double(""), std::invalid_argument);
}

TEST(ModelFile, RoundTripIsBitExact) {
  for (auto type : {LstmType::standard, LstmType::bidirectional}) {
    const SequenceModel m = random_model(type, 17);
    testkit::TempDir dir;
    save_model(dir.file("m.txt"), m);
    const SequenceModel back = load_model(dir.file("m.txt"));
    EXPECT_EQ(back.params, m.params);
    EXPECT_EQ(back.hp, m.hp);
    EXPECT_EQ(back.vocab, m.vocab);

    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
      std::vector<EventId> s(1 + rng.below(15));
      for (auto& e : s) e = static_cast<EventId>(1 + rng.below(20));
      ASSERT_EQ(back.probability(s), m.probability(s));
    }
    EXPECT_EQ(model_text(back), model_text(m));
  }
}

TEST(ModelFile, TruncatedFileIsRejected) {
  const std::string text = model_text(random_model(LstmType::bidirectional, 2));
  for (std::size_t cut : {text.size() / 3, text.size() / 2, text.size() - 5}) {
    std::istringstream in(text.substr(0, cut));
    EXPECT_THROW(read_model(in), FormatError) << "cut at " << cut;
  }
}

TEST(ModelFile, UnsupportedVersion) {
  std::string text = model_text(random_model(LstmType::standard, 2));
  text.replace(0, std::string("failseq-model 1").size(), "failseq-model 2");
  std::istringstream in(text);
  try {
    read_model(in);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported model format version 2"), std::string::npos);
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(ModelFile, ShapeMismatchNamesTheTensor) {
  std::string text = model_text(random_model(LstmType::standard, 2));
  const auto pos = text.find("tensor fwd.w_forget 6 9");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 23, "tensor fwd.w_forget 6 8");
  std::istringstream in(text);
  try {
    read_model(in);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("fwd.w_forget"), std::string::npos);
  }
}

TEST(ModelFile, MissingFile) { EXPECT_THROW(load_model("/nonexistent/failseq/model.txt"), std::runtime_error); }

TEST(DatasetFile, RoundTrip) {
  GenConfig g;
  g.num_sequences = 200;
  const Dataset ds = generate(g);
  testkit::TempDir dir;
  save_dataset(dir.file("d.txt"), ds);
  EXPECT_EQ(load_dataset(dir.file("d.txt")), ds);

  Dataset bare = ds;
  bare.provenance.reset();
  save_dataset(dir.file("bare.txt"), bare);
  EXPECT_EQ(load_dataset(dir.file("bare.txt")), bare);
}

TEST(DatasetFile, BadLabelIsRejectedWithRecordNumber) {
  std::istringstream in("#failseq-dataset 1\n#vocab a b\n1\ta b\n2\tb a\n");
  try {
    read_dataset(in);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(std::string(e.what()).find("record 2"), std::string::npos);
  }
}

TEST(DatasetFile, UnknownEventIsRejected) {
  std::istringstream in("#failseq-dataset 1\n#vocab a b\n1\ta z\n");
  try {
    read_dataset(in);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown event name 'z'"), std::string::npos);
  }
}

TEST(DatasetFile, EmptyFileHasNoHeader) {
  std::istringstream in("");
  try {
    read_dataset(in);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("no header"), std::string::npos);
  }
}

TEST(DatasetFile, HeaderOnlyIsAnEmptyDataset) {
  std::istringstream in("#failseq-dataset 1\n#vocab a b\n");
  const Dataset ds = read_dataset(in);
  EXPECT_TRUE(ds.empty());
  EXPECT_EQ(ds.vocab.size(), 2u);
}

TEST(WriteFileAtomic, FailureLeavesTargetUntouched) {
  testkit::TempDir dir;
  const std::string path = dir.file("out.txt");
  write_file_atomic(path, [](std::ostream& out) { out << "old\n"; });
  EXPECT_THROW(write_file_atomic(path,
                                 [](std::ostream& out) {
                                   out << "partial";
                                   throw std::runtime_error("fail midway");
                                 }),
               std::runtime_error);
  EXPECT_EQ(testkit::read_file(path), "old\n");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++files;
  EXPECT_EQ(files, 1u);
}

TEST(Records, Formats) {
  EXPECT_EQ(format_prediction(3, 0.25), "id=3 prob=0.250000 pred=0");
  const Vocab v = Vocab::letters(20);
  ExtractionResult r;
  r.base_prob = 0.99;
  r.prediction = 1;
  r.confident = true;
  r.contributors = {{2, v.lookup("f")}, {3, v.lookup("b")}, {4, v.lookup("c")}};
  EXPECT_EQ(format_extraction(3, r, v),
            "id=3 pred=1 prob=0.990000 confident=1 contributors=f@2,b@3,c@4 blockers=-");
  const std::vector<SequentialRule> rules{{v.parse("f b c"), 0.25, 1.0, 4.0}};
  EXPECT_EQ(format_rule_table(rules, v), "rule\tsupport%\tconfidence%\tlift\nf,b,c => failure\t25.00\t100.000\t4.0000\n");
}
