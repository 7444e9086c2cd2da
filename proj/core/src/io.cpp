// SPDX-License-Identifier: Apache-2.0
#include "failseq/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <system_error>
#include <unistd.h>
#include <vector>

namespace failseq {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  std::string require(const char* what) {
    std::string line;
    if (!next(line)) throw FormatError(line_no_ + 1, std::string("unexpected end of file, expected ") + what);
    return line;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

std::size_t parse_count(const std::string& text, std::size_t line) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) throw FormatError(line, "expected a non-negative integer, got '" + text + "'");
  return v;
}

std::string keyed_value(LineReader& r, const std::string& key) {
  const auto toks = split_ws(r.require(key.c_str()));
  if (toks.size() != 2 || toks[0] != key) throw FormatError(r.line_no(), "expected '" + key + " <value>'");
  return toks[1];
}

}  // namespace

FormatError::FormatError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, p);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end) throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  return v;
}

void write_model(std::ostream& out, const SequenceModel& m) {
  out << "failseq-model " << kModelFormatVersion << '\n';
  out << "embedding_size " << m.hp.embedding_size << '\n';
  out << "lstm_size " << m.hp.lstm_size << '\n';
  out << "lstm_type " << to_string(m.hp.lstm_type) << '\n';
  out << "learning_rate " << format_double(m.hp.learning_rate) << '\n';
  out << "dropout_rate " << format_double(m.hp.dropout_rate) << '\n';
  out << "batch_size " << m.hp.batch_size << '\n';
  out << "max_epochs " << m.hp.max_epochs << '\n';
  out << "optimizer " << to_string(m.hp.optimizer) << '\n';
  out << "seed " << m.hp.seed << '\n';
  out << "vocab " << m.vocab.size();
  for (const auto& n : m.vocab.names()) out << ' ' << n;
  out << '\n';
  m.params.for_each_tensor([&](const std::string& name, std::size_t rows, std::size_t cols,
                               std::span<const double> data) {
    out << "tensor " << name << ' ' << rows << ' ' << cols << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        if (c) out << ' ';
        out << format_double(data[r * cols + c]);
      }
      out << '\n';
    }
  });
  out << "end\n";
}

SequenceModel read_model(std::istream& in) {
  LineReader r(in);
  std::string line;
  if (!r.next(line)) throw FormatError(1, "empty model file");
  const auto magic = split_ws(line);
  if (magic.size() != 2 || magic[0] != "failseq-model") throw FormatError(1, "not a failseq model file");
  const std::size_t version = parse_count(magic[1], 1);
  if (version != kModelFormatVersion) {
    throw FormatError(1, "unsupported model format version " + magic[1] + " (expected " +
                             std::to_string(kModelFormatVersion) + ")");
  }

  SequenceModel m;
  try {
    m.hp.embedding_size = parse_count(keyed_value(r, "embedding_size"), r.line_no());
    m.hp.lstm_size = parse_count(keyed_value(r, "lstm_size"), r.line_no());
    m.hp.lstm_type = parse_lstm_type(keyed_value(r, "lstm_type"));
    m.hp.learning_rate = parse_double(keyed_value(r, "learning_rate"));
    m.hp.dropout_rate = parse_double(keyed_value(r, "dropout_rate"));
    m.hp.batch_size = parse_count(keyed_value(r, "batch_size"), r.line_no());
    m.hp.max_epochs = parse_count(keyed_value(r, "max_epochs"), r.line_no());
    m.hp.optimizer = parse_optimizer(keyed_value(r, "optimizer"));
    m.hp.seed = parse_count(keyed_value(r, "seed"), r.line_no());
    m.hp.validate();
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError(r.line_no(), e.what());
  }

  const auto vtoks = split_ws(r.require("vocab"));
  if (vtoks.size() < 2 || vtoks[0] != "vocab") throw FormatError(r.line_no(), "expected 'vocab <count> <names...>'");
  const std::size_t vcount = parse_count(vtoks[1], r.line_no());
  if (vtoks.size() != vcount + 2) throw FormatError(r.line_no(), "vocab count does not match the listed names");
  try {
    m.vocab = Vocab(std::vector<std::string>(vtoks.begin() + 2, vtoks.end()));
  } catch (const std::exception& e) {
    throw FormatError(r.line_no(), e.what());
  }

  Rng shape_rng(0);
  m.params = init_params(m.hp, m.vocab.size(), shape_rng);
  m.params.for_each_tensor([&](const std::string& name, std::size_t rows, std::size_t cols, std::span<double> data) {
    const auto head = split_ws(r.require(("tensor " + name).c_str()));
    if (head.size() != 4 || head[0] != "tensor" || head[1] != name) {
      throw FormatError(r.line_no(), "expected 'tensor " + name + " <rows> <cols>'");
    }
    if (parse_count(head[2], r.line_no()) != rows || parse_count(head[3], r.line_no()) != cols) {
      throw FormatError(r.line_no(), "tensor " + name + " has shape " + head[2] + "x" + head[3] + ", expected " +
                                         std::to_string(rows) + "x" + std::to_string(cols));
    }
    for (std::size_t i = 0; i < rows; ++i) {
      const auto vals = split_ws(r.require(("row of " + name).c_str()));
      if (vals.size() != cols) {
        throw FormatError(r.line_no(), "tensor " + name + " row has " + std::to_string(vals.size()) +
                                           " values, expected " + std::to_string(cols));
      }
      for (std::size_t j = 0; j < cols; ++j) {
        try {
          data[i * cols + j] = parse_double(vals[j]);
        } catch (const std::exception& e) {
          throw FormatError(r.line_no(), e.what());
        }
        if (!std::isfinite(data[i * cols + j])) throw FormatError(r.line_no(), "non-finite parameter in " + name);
      }
    }
  });
  if (split_ws(r.require("end")) != std::vector<std::string>{"end"}) throw FormatError(r.line_no(), "expected 'end'");
  return m;
}

void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
      writer(out);
      out.flush();
      if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
    }
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

void save_model(const std::filesystem::path& path, const SequenceModel& model) {
  write_file_atomic(path, [&](std::ostream& out) { write_model(out, model); });
}

SequenceModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  return read_model(in);
}

void write_dataset(std::ostream& out, const Dataset& ds) {
  out << "#failseq-dataset " << kDatasetFormatVersion << '\n';
  out << "#vocab";
  for (const auto& n : ds.vocab.names()) out << ' ' << n;
  out << '\n';
  if (ds.provenance) {
    for (const auto& p : ds.provenance->contributor_patterns) out << "#contributors " << ds.vocab.format(p) << '\n';
    out << "#blockers";
    for (EventId e : ds.provenance->blocker_events) out << ' ' << ds.vocab.name(e);
    out << '\n';
  }
  for (const auto& s : ds.sessions) out << s.label << '\t' << ds.vocab.format(s.events) << '\n';
}

Dataset read_dataset(std::istream& in) {
  LineReader r(in);
  std::string line;
  if (!r.next(line)) throw FormatError(1, "no header");
  const auto magic = split_ws(line);
  if (magic.size() != 2 || magic[0] != "#failseq-dataset") throw FormatError(1, "no header");
  if (parse_count(magic[1], 1) != kDatasetFormatVersion) {
    throw FormatError(1, "unsupported dataset format version " + magic[1]);
  }

  Dataset ds;
  bool have_vocab = false;
  bool have_blockers = false;
  RuleSpec rules;
  std::size_t record = 0;
  while (r.next(line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (record > 0) throw FormatError(r.line_no(), "header line after the first record");
      auto toks = split_ws(line);
      const std::string key = toks[0].substr(1);
      toks.erase(toks.begin());
      try {
        if (key == "vocab") {
          ds.vocab = Vocab(toks);
          have_vocab = true;
        } else if (key == "contributors") {
          if (!have_vocab) throw std::invalid_argument("#contributors before #vocab");
          rules.contributor_patterns.push_back(ds.vocab.encode(toks));
        } else if (key == "blockers") {
          if (!have_vocab) throw std::invalid_argument("#blockers before #vocab");
          for (EventId e : ds.vocab.encode(toks)) rules.blocker_events.insert(e);
          have_blockers = true;
        } else {
          throw std::invalid_argument("unknown header '#" + key + "'");
        }
      } catch (const std::exception& e) {
        throw FormatError(r.line_no(), e.what());
      }
      continue;
    }
    if (!have_vocab) throw FormatError(r.line_no(), "record before #vocab header");
    ++record;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw FormatError(r.line_no(), "record " + std::to_string(record) + ": missing tab");
    const std::string label = line.substr(0, tab);
    if (label != "0" && label != "1") {
      throw FormatError(r.line_no(), "record " + std::to_string(record) + ": label must be 0 or 1, got '" + label + "'");
    }
    Session s;
    s.label = label == "1" ? 1 : 0;
    try {
      s.events = ds.vocab.parse(std::string_view(line).substr(tab + 1));
    } catch (const std::exception& e) {
      throw FormatError(r.line_no(), "record " + std::to_string(record) + ": " + e.what());
    }
    if (s.events.empty()) throw FormatError(r.line_no(), "record " + std::to_string(record) + ": no events");
    ds.sessions.push_back(std::move(s));
  }
  if (!have_vocab) throw FormatError(r.line_no(), "missing #vocab header");
  if (!rules.contributor_patterns.empty() || have_blockers) {
    try {
      rules.validate();
    } catch (const std::exception& e) {
      throw FormatError(r.line_no(), e.what());
    }
    ds.provenance = std::move(rules);
  }
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  write_file_atomic(path, [&](std::ostream& out) { write_dataset(out, ds); });
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset file " + path.string());
  return read_dataset(in);
}

std::string format_prediction(std::size_t id, double prob) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "id=%zu prob=%.6f pred=%d", id, prob, predict_label(prob));
  return buf;
}

std::string format_extraction(std::size_t id, const ExtractionResult& r, const Vocab& vocab) {
  auto list = [&](const std::vector<Occurrence>& occ) {
    if (occ.empty()) return std::string("-");
    std::string s;
    for (std::size_t i = 0; i < occ.size(); ++i) {
      if (i) s += ',';
      s += vocab.name(occ[i].event) + "@" + std::to_string(occ[i].position);
    }
    return s;
  };
  char buf[96];
  std::snprintf(buf, sizeof buf, "id=%zu pred=%d prob=%.6f confident=%d", id, r.prediction, r.base_prob,
                r.confident ? 1 : 0);
  return std::string(buf) + " contributors=" + list(r.contributors) + " blockers=" + list(r.blockers);
}

std::string format_extraction_summary(const ExtractionScore& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "scored=%zu contributor_precision=%.6f contributor_recall=%.6f blocker_precision=%.6f "
                "blocker_recall=%.6f",
                s.sequences, s.contributors.precision(), s.contributors.recall(), s.blockers.precision(),
                s.blockers.recall());
  return buf;
}

std::string format_metrics(const Metrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "accuracy=%.6f precision=%.6f recall=%.6f f1=%.6f tp=%zu fp=%zu tn=%zu fn=%zu",
                m.accuracy, m.precision, m.recall, m.f1, m.tp, m.fp, m.tn, m.fn);
  return buf;
}

std::string format_rule_table(const std::vector<SequentialRule>& rules, const Vocab& vocab) {
  std::string out = "rule\tsupport%\tconfidence%\tlift\n";
  char buf[128];
  for (const auto& r : rules) {
    std::string pattern;
    for (std::size_t i = 0; i < r.antecedent.size(); ++i) {
      if (i) pattern += ',';
      pattern += vocab.name(r.antecedent[i]);
    }
    std::snprintf(buf, sizeof buf, "\t%.2f\t%.3f\t%.4f\n", 100.0 * r.support, 100.0 * r.confidence, r.lift);
    out += pattern + " => failure" + buf;
  }
  return out;
}

}  // namespace failseq
