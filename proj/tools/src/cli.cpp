// SPDX-License-Identifier: Apache-2.0
#include "failseq/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "failseq/datagen.hpp"
#include "failseq/extraction.hpp"
#include "failseq/hyperopt.hpp"
#include "failseq/io.hpp"
#include "failseq/rulemine.hpp"
#include "failseq/training.hpp"

namespace failseq::cli {

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  bool quiet = false;
};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out;
}

void report_error(std::ostream& err, const char* kind, const std::string& message) {
  err << "error kind=" << kind << " message=\"" << escape(message) << "\"\n";
}

// Writes `text` to `path` atomically, or to `out` when no path was given.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_file_atomic(path, [&](std::ostream& f) { f << text; });
  }
}

Dataset load_nonempty(const std::string& path) {
  Dataset ds = load_dataset(path);
  if (ds.empty()) throw InputError("dataset " + path + " has no sessions");
  return ds;
}

void check_vocab(const SequenceModel& m, const Dataset& ds) {
  if (!(m.vocab == ds.vocab)) throw InputError("dataset vocabulary does not match the model vocabulary");
}

struct GenArgs {
  std::size_t count = 30000, len = 15, vocab = 20;
  double target_pos = 0.25;
  bool natural = false;
  double split = 0.0;
  std::string out, test_out;
};

struct HpArgs {
  HyperParams hp;
  std::string type = "bi", optimizer = "adam";

  void add(CLI::App* sub) {
    sub->add_option("--embedding", hp.embedding_size, "Embedding size n")->capture_default_str();
    sub->add_option("--lstm", hp.lstm_size, "LSTM state size l")->capture_default_str();
    sub->add_option("--type", type, "LSTM type: bi or standard")->capture_default_str();
    sub->add_option("--lr", hp.learning_rate, "Learning rate")->capture_default_str();
    sub->add_option("--batch", hp.batch_size, "Mini-batch size")->capture_default_str();
    sub->add_option("--epochs", hp.max_epochs, "Maximum number of epochs")->capture_default_str();
    sub->add_option("--dropout", hp.dropout_rate, "Dropout rate on the final hidden state")->capture_default_str();
    sub->add_option("--optimizer", optimizer, "adam or sgd")->capture_default_str();
  }

  HyperParams resolve(const Globals& g) const {
    HyperParams out = hp;
    out.lstm_type = parse_lstm_type(type);
    out.optimizer = parse_optimizer(optimizer);
    if (g.seed) out.seed = *g.seed;
    out.validate();
    return out;
  }
};

int cmd_gen(const GenArgs& a, const Globals& g, std::ostream& out) {
  GenConfig cfg;
  cfg.num_sequences = a.count;
  cfg.seq_len = a.len;
  cfg.vocab_size = a.vocab;
  if (a.natural) {
    cfg.target_positive_rate.reset();
  } else {
    cfg.target_positive_rate = a.target_pos;
  }
  if (g.seed) cfg.seed = *g.seed;
  const Dataset ds = generate(cfg);
  if (a.split > 0.0) {
    if (a.test_out.empty()) throw InputError("--split requires --test-out");
    auto [first, second] = split(ds, a.split, cfg.seed);
    save_dataset(a.out, first);
    save_dataset(a.test_out, second);
    if (!g.quiet) {
      out << "sessions=" << first.size() << " positives=" << first.positives() << " path=" << a.out << '\n';
      out << "sessions=" << second.size() << " positives=" << second.positives() << " path=" << a.test_out << '\n';
    }
  } else {
    save_dataset(a.out, ds);
    if (!g.quiet) out << "sessions=" << ds.size() << " positives=" << ds.positives() << " path=" << a.out << '\n';
  }
  return kExitOk;
}

int cmd_train(const std::string& data, const std::string& valid_path, const std::string& model_out,
              const std::string& report_path, const HpArgs& hpa, const Globals& g, std::ostream& out) {
  const HyperParams hp = hpa.resolve(g);
  const Dataset ds = load_nonempty(data);
  std::optional<Dataset> valid;
  if (!valid_path.empty()) {
    valid = load_nonempty(valid_path);
    if (!(valid->vocab == ds.vocab)) throw InputError("validation vocabulary differs from training vocabulary");
  }
  TrainOptions opts;
  opts.threads = g.threads;
  std::ostringstream report;
  opts.on_epoch = [&](const EpochRecord& r) {
    const std::string line = format_epoch(r) + "\n";
    report << line;
    if (!g.quiet) out << line << std::flush;
  };
  const TrainReport rep = train(ds, valid ? &*valid : nullptr, hp, opts);
  save_model(model_out, SequenceModel{hp, ds.vocab, rep.params});
  if (!report_path.empty()) emit(report_path, report.str(), out);
  return kExitOk;
}

struct TuneArgs {
  std::string data, out;
  std::size_t budget = 20, init = 5, folds = 5, cv_epochs = 30, pool = 2048;
};

int cmd_tune(const TuneArgs& a, const HpArgs& hpa, const Globals& g, std::ostream& out) {
  const HyperParams base = hpa.resolve(g);
  const Dataset ds = load_nonempty(a.data);
  TuneConfig cfg;
  cfg.bayes.budget = a.budget;
  cfg.bayes.init = a.init;
  cfg.bayes.pool_size = a.pool;
  cfg.bayes.seed = g.seed.value_or(0);
  cfg.fold_seed = g.seed.value_or(0);
  cfg.folds = a.folds;
  cfg.cv_epochs = a.cv_epochs;
  cfg.train.threads = g.threads;

  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  const TuneResult r = tune(ds, base, cfg, [&](std::size_t i, const HyperParams& hp, double f1) {
    if (!g.quiet) out << format_trial(i, hp, f1) << '\n' << std::flush;
    trace.push_back({{"iteration", i},
                     {"learning_rate", hp.learning_rate},
                     {"embedding_size", hp.embedding_size},
                     {"lstm_size", hp.lstm_size},
                     {"lstm_type", std::string(to_string(hp.lstm_type))},
                     {"cv_f1", f1}});
  });
  nlohmann::ordered_json doc;
  doc["best"] = {{"learning_rate", r.best.learning_rate},
                 {"embedding_size", r.best.embedding_size},
                 {"lstm_size", r.best.lstm_size},
                 {"lstm_type", std::string(to_string(r.best.lstm_type))},
                 {"cv_f1", r.best_f1}};
  doc["trace"] = trace;
  if (!g.quiet) out << "best " << format_trial(0, r.best, r.best_f1).substr(std::string("iteration=0 ").size()) << '\n';
  if (!a.out.empty()) emit(a.out, doc.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_predict(const std::string& model_path, const std::string& data, const std::string& out_path,
                std::ostream& out) {
  const SequenceModel m = load_model(model_path);
  const Dataset ds = load_nonempty(data);
  check_vocab(m, ds);
  std::string text;
  for (std::size_t i = 0; i < ds.size(); ++i) text += format_prediction(i, m.probability(ds.sessions[i].events)) + "\n";
  emit(out_path, text, out);
  return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& data, const std::string& out_path, const Globals& g,
             std::ostream& out) {
  const SequenceModel m = load_model(model_path);
  const Dataset ds = load_nonempty(data);
  check_vocab(m, ds);
  emit(out_path, format_metrics(evaluate(m, ds, g.threads)) + "\n", out);
  return kExitOk;
}

struct ExtractArgs {
  std::string model, data, out, mode = "void";
  double conf_th = 0.9, diff_th = 0.4;
};

int cmd_extract(const ExtractArgs& a, const Globals& g, std::ostream& out) {
  ExtractConfig cfg;
  cfg.mode = parse_perturb_mode(a.mode);
  cfg.conf_th = a.conf_th;
  cfg.diff_th = a.diff_th;
  cfg.validate();
  const SequenceModel m = load_model(a.model);
  const Dataset ds = load_nonempty(a.data);
  check_vocab(m, ds);
  std::string text;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    text += format_extraction(i, extract(ds.sessions[i].events, m, cfg), ds.vocab) + "\n";
  }
  if (ds.provenance) text += format_extraction_summary(evaluate_extraction(ds, m, cfg, g.threads)) + "\n";
  emit(a.out, text, out);
  return kExitOk;
}

int cmd_mine(const std::string& data, const MineConfig& cfg, const std::string& out_path, std::ostream& out) {
  const Dataset ds = load_nonempty(data);
  emit(out_path, format_rule_table(mine_rules(ds, cfg), ds.vocab), out);
  return kExitOk;
}

int cmd_filter(const std::string& data, const std::vector<std::string>& blacklist, const std::string& out_path,
               const Globals& g, std::ostream& out) {
  const Dataset ds = load_dataset(data);
  const Dataset filtered = filter_signature_events(ds, blacklist);
  save_dataset(out_path, filtered);
  if (!g.quiet) out << "sessions=" << filtered.size() << " removed=" << ds.size() - filtered.size() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Failure-sequence modelling: generate, train, tune, predict, extract, mine, eval, filter", "failseq"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Random seed")->envname("FAILSEQ_SEED");
  app.add_option("--threads", g.threads, "Worker threads")->envname("FAILSEQ_THREADS")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "Suppress progress output");

  GenArgs gen;
  auto* s_gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  s_gen->add_option("--count", gen.count, "Number of sessions")->capture_default_str();
  s_gen->add_option("--len", gen.len, "Session length")->capture_default_str();
  s_gen->add_option("--vocab", gen.vocab, "Number of event types")->capture_default_str();
  s_gen->add_option("--target-pos", gen.target_pos, "Fraction of failing sessions")->capture_default_str();
  s_gen->add_flag("--natural", gen.natural, "Keep the natural failure rate instead of balancing");
  s_gen->add_option("--split", gen.split, "Write this fraction to --out and the rest to --test-out");
  s_gen->add_option("--out", gen.out, "Output dataset path")->required();
  s_gen->add_option("--test-out", gen.test_out, "Output path for the second part of --split");

  std::string data, valid, model, out_path, report;
  HpArgs hpa;
  auto* s_train = app.add_subcommand("train", "Train a model");
  s_train->add_option("--data", data, "Training dataset")->required();
  s_train->add_option("--valid", valid, "Validation dataset used for early stopping");
  s_train->add_option("--out", model, "Output model path")->required();
  s_train->add_option("--report", report, "Write the per-epoch report to this path");
  hpa.add(s_train);

  TuneArgs tune_args;
  auto* s_tune = app.add_subcommand("tune", "Bayesian hyperparameter search on k-fold F1");
  s_tune->add_option("--data", tune_args.data, "Dataset")->required();
  s_tune->add_option("--budget", tune_args.budget, "Total evaluations")->capture_default_str();
  s_tune->add_option("--init", tune_args.init, "Random initial evaluations")->capture_default_str();
  s_tune->add_option("--folds", tune_args.folds, "Cross-validation folds")->capture_default_str();
  s_tune->add_option("--cv-epochs", tune_args.cv_epochs, "Epochs per cross-validation run")->capture_default_str();
  s_tune->add_option("--pool", tune_args.pool, "Candidate pool per proposal")->capture_default_str();
  s_tune->add_option("--out", tune_args.out, "Write best config and trace as JSON");
  hpa.add(s_tune);

  auto* s_predict = app.add_subcommand("predict", "Failure probability per session");
  s_predict->add_option("--model", model, "Model file")->required();
  s_predict->add_option("--data", data, "Dataset")->required();
  s_predict->add_option("--out", out_path, "Output path (default stdout)");

  ExtractArgs ex;
  auto* s_extract = app.add_subcommand("extract", "Extract contributor and blocker events");
  s_extract->add_option("--model", ex.model, "Model file")->required();
  s_extract->add_option("--data", ex.data, "Dataset")->required();
  s_extract->add_option("--mode", ex.mode, "void or zero")->capture_default_str();
  s_extract->add_option("--conf-th", ex.conf_th, "Confidence threshold")->capture_default_str();
  s_extract->add_option("--diff-th", ex.diff_th, "Probability change threshold")->capture_default_str();
  s_extract->add_option("--out", ex.out, "Output path (default stdout)");

  MineConfig mine;
  auto* s_mine = app.add_subcommand("mine", "Mine sequential rules X => failure");
  s_mine->add_option("--data", data, "Dataset")->required();
  s_mine->add_option("--minsup", mine.min_support, "Minimum support")->capture_default_str();
  s_mine->add_option("--minconf", mine.min_confidence, "Minimum confidence")->capture_default_str();
  s_mine->add_option("--max-len", mine.max_pattern_len, "Maximum pattern length")->capture_default_str();
  s_mine->add_option("--out", out_path, "Output path (default stdout)");

  auto* s_eval = app.add_subcommand("eval", "Accuracy, precision, recall and F1 of a model");
  s_eval->add_option("--model", model, "Model file")->required();
  s_eval->add_option("--data", data, "Dataset")->required();
  s_eval->add_option("--out", out_path, "Output path (default stdout)");

  std::vector<std::string> blacklist;
  auto* s_filter = app.add_subcommand("filter", "Remove signature events from a dataset");
  s_filter->add_option("--data", data, "Dataset")->required();
  s_filter->add_option("--blacklist", blacklist, "Event names to drop")->delimiter(',')->required();
  s_filter->add_option("--out", out_path, "Output dataset path")->required();

  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--seed" || a == "--threads") {
      ++i;
      continue;
    }
    if (a.starts_with("-")) continue;
    if (app.get_subcommand_no_throw(a) == nullptr) {
      report_error(err, "usage", "unknown subcommand '" + a + "'");
      err << app.help();
      return kExitUsage;
    }
    break;
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    err << app.help();
    return kExitUsage;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (s_gen->parsed()) return cmd_gen(gen, g, out);
    if (s_train->parsed()) return cmd_train(data, valid, model, report, hpa, g, out);
    if (s_tune->parsed()) return cmd_tune(tune_args, hpa, g, out);
    if (s_predict->parsed()) return cmd_predict(model, data, out_path, out);
    if (s_extract->parsed()) return cmd_extract(ex, g, out);
    if (s_mine->parsed()) return cmd_mine(data, mine, out_path, out);
    if (s_eval->parsed()) return cmd_eval(model, data, out_path, g, out);
    if (s_filter->parsed()) return cmd_filter(data, blacklist, out_path, g, out);
  } catch (const FormatError& e) {
    report_error(err, "format", e.what());
    return kExitFailure;
  } catch (const InputError& e) {
    report_error(err, "input", e.what());
    return kExitFailure;
  } catch (const std::invalid_argument& e) {
    report_error(err, "input", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    report_error(err, "runtime", e.what());
    return kExitFailure;
  }
  report_error(err, "usage", "no subcommand");
  return kExitUsage;
}

}  // namespace failseq::cli
