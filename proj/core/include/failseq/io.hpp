// SPDX-License-Identifier: Apache-2.0
/**
 * @file   io.hpp
 * @brief  Text formats for models, datasets and pipeline records.
 *
 * Model file (format version 1):
 *
 *   failseq-model 1
 *   embedding_size 3
 *   lstm_size 6
 *   lstm_type bidirectional
 *   learning_rate 0.02
 *   dropout_rate 0.4
 *   batch_size 512
 *   max_epochs 150
 *   optimizer adam
 *   seed 1
 *   vocab 20 a b c ... t
 *   tensor embedding 21 3
 *   <one line per row, 17 significant digits>
 *   tensor fwd.w_forget 6 9
 *   ...
 *   end
 *
 * Tensors appear in ModelParams::for_each_tensor order.
 *
 * Dataset file:
 *
 *   #failseq-dataset 1
 *   #vocab a b c ... t
 *   #contributors f b c        (zero or more, one per pattern)
 *   #blockers e                (present iff rule provenance is present)
 *   1<TAB>a f b c a
 *   0<TAB>a f b c e f
 */
#ifndef FAILSEQ_IO_HPP
#define FAILSEQ_IO_HPP

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "failseq/events.hpp"
#include "failseq/extraction.hpp"
#include "failseq/rulemine.hpp"
#include "failseq/seqmodel.hpp"
#include "failseq/training.hpp"

namespace failseq {

inline constexpr int kModelFormatVersion = 1;
inline constexpr int kDatasetFormatVersion = 1;

/// Malformed input; the message carries the line number.
class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// 17 significant digits, enough to parse back to the identical double.
std::string format_double(double v);
double parse_double(std::string_view text);

void write_model(std::ostream& out, const SequenceModel& model);
SequenceModel read_model(std::istream& in);
void save_model(const std::filesystem::path& path, const SequenceModel& model);
SequenceModel load_model(const std::filesystem::path& path);

void write_dataset(std::ostream& out, const Dataset& ds);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory and renames it
/// into place, so `path` is either untouched or complete.
void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer);

std::string format_prediction(std::size_t id, double prob);
/// "id=3 pred=1 prob=0.990000 confident=1 contributors=f@2,b@3,c@4 blockers=-"
std::string format_extraction(std::size_t id, const ExtractionResult& r, const Vocab& vocab);
std::string format_extraction_summary(const ExtractionScore& s);
std::string format_metrics(const Metrics& m);
/// Tab-separated table: pattern, support %, confidence %, lift.
std::string format_rule_table(const std::vector<SequentialRule>& rules, const Vocab& vocab);

}  // namespace failseq

#endif  // FAILSEQ_IO_HPP
