#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "bisent/sentiment_class.hpp"

namespace bisent {

// Square count matrix, rows = gold class, columns = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes = kNumClasses);

  // Throws std::invalid_argument unless rows is square with non-negative counts.
  static ConfusionMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows);

  void add(std::size_t gold, std::size_t predicted, std::int64_t count = 1);
  void merge(const ConfusionMatrix& other);

  std::size_t classes() const { return classes_; }
  std::int64_t at(std::size_t gold, std::size_t predicted) const { return counts_[gold * classes_ + predicted]; }
  std::int64_t total() const { return total_; }
  std::int64_t row_sum(std::size_t gold) const;
  std::int64_t col_sum(std::size_t predicted) const;
  std::int64_t trace() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t classes_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

// Throws DataError for empty or unequal-length inputs.
ConfusionMatrix confusion(std::span<const SentimentClass> golds, std::span<const SentimentClass> preds);

// trace / n. Throws DataError when n = 0.
double accuracy(const ConfusionMatrix& cm);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct PrecisionRecall {
  std::vector<ClassScores> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

// Empty rows/columns give 0 recall/precision. Macro values average the
// classes that occur in gold.
PrecisionRecall precision_recall_f1(const ConfusionMatrix& cm);

struct ErrorMagnitudes {
  double mae = 0.0;
  double rmse = 0.0;
};

// Mean absolute and root mean square difference of class weights (-3..+3).
ErrorMagnitudes mae_rmse(std::span<const SentimentClass> golds, std::span<const SentimentClass> preds);

// (p_o - p_e) / (1 - p_e). When p_e = 1 (everything in one class) this is
// 1 if p_o = 1 and 0 otherwise.
double kappa(const ConfusionMatrix& cm);

// Positive super-class recall: gold-positive posts predicted into any
// positive class over all gold-positive posts. Throws DataError
// ("undefined TPR") when there are no gold positives. With the default
// empty set the positive classes are WeakPos, ModPos and StrongPos.
double true_positive_rate(const ConfusionMatrix& cm, std::span<const std::size_t> positive_classes = {});

struct EvalReport {
  std::int64_t n = 0;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  double kappa = 0.0;
  std::optional<double> tpr;  // empty when no gold positives
  std::vector<ClassScores> per_class;
  ConfusionMatrix confusion;
};

EvalReport evaluate(std::span<const SentimentClass> golds, std::span<const SentimentClass> preds);

// Flat key=value lines, then "confusion=" and one tab-separated row per gold class.
void write_eval_report(const EvalReport& report, std::ostream& out);

// Header and rows of the per-epoch trace file.
void write_trace_header(std::ostream& out);
void write_trace_row(std::ostream& out, std::size_t epoch, double loss, const EvalReport& report);

}  // namespace bisent
