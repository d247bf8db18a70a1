#include "bisent/metrics.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <stdexcept>

#include "bisent/error.hpp"
#include "bisent/format.hpp"

namespace bisent {
namespace {

constexpr std::array<std::size_t, 3> kPositiveClasses = {
    class_index(SentimentClass::WeakPos), class_index(SentimentClass::ModPos),
    class_index(SentimentClass::StrongPos)};

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_pairs(std::span<const SentimentClass> golds, std::span<const SentimentClass> preds) {
  if (golds.size() != preds.size()) throw DataError("gold and predicted lists differ in length");
  if (golds.empty()) throw DataError("no predictions to evaluate");
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : classes_(classes), counts_(classes * classes, 0) {
  if (classes == 0) throw std::invalid_argument("confusion matrix needs at least one class");
}

ConfusionMatrix ConfusionMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
  ConfusionMatrix cm(rows.size());
  for (std::size_t g = 0; g < rows.size(); ++g) {
    if (rows[g].size() != rows.size()) throw std::invalid_argument("confusion matrix must be square");
    for (std::size_t p = 0; p < rows.size(); ++p) cm.add(g, p, rows[g][p]);
  }
  return cm;
}

void ConfusionMatrix::add(std::size_t gold, std::size_t predicted, std::int64_t count) {
  if (gold >= classes_ || predicted >= classes_) throw std::out_of_range("class outside confusion matrix");
  if (count < 0) throw std::invalid_argument("negative confusion count");
  counts_[gold * classes_ + predicted] += count;
  total_ += count;
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw std::invalid_argument("confusion matrices differ in size");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t gold) const {
  std::int64_t s = 0;
  for (std::size_t p = 0; p < classes_; ++p) s += at(gold, p);
  return s;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::int64_t s = 0;
  for (std::size_t g = 0; g < classes_; ++g) s += at(g, predicted);
  return s;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t s = 0;
  for (std::size_t c = 0; c < classes_; ++c) s += at(c, c);
  return s;
}

ConfusionMatrix confusion(std::span<const SentimentClass> golds, std::span<const SentimentClass> preds) {
  check_pairs(golds, preds);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < golds.size(); ++i) cm.add(class_index(golds[i]), class_index(preds[i]));
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("accuracy of an empty confusion matrix");
  return ratio(cm.trace(), cm.total());
}

PrecisionRecall precision_recall_f1(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("precision/recall of an empty confusion matrix");
  PrecisionRecall out;
  out.per_class.resize(cm.classes());
  std::size_t present = 0;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    auto& s = out.per_class[c];
    s.precision = ratio(cm.at(c, c), cm.col_sum(c));
    s.recall = ratio(cm.at(c, c), cm.row_sum(c));
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    if (cm.row_sum(c) == 0) continue;
    ++present;
    out.macro_precision += s.precision;
    out.macro_recall += s.recall;
    out.macro_f1 += s.f1;
  }
  const auto k = static_cast<double>(present);
  out.macro_precision /= k;
  out.macro_recall /= k;
  out.macro_f1 /= k;
  return out;
}

ErrorMagnitudes mae_rmse(std::span<const SentimentClass> golds, std::span<const SentimentClass> preds) {
  check_pairs(golds, preds);
  std::int64_t abs_sum = 0;
  std::int64_t sq_sum = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const int d = class_weight(golds[i]) - class_weight(preds[i]);
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  const auto n = static_cast<double>(golds.size());
  return {static_cast<double>(abs_sum) / n, std::sqrt(static_cast<double>(sq_sum) / n)};
}

double kappa(const ConfusionMatrix& cm) {
  const double po = accuracy(cm);
  const auto n = static_cast<double>(cm.total());
  double pe = 0.0;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    pe += static_cast<double>(cm.row_sum(c)) * static_cast<double>(cm.col_sum(c));
  }
  pe /= n * n;
  if (pe == 1.0) return po == 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

double true_positive_rate(const ConfusionMatrix& cm, std::span<const std::size_t> positive_classes) {
  if (positive_classes.empty()) positive_classes = kPositiveClasses;
  std::int64_t tp = 0;
  std::int64_t gold_pos = 0;
  for (auto g : positive_classes) {
    gold_pos += cm.row_sum(g);
    for (auto p : positive_classes) tp += cm.at(g, p);
  }
  if (gold_pos == 0) throw DataError("undefined TPR: no gold positives");
  return ratio(tp, gold_pos);
}

EvalReport evaluate(std::span<const SentimentClass> golds, std::span<const SentimentClass> preds) {
  EvalReport r;
  r.confusion = confusion(golds, preds);
  r.n = r.confusion.total();
  r.accuracy = accuracy(r.confusion);
  auto pr = precision_recall_f1(r.confusion);
  r.macro_precision = pr.macro_precision;
  r.macro_recall = pr.macro_recall;
  r.macro_f1 = pr.macro_f1;
  r.per_class = std::move(pr.per_class);
  const auto err = mae_rmse(golds, preds);
  r.mae = err.mae;
  r.rmse = err.rmse;
  r.kappa = kappa(r.confusion);
  try {
    r.tpr = true_positive_rate(r.confusion);
  } catch (const DataError&) {
    r.tpr.reset();
  }
  return r;
}

void write_eval_report(const EvalReport& r, std::ostream& out) {
  out << "n=" << r.n << "\naccuracy=" << format_double(r.accuracy)
      << "\nmacro_precision=" << format_double(r.macro_precision)
      << "\nmacro_recall=" << format_double(r.macro_recall) << "\nmacro_f1=" << format_double(r.macro_f1)
      << "\nmae=" << format_double(r.mae) << "\nrmse=" << format_double(r.rmse)
      << "\nkappa=" << format_double(r.kappa) << "\ntpr=" << (r.tpr ? format_double(*r.tpr) : "undefined") << '\n';
  for (std::size_t c = 0; c < r.per_class.size() && c < kNumClasses; ++c) {
    const auto name = class_name(class_from_index(c));
    const auto& s = r.per_class[c];
    out << name << ".precision=" << format_double(s.precision) << '\n'
        << name << ".recall=" << format_double(s.recall) << '\n'
        << name << ".f1=" << format_double(s.f1) << '\n';
  }
  out << "confusion=rows gold, columns predicted\n";
  for (std::size_t g = 0; g < r.confusion.classes(); ++g) {
    for (std::size_t p = 0; p < r.confusion.classes(); ++p) out << (p ? "\t" : "") << r.confusion.at(g, p);
    out << '\n';
  }
}

void write_trace_header(std::ostream& out) {
  out << "epoch\tloss\taccuracy\tprecision\trecall\tf1\tmae\trmse\tkappa\ttpr\n";
}

void write_trace_row(std::ostream& out, std::size_t epoch, double loss, const EvalReport& r) {
  out << epoch << '\t' << format_double(loss) << '\t' << format_double(r.accuracy) << '\t'
      << format_double(r.macro_precision) << '\t' << format_double(r.macro_recall) << '\t'
      << format_double(r.macro_f1) << '\t' << format_double(r.mae) << '\t' << format_double(r.rmse) << '\t'
      << format_double(r.kappa) << '\t' << (r.tpr ? format_double(*r.tpr) : "undefined") << '\n';
}

}  // namespace bisent
