#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "deasel/csv.hpp"
#include "deasel/error.hpp"

namespace deasel {

struct ConfusionMatrix {
  long long tp = 0, fp = 0, tn = 0, fn = 0;

  long long total() const { return tp + fp + tn + fn; }
};

/// Binary report; every metric lives in [0,1]. Ratios that come out 0/0
/// are defined as 0 and the metric's name is recorded in `degenerate`.
struct MetricReport {
  double accuracy = 0;
  double recall_pos = 0, recall_neg = 0;
  double precision_pos = 0, precision_neg = 0;
  double f_pos = 0, f_neg = 0;
  double auc = 0;  // filled in by roc_auc when scores exist
  std::vector<std::string> degenerate;
};

inline ConfusionMatrix confusion(const std::vector<int>& truth,
                                 const std::vector<int>& predicted, int positive) {
  if (truth.size() != predicted.size())
    fail(ErrorKind::Usage, "truth and prediction lengths differ: " +
                               std::to_string(truth.size()) + " vs " +
                               std::to_string(predicted.size()));
  if (truth.empty()) fail(ErrorKind::Usage, "nothing to evaluate");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    bool t = truth[i] == positive;
    bool p = predicted[i] == positive;
    if (t && p) ++cm.tp;
    else if (!t && p) ++cm.fp;
    else if (!t && !p) ++cm.tn;
    else ++cm.fn;
  }
  return cm;
}

inline MetricReport metrics(const ConfusionMatrix& cm) {
  if (cm.total() <= 0) fail(ErrorKind::Usage, "empty confusion matrix");
  if (cm.tp < 0 || cm.fp < 0 || cm.tn < 0 || cm.fn < 0)
    fail(ErrorKind::Usage, "negative confusion counts");
  MetricReport r;
  auto ratio = [&r](long long num, long long den, const char* name) {
    if (den == 0) {
      r.degenerate.push_back(name);
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  r.recall_pos = ratio(cm.tp, cm.tp + cm.fn, "recall_pos");
  r.recall_neg = ratio(cm.tn, cm.tn + cm.fp, "recall_neg");
  r.precision_pos = ratio(cm.tp, cm.tp + cm.fp, "precision_pos");
  r.precision_neg = ratio(cm.tn, cm.tn + cm.fn, "precision_neg");
  auto harmonic = [&r](double p, double rec, const char* name) {
    if (p + rec == 0) {
      r.degenerate.push_back(name);
      return 0.0;
    }
    return 2.0 * p * rec / (p + rec);
  };
  r.f_pos = harmonic(r.precision_pos, r.recall_pos, "f_pos");
  r.f_neg = harmonic(r.precision_neg, r.recall_neg, "f_neg");
  return r;
}

struct RocPoint {
  double fpr = 0, tpr = 0;
  double threshold = 0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0;
};

/// Threshold sweep over the distinct score values, descending; rows that
/// share a score move in one step, which makes the trapezoidal area equal
/// to the pairwise concordance probability with half credit for ties.
inline RocCurve roc_auc(const std::vector<double>& scores,
                        const std::vector<int>& truth, int positive) {
  if (scores.size() != truth.size())
    fail(ErrorKind::Usage, "scores and truth lengths differ");
  if (scores.empty()) fail(ErrorKind::Usage, "nothing to evaluate");
  for (double s : scores)
    if (!std::isfinite(s)) fail(ErrorKind::Usage, "non-finite score");

  long long pos = 0, neg = 0;
  for (int t : truth) (t == positive ? pos : neg) += 1;
  if (pos == 0 || neg == 0)
    fail(ErrorKind::Usage, "ROC needs both classes in the truth labels");

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  long long tp = 0, fp = 0;
  double area = 0, prev_fpr = 0, prev_tpr = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    double threshold = scores[order[i]];
    // consume the whole tie group before emitting a point
    while (i < order.size() && scores[order[i]] == threshold) {
      (truth[order[i]] == positive ? tp : fp) += 1;
      ++i;
    }
    double tpr = static_cast<double>(tp) / static_cast<double>(pos);
    double fpr = static_cast<double>(fp) / static_cast<double>(neg);
    area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    curve.points.push_back({fpr, tpr, threshold});
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  curve.auc = area;
  return curve;
}

/// Summary row for the final report: one classifier trained on one
/// selection, evaluated on the held-out split.
struct EvalRow {
  std::string method;  // e.g. "ccr-knn" or "pearson-svm"
  int n_selected = 0;
  MetricReport report;
};

inline void write_eval_csv(const std::vector<EvalRow>& rows, const std::string& path) {
  csv::Writer out(path);
  out.row({"method", "n_selected", "accuracy", "recall_pos", "recall_neg",
           "precision_pos", "precision_neg", "f_pos", "f_neg", "auc"});
  for (const auto& row : rows)
    out.row({row.method, csv::format(static_cast<long long>(row.n_selected)),
             csv::format(row.report.accuracy), csv::format(row.report.recall_pos),
             csv::format(row.report.recall_neg), csv::format(row.report.precision_pos),
             csv::format(row.report.precision_neg), csv::format(row.report.f_pos),
             csv::format(row.report.f_neg), csv::format(row.report.auc)});
}

inline void write_roc_csv(const RocCurve& curve, const std::string& path) {
  csv::Writer out(path);
  out.row({"fpr", "tpr", "threshold"});
  for (const auto& p : curve.points)
    out.row({csv::format(p.fpr), csv::format(p.tpr), csv::format(p.threshold)});
}

}  // namespace deasel
