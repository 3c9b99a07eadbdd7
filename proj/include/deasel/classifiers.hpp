#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "deasel/dataset.hpp"
#include "deasel/error.hpp"
#include "deasel/rng.hpp"

namespace deasel {

enum class ClassifierKind { Knn, Gnb, Svm };

inline const char* classifier_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::Knn: return "knn";
    case ClassifierKind::Gnb: return "gnb";
    case ClassifierKind::Svm: return "svm";
  }
  return "?";
}

inline ClassifierKind parse_classifier(const std::string& name) {
  if (name == "knn") return ClassifierKind::Knn;
  if (name == "gnb") return ClassifierKind::Gnb;
  if (name == "svm") return ClassifierKind::Svm;
  fail(ErrorKind::Usage,
       "unknown classifier '" + name + "' (expected knn, gnb or svm)");
}

/// Observations are aligned sample indices; features are the selected
/// channels' values at that index, one state after another.
struct FeatureMatrix {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;  // state code per row
  int positive = 1;
  int negative = 2;
  std::vector<ChannelKey> columns;

  std::size_t width() const { return columns.size(); }
};

inline FeatureMatrix build_features(const SignalDataset& ds,
                                    const std::vector<ChannelKey>& channels) {
  if (channels.empty()) fail(ErrorKind::Usage, "empty channel selection");
  if (ds.states.size() != 2)
    fail(ErrorKind::Usage, "classification needs a binary-labeled dataset, got " +
                               std::to_string(ds.states.size()) + " states");
  FeatureMatrix fm;
  fm.positive = ds.positive_code;
  for (const auto& st : ds.states)
    if (st.code != ds.positive_code) fm.negative = st.code;
  fm.columns = channels;

  std::vector<const ChannelSeries*> series;
  for (const auto& key : channels) {
    const ChannelSeries* ch = ds.find(key);
    if (!ch) fail(ErrorKind::Join, "selected channel " + key.str() + " not in dataset");
    series.push_back(ch);
  }
  for (const auto& st : ds.states) {
    for (std::size_t t = 0; t < ds.samples_per_state; ++t) {
      std::vector<double> row;
      row.reserve(series.size());
      for (const ChannelSeries* ch : series)
        row.push_back(ch->per_state_samples.at(st.code)[t]);
      fm.rows.push_back(std::move(row));
      fm.labels.push_back(st.code);
    }
  }
  return fm;
}

/// Column-wise z-scoring fit on training data only. Columns without
/// variance keep scale 1 so they pass through centered.
struct Standardizer {
  std::vector<double> mean, scale;

  static Standardizer fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) fail(ErrorKind::Training, "cannot standardize an empty set");
    std::size_t cols = rows[0].size();
    Standardizer st;
    st.mean.assign(cols, 0.0);
    st.scale.assign(cols, 1.0);
    for (const auto& row : rows)
      for (std::size_t c = 0; c < cols; ++c) st.mean[c] += row[c];
    for (double& m : st.mean) m /= static_cast<double>(rows.size());
    if (rows.size() < 2) return st;
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0;
      for (const auto& row : rows)
        acc += (row[c] - st.mean[c]) * (row[c] - st.mean[c]);
      double var = acc / static_cast<double>(rows.size() - 1);
      if (var > 0) st.scale[c] = std::sqrt(var);
    }
    return st;
  }

  std::vector<double> apply_row(const std::vector<double>& row) const {
    if (row.size() != mean.size())
      fail(ErrorKind::Usage, "feature width mismatch: got " +
                                 std::to_string(row.size()) + ", expected " +
                                 std::to_string(mean.size()));
    std::vector<double> out(row.size());
    for (std::size_t c = 0; c < row.size(); ++c)
      out[c] = (row[c] - mean[c]) / scale[c];
    return out;
  }

  std::vector<std::vector<double>> apply(
      const std::vector<std::vector<double>>& rows) const {
    std::vector<std::vector<double>> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(apply_row(row));
    return out;
  }
};

struct Prediction {
  std::vector<int> labels;
  std::vector<double> scores;  // positive-class score per row
};

namespace detail {

inline void check_training_data(const FeatureMatrix& fm) {
  if (fm.rows.empty()) fail(ErrorKind::Training, "no training rows");
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < fm.rows.size(); ++i) {
    if (fm.rows[i].size() != fm.width())
      fail(ErrorKind::Training, "ragged feature rows");
    for (double v : fm.rows[i])
      if (!std::isfinite(v)) fail(ErrorKind::Training, "non-finite feature value");
    (fm.labels[i] == fm.positive ? pos : neg) = true;
  }
  if (fm.labels.size() != fm.rows.size())
    fail(ErrorKind::Training, "label count does not match row count");
  if (!pos || !neg)
    fail(ErrorKind::Training, "training data must contain both classes");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// k-nearest neighbours

struct KnnModel {
  int k = 1;
  int positive = 1, negative = 2;
  Standardizer standardizer;
  std::vector<std::vector<double>> train_rows;  // standardized
  std::vector<int> train_labels;
};

inline KnnModel knn_train(const FeatureMatrix& fm, int k) {
  detail::check_training_data(fm);
  if (k < 1 || static_cast<std::size_t>(k) > fm.rows.size())
    fail(ErrorKind::Parameter, "k must be in [1, " + std::to_string(fm.rows.size()) +
                                   "], got " + std::to_string(k));
  KnnModel model;
  model.k = k;
  model.positive = fm.positive;
  model.negative = fm.negative;
  model.standardizer = Standardizer::fit(fm.rows);
  model.train_rows = model.standardizer.apply(fm.rows);
  model.train_labels = fm.labels;
  return model;
}

/// Majority vote over the k nearest training rows (Euclidean distance on
/// standardized features, distance ties broken by training index). The
/// score is the positive-neighbour fraction; an even split votes positive.
inline Prediction knn_predict(const KnnModel& model,
                              const std::vector<std::vector<double>>& rows) {
  Prediction pred;
  std::vector<std::pair<double, std::size_t>> dist(model.train_rows.size());
  for (const auto& raw : rows) {
    auto q = model.standardizer.apply_row(raw);
    for (std::size_t i = 0; i < model.train_rows.size(); ++i) {
      double d = 0;
      const auto& t = model.train_rows[i];
      for (std::size_t c = 0; c < q.size(); ++c) d += (q[c] - t[c]) * (q[c] - t[c]);
      dist[i] = {d, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + model.k, dist.end());
    int pos = 0;
    for (int i = 0; i < model.k; ++i)
      if (model.train_labels[dist[i].second] == model.positive) ++pos;
    double score = static_cast<double>(pos) / static_cast<double>(model.k);
    pred.scores.push_back(score);
    pred.labels.push_back(score >= 0.5 ? model.positive : model.negative);
  }
  return pred;
}

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

struct GnbModel {
  int positive = 1, negative = 2;
  double log_prior_pos = 0, log_prior_neg = 0;
  std::vector<double> mean_pos, var_pos, mean_neg, var_neg;
  Standardizer standardizer;
};

inline GnbModel gnb_train(const FeatureMatrix& fm) {
  detail::check_training_data(fm);
  GnbModel model;
  model.positive = fm.positive;
  model.negative = fm.negative;
  model.standardizer = Standardizer::fit(fm.rows);
  auto rows = model.standardizer.apply(fm.rows);
  std::size_t cols = fm.width();

  auto fit_class = [&](int code, std::vector<double>& mean, std::vector<double>& var) {
    mean.assign(cols, 0.0);
    var.assign(cols, 0.0);
    std::size_t n = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (fm.labels[i] != code) continue;
      ++n;
      for (std::size_t c = 0; c < cols; ++c) mean[c] += rows[i][c];
    }
    if (n < 2)
      fail(ErrorKind::Training, "class " + std::to_string(code) +
                                    " needs at least 2 rows, got " + std::to_string(n));
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (fm.labels[i] != code) continue;
      for (std::size_t c = 0; c < cols; ++c)
        var[c] += (rows[i][c] - mean[c]) * (rows[i][c] - mean[c]);
    }
    for (double& v : var) v /= static_cast<double>(n);
    return n;
  };
  std::size_t n_pos = fit_class(model.positive, model.mean_pos, model.var_pos);
  std::size_t n_neg = fit_class(model.negative, model.mean_neg, model.var_neg);
  double total = static_cast<double>(n_pos + n_neg);
  model.log_prior_pos = std::log(static_cast<double>(n_pos) / total);
  model.log_prior_neg = std::log(static_cast<double>(n_neg) / total);

  // smoothing keeps zero-variance features finite: a fraction of the
  // largest overall feature variance, with an absolute floor for fully
  // constant data
  double max_var = 0;
  for (std::size_t c = 0; c < cols; ++c) {
    double mean = 0;
    for (const auto& row : rows) mean += row[c];
    mean /= static_cast<double>(rows.size());
    double acc = 0;
    for (const auto& row : rows) acc += (row[c] - mean) * (row[c] - mean);
    max_var = std::max(max_var, acc / static_cast<double>(rows.size()));
  }
  double smoothing = std::max(1e-9 * max_var, 1e-12);
  for (double& v : model.var_pos) v += smoothing;
  for (double& v : model.var_neg) v += smoothing;
  return model;
}

/// Positive and negative posteriors for one raw feature row; the pair sums
/// to 1 up to rounding.
inline std::pair<double, double> gnb_posteriors(const GnbModel& model,
                                                const std::vector<double>& raw) {
  auto row = model.standardizer.apply_row(raw);
  auto log_joint = [&](const std::vector<double>& mean, const std::vector<double>& var,
                       double log_prior) {
    double lp = log_prior;
    for (std::size_t c = 0; c < row.size(); ++c) {
      double d = row[c] - mean[c];
      lp += -0.5 * std::log(2.0 * std::numbers::pi * var[c]) - d * d / (2.0 * var[c]);
    }
    return lp;
  };
  double lp = log_joint(model.mean_pos, model.var_pos, model.log_prior_pos);
  double ln = log_joint(model.mean_neg, model.var_neg, model.log_prior_neg);
  double p_pos = 1.0 / (1.0 + std::exp(ln - lp));
  double p_neg = 1.0 / (1.0 + std::exp(lp - ln));
  return {p_pos, p_neg};
}

inline Prediction gnb_predict(const GnbModel& model,
                              const std::vector<std::vector<double>>& rows) {
  Prediction pred;
  for (const auto& row : rows) {
    auto [p_pos, p_neg] = gnb_posteriors(model, row);
    pred.scores.push_back(p_pos);
    // posterior ties go to the positive class
    pred.labels.push_back(p_pos >= p_neg ? model.positive : model.negative);
  }
  return pred;
}

// ---------------------------------------------------------------------------
// linear SVM trained by subgradient descent on the hinge loss

struct SvmModel {
  std::vector<double> w;
  double b = 0;
  int positive = 1, negative = 2;
  Standardizer standardizer;
  double c_reg = 1.0;
  int epochs = 0;
  std::vector<double> epoch_objectives;  // averaged-iterate objective per epoch
};

namespace detail {

// fixed permutation stream: training must not depend on ambient state
inline constexpr std::uint64_t kSvmShuffleSeed = 0x53564d; // 'S','V','M'

inline double svm_objective(const std::vector<std::vector<double>>& rows,
                            const std::vector<double>& y, const std::vector<double>& w,
                            double b, double lambda) {
  double hinge = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double margin = b;
    for (std::size_t c = 0; c < w.size(); ++c) margin += w[c] * rows[i][c];
    hinge += std::max(0.0, 1.0 - y[i] * margin);
  }
  double norm = 0;
  for (double v : w) norm += v * v;
  return 0.5 * lambda * norm + hinge / static_cast<double>(rows.size());
}

}  // namespace detail

/// Epoch-ordered Pegasos-style updates with a fixed shuffle seed; the
/// returned weights are the average over all update steps, which is what
/// makes the per-epoch objective trace settle monotonically.
inline SvmModel svm_train(const FeatureMatrix& fm, double c_reg, int epochs = 200) {
  detail::check_training_data(fm);
  if (!(c_reg > 0)) fail(ErrorKind::Parameter, "regularization C must be positive");
  if (epochs < 1) fail(ErrorKind::Parameter, "epochs must be >= 1");

  SvmModel model;
  model.positive = fm.positive;
  model.negative = fm.negative;
  model.c_reg = c_reg;
  model.epochs = epochs;
  model.standardizer = Standardizer::fit(fm.rows);
  auto rows = model.standardizer.apply(fm.rows);
  std::size_t n = rows.size(), cols = fm.width();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i)
    y[i] = fm.labels[i] == fm.positive ? 1.0 : -1.0;

  double lambda = 1.0 / (c_reg * static_cast<double>(n));
  std::vector<double> w(cols, 0.0), w_sum(cols, 0.0);
  double b = 0, b_sum = 0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng perm(detail::kSvmShuffleSeed);

  long long t = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    shuffle(order, perm);
    for (std::size_t idx : order) {
      ++t;
      double eta = 1.0 / (lambda * static_cast<double>(t));
      double margin = b;
      for (std::size_t c = 0; c < cols; ++c) margin += w[c] * rows[idx][c];
      double decay = 1.0 - eta * lambda;
      if (y[idx] * margin < 1.0) {
        for (std::size_t c = 0; c < cols; ++c)
          w[c] = decay * w[c] + eta * y[idx] * rows[idx][c];
        b += eta * y[idx];  // bias stays unregularized
      } else {
        for (std::size_t c = 0; c < cols; ++c) w[c] = decay * w[c];
      }
      for (std::size_t c = 0; c < cols; ++c) w_sum[c] += w[c];
      b_sum += b;
    }
    std::vector<double> w_avg(cols);
    double steps = static_cast<double>(t);
    for (std::size_t c = 0; c < cols; ++c) w_avg[c] = w_sum[c] / steps;
    model.epoch_objectives.push_back(
        detail::svm_objective(rows, y, w_avg, b_sum / steps, lambda));
  }

  double steps = static_cast<double>(t);
  model.w.assign(cols, 0.0);
  for (std::size_t c = 0; c < cols; ++c) model.w[c] = w_sum[c] / steps;
  model.b = b_sum / steps;
  for (double v : model.w)
    if (!std::isfinite(v)) fail(ErrorKind::Training, "SVM weights diverged");
  return model;
}

inline Prediction svm_predict(const SvmModel& model,
                              const std::vector<std::vector<double>>& rows) {
  Prediction pred;
  for (const auto& raw : rows) {
    auto row = model.standardizer.apply_row(raw);
    double margin = model.b;
    for (std::size_t c = 0; c < row.size(); ++c) margin += model.w[c] * row[c];
    pred.scores.push_back(margin);
    // zero margin counts as positive
    pred.labels.push_back(margin >= 0 ? model.positive : model.negative);
  }
  return pred;
}

// ---------------------------------------------------------------------------
// unified handle + cross-validated tuning

struct TrainedClassifier {
  ClassifierKind kind = ClassifierKind::Knn;
  std::variant<KnnModel, GnbModel, SvmModel> model;

  Prediction predict(const std::vector<std::vector<double>>& rows) const {
    switch (kind) {
      case ClassifierKind::Knn: return knn_predict(std::get<KnnModel>(model), rows);
      case ClassifierKind::Gnb: return gnb_predict(std::get<GnbModel>(model), rows);
      case ClassifierKind::Svm: return svm_predict(std::get<SvmModel>(model), rows);
    }
    fail(ErrorKind::Internal, "unreachable classifier kind");
  }
};

inline const std::vector<double>& default_grid(ClassifierKind kind) {
  static const std::vector<double> knn = {1, 3, 5, 7, 9};
  static const std::vector<double> svm = {0.1, 1, 10};
  static const std::vector<double> gnb = {0};  // no tunable parameter
  switch (kind) {
    case ClassifierKind::Knn: return knn;
    case ClassifierKind::Svm: return svm;
    case ClassifierKind::Gnb: return gnb;
  }
  fail(ErrorKind::Internal, "unreachable classifier kind");
}

inline constexpr int kSvmDefaultEpochs = 200;

inline TrainedClassifier train_classifier(const FeatureMatrix& fm, ClassifierKind kind,
                                          double param, int svm_epochs = kSvmDefaultEpochs) {
  TrainedClassifier tc;
  tc.kind = kind;
  switch (kind) {
    case ClassifierKind::Knn:
      tc.model = knn_train(fm, static_cast<int>(param));
      break;
    case ClassifierKind::Gnb:
      tc.model = gnb_train(fm);
      break;
    case ClassifierKind::Svm:
      tc.model = svm_train(fm, param, svm_epochs);
      break;
  }
  return tc;
}

struct CvReport {
  ClassifierKind kind = ClassifierKind::Knn;
  std::vector<std::pair<double, double>> table;  // candidate, mean accuracy
  double chosen = 0;
  double best_accuracy = 0;
};

namespace detail {

// stratified fold ids: shuffle each class separately, deal round-robin
inline std::vector<int> stratified_folds(const std::vector<int>& labels, int positive,
                                         int folds, std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] == positive ? pos : neg).push_back(i);
  if (pos.size() < static_cast<std::size_t>(folds) ||
      neg.size() < static_cast<std::size_t>(folds))
    fail(ErrorKind::Split, "each class needs at least " + std::to_string(folds) +
                               " rows for " + std::to_string(folds) + "-fold splits");
  Rng gen(seed);
  shuffle(pos, gen);
  shuffle(neg, gen);
  std::vector<int> fold(labels.size(), 0);
  for (std::size_t i = 0; i < pos.size(); ++i) fold[pos[i]] = static_cast<int>(i % folds);
  for (std::size_t i = 0; i < neg.size(); ++i) fold[neg[i]] = static_cast<int>(i % folds);
  return fold;
}

}  // namespace detail

/// Pick the grid value with the best mean validation accuracy over a
/// stratified 5-fold split; ties go to the smallest candidate.
inline CvReport cross_validate(const FeatureMatrix& fm, ClassifierKind kind,
                               std::vector<double> grid, std::uint64_t seed,
                               int svm_epochs = kSvmDefaultEpochs) {
  detail::check_training_data(fm);
  if (grid.empty()) grid = default_grid(kind);
  std::sort(grid.begin(), grid.end());
  constexpr int kFolds = 5;
  auto fold = detail::stratified_folds(fm.labels, fm.positive, kFolds, seed);

  CvReport report;
  report.kind = kind;
  for (double candidate : grid) {
    double accuracy_sum = 0;
    for (int f = 0; f < kFolds; ++f) {
      FeatureMatrix train, val;
      train.positive = val.positive = fm.positive;
      train.negative = val.negative = fm.negative;
      train.columns = val.columns = fm.columns;
      for (std::size_t i = 0; i < fm.rows.size(); ++i) {
        auto& part = fold[i] == f ? val : train;
        part.rows.push_back(fm.rows[i]);
        part.labels.push_back(fm.labels[i]);
      }
      auto tc = train_classifier(train, kind, candidate, svm_epochs);
      auto pred = tc.predict(val.rows);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < val.labels.size(); ++i)
        if (pred.labels[i] == val.labels[i]) ++hits;
      accuracy_sum += static_cast<double>(hits) / static_cast<double>(val.labels.size());
    }
    double mean = accuracy_sum / kFolds;
    report.table.emplace_back(candidate, mean);
    if (report.table.size() == 1 || mean > report.best_accuracy) {
      report.best_accuracy = mean;
      report.chosen = candidate;  // grid is sorted, so ties keep the smallest
    }
  }
  return report;
}

}  // namespace deasel
