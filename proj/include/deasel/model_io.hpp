#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "deasel/classifiers.hpp"
#include "deasel/error.hpp"

namespace deasel {

/// Everything the `train` subcommand persists: the tuned model itself plus
/// the tuning context a later `evaluate` run needs to reproduce predictions.
struct ModelBundle {
  TrainedClassifier classifier;
  CvReport cv;
  double training_seconds = 0;
};

namespace detail {

using nlohmann::ordered_json;

inline ordered_json key_json(const ChannelKey& key) {
  return ordered_json{{"sensor_id", key.sensor_id}, {"load_pct", key.load_pct}};
}

inline ChannelKey key_from_json(const ordered_json& j) {
  if (!j.is_object() || !j.contains("sensor_id") || !j.contains("load_pct"))
    fail(ErrorKind::Schema, "channel entry must carry sensor_id and load_pct");
  return {j.at("sensor_id").get<std::string>(), j.at("load_pct").get<std::string>()};
}

inline ordered_json standardizer_json(const Standardizer& st) {
  return ordered_json{{"mean", st.mean}, {"scale", st.scale}};
}

inline Standardizer standardizer_from_json(const ordered_json& j) {
  Standardizer st;
  st.mean = j.at("mean").get<std::vector<double>>();
  st.scale = j.at("scale").get<std::vector<double>>();
  if (st.mean.size() != st.scale.size())
    fail(ErrorKind::Schema, "standardizer mean/scale length mismatch");
  return st;
}

}  // namespace detail

inline void save_model(const ModelBundle& bundle, const std::string& path) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["kind"] = classifier_name(bundle.classifier.kind);

  ordered_json cv = ordered_json::array();
  for (const auto& [candidate, accuracy] : bundle.cv.table)
    cv.push_back(ordered_json{{"candidate", candidate}, {"mean_accuracy", accuracy}});
  j["cv_table"] = std::move(cv);
  j["chosen"] = bundle.cv.chosen;
  j["best_accuracy"] = bundle.cv.best_accuracy;
  j["training_seconds"] = bundle.training_seconds;

  ordered_json params;
  switch (bundle.classifier.kind) {
    case ClassifierKind::Knn: {
      const auto& m = std::get<KnnModel>(bundle.classifier.model);
      j["hyperparameters"] = ordered_json{{"k", m.k}};
      params["positive"] = m.positive;
      params["negative"] = m.negative;
      params["standardizer"] = detail::standardizer_json(m.standardizer);
      params["train_rows"] = m.train_rows;
      params["train_labels"] = m.train_labels;
      break;
    }
    case ClassifierKind::Gnb: {
      const auto& m = std::get<GnbModel>(bundle.classifier.model);
      j["hyperparameters"] = ordered_json::object();
      params["positive"] = m.positive;
      params["negative"] = m.negative;
      params["log_prior_pos"] = m.log_prior_pos;
      params["log_prior_neg"] = m.log_prior_neg;
      params["mean_pos"] = m.mean_pos;
      params["var_pos"] = m.var_pos;
      params["mean_neg"] = m.mean_neg;
      params["var_neg"] = m.var_neg;
      params["standardizer"] = detail::standardizer_json(m.standardizer);
      break;
    }
    case ClassifierKind::Svm: {
      const auto& m = std::get<SvmModel>(bundle.classifier.model);
      j["hyperparameters"] = ordered_json{{"c_reg", m.c_reg}, {"epochs", m.epochs}};
      params["positive"] = m.positive;
      params["negative"] = m.negative;
      params["w"] = m.w;
      params["b"] = m.b;
      params["epoch_objectives"] = m.epoch_objectives;
      params["standardizer"] = detail::standardizer_json(m.standardizer);
      break;
    }
  }
  j["parameters"] = std::move(params);

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Data, "cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out) fail(ErrorKind::Data, "write failed for " + path);
}

inline ModelBundle load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Data, "cannot open model file " + path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Schema, path + ": invalid model JSON (" + e.what() + ")");
  }

  ModelBundle bundle;
  try {
    std::string kind = j.at("kind").get<std::string>();
    bundle.classifier.kind = parse_classifier(kind);
    bundle.cv.kind = bundle.classifier.kind;
    for (const auto& row : j.at("cv_table"))
      bundle.cv.table.emplace_back(row.at("candidate").get<double>(),
                                   row.at("mean_accuracy").get<double>());
    bundle.cv.chosen = j.at("chosen").get<double>();
    bundle.cv.best_accuracy = j.at("best_accuracy").get<double>();
    bundle.training_seconds = j.at("training_seconds").get<double>();

    const auto& params = j.at("parameters");
    switch (bundle.classifier.kind) {
      case ClassifierKind::Knn: {
        KnnModel m;
        m.k = j.at("hyperparameters").at("k").get<int>();
        m.positive = params.at("positive").get<int>();
        m.negative = params.at("negative").get<int>();
        m.standardizer = detail::standardizer_from_json(params.at("standardizer"));
        m.train_rows = params.at("train_rows").get<std::vector<std::vector<double>>>();
        m.train_labels = params.at("train_labels").get<std::vector<int>>();
        if (m.train_rows.size() != m.train_labels.size())
          fail(ErrorKind::Schema, "knn rows/labels length mismatch");
        bundle.classifier.model = std::move(m);
        break;
      }
      case ClassifierKind::Gnb: {
        GnbModel m;
        m.positive = params.at("positive").get<int>();
        m.negative = params.at("negative").get<int>();
        m.log_prior_pos = params.at("log_prior_pos").get<double>();
        m.log_prior_neg = params.at("log_prior_neg").get<double>();
        m.mean_pos = params.at("mean_pos").get<std::vector<double>>();
        m.var_pos = params.at("var_pos").get<std::vector<double>>();
        m.mean_neg = params.at("mean_neg").get<std::vector<double>>();
        m.var_neg = params.at("var_neg").get<std::vector<double>>();
        m.standardizer = detail::standardizer_from_json(params.at("standardizer"));
        bundle.classifier.model = std::move(m);
        break;
      }
      case ClassifierKind::Svm: {
        SvmModel m;
        m.c_reg = j.at("hyperparameters").at("c_reg").get<double>();
        m.epochs = j.at("hyperparameters").at("epochs").get<int>();
        m.positive = params.at("positive").get<int>();
        m.negative = params.at("negative").get<int>();
        m.w = params.at("w").get<std::vector<double>>();
        m.b = params.at("b").get<double>();
        m.epoch_objectives = params.at("epoch_objectives").get<std::vector<double>>();
        m.standardizer = detail::standardizer_from_json(params.at("standardizer"));
        bundle.classifier.model = std::move(m);
        break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Schema, path + ": model JSON missing fields (" + e.what() + ")");
  }
  return bundle;
}

}  // namespace deasel
