#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "deasel/classifiers.hpp"
#include "deasel/config.hpp"
#include "deasel/dataset.hpp"
#include "deasel/dea.hpp"
#include "deasel/error.hpp"
#include "deasel/evaluation.hpp"
#include "deasel/model_io.hpp"
#include "deasel/selection.hpp"
#include "deasel/signal_metrics.hpp"
#include "deasel/synth.hpp"

namespace deasel {

inline CharacterizeOptions characterize_options(const PipelineConfig& cfg) {
  CharacterizeOptions opts;
  opts.denoise.levels = cfg.denoise_levels;
  opts.trend_mode = cfg.trend_mode;
  opts.max_lag = static_cast<int>(cfg.trend_max_lag);
  opts.cap_detectability = cfg.cap_detectability;
  opts.detectability_ceiling = cfg.detectability_ceiling;
  return opts;
}

inline DeaOptions dea_options(const PipelineConfig& cfg) {
  DeaOptions opts;
  opts.eps = cfg.dea_eps;
  opts.normalize_additive = cfg.normalize_additive;
  return opts;
}

inline std::string efficiency_file(DeaModel m) {
  return std::string("efficiency_") + model_name(m) + ".csv";
}
inline std::string selection_file(DeaModel m) {
  return std::string("selection_") + model_name(m) + ".json";
}
inline std::string model_file(DeaModel m, ClassifierKind c) {
  return std::string("model_") + model_name(m) + "_" + classifier_name(c) + ".json";
}
inline std::string roc_file(const std::string& method) {
  std::string name = method;
  for (char& ch : name)
    if (ch == '-') ch = '_';
  return "roc_" + name + ".csv";
}

inline std::string out_path(const PipelineConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

inline void ensure_out_dir(const PipelineConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) fail(ErrorKind::Usage, "cannot create output directory " + cfg.out_dir);
}

// ---------------------------------------------------------------------------
// stages

inline SynthResult run_synth(const PipelineConfig& cfg, std::ostream* log = nullptr) {
  cfg.validate();
  auto spec = two_group_spec(cfg.synth_good, cfg.synth_channels - cfg.synth_good,
                             cfg.synth_samples, cfg.synth_seed);
  spec.positive_code = cfg.positive_code;
  auto result = generate(spec);
  ensure_out_dir(cfg);
  write_signals(result.dataset, out_path(cfg, "signals.csv"));
  write_costs(result.costs, out_path(cfg, "costs.csv"));
  if (log)
    *log << "synth: wrote " << result.dataset.channels.size() << " channels x "
         << result.dataset.states.size() << " states x " << cfg.synth_samples
         << " samples to " << cfg.out_dir << "\n";
  return result;
}

inline JoinedDataset load_joined(const PipelineConfig& cfg) {
  auto ds = load_signals(cfg.signals_path, {}, cfg.positive_code);
  auto costs = load_costs(cfg.costs_path);
  return join(ds, costs);
}

inline CharacterizeResult run_characterize(const PipelineConfig& cfg,
                                           std::ostream* log = nullptr) {
  cfg.validate();
  auto joined = load_joined(cfg);
  auto result = characterize(joined, characterize_options(cfg));
  if (result.metrics.empty())
    fail(ErrorKind::Data, "no channel produced a full metric set");
  ensure_out_dir(cfg);
  write_metrics_csv(result, joined.total_cost, out_path(cfg, "metrics.csv"));
  if (log) {
    *log << "characterize: " << result.metrics.size() << " channels -> "
         << out_path(cfg, "metrics.csv") << "\n";
    for (const auto& issue : result.flagged)
      *log << "characterize: dropped " << issue.key.str() << ": " << issue.message
           << "\n";
  }
  return result;
}

struct DeaStageOutcome {
  std::map<std::string, SelectionResult> selections;  // keyed by model name
  std::vector<std::pair<std::string, std::string>> failures;  // model, message
  ShiftReport shifts;
};

inline DeaStageOutcome run_dea(const PipelineConfig& cfg, std::ostream* log = nullptr) {
  cfg.validate();
  auto table = read_metrics_csv(out_path(cfg, "metrics.csv"));
  DeaStageOutcome outcome;
  auto dmus = assemble_dmus(table.metrics, table.total_cost, &outcome.shifts);
  ensure_out_dir(cfg);
  for (DeaModel m : cfg.models()) {
    try {
      auto results = score_all(dmus, m, dea_options(cfg));
      write_efficiency_csv(results, out_path(cfg, efficiency_file(m)));
      auto sel = select_by_efficiency(results, cfg.dea_threshold);
      write_selection_json(sel, out_path(cfg, selection_file(m)));
      if (log)
        *log << "dea: " << model_name(m) << " selected " << sel.selected.size()
             << " of " << dmus.size() << "\n";
      outcome.selections[model_name(m)] = std::move(sel);
    } catch (const Error& e) {
      outcome.failures.emplace_back(model_name(m), e.what());
      if (log) *log << "dea: " << model_name(m) << " failed: " << e.what() << "\n";
    }
  }
  if (outcome.selections.empty())
    fail(ErrorKind::Model,
         "every DEA model failed; first error: " + outcome.failures.front().second);
  return outcome;
}

inline void run_select(const PipelineConfig& cfg, std::ostream* log = nullptr) {
  cfg.validate();
  for (DeaModel m : cfg.models()) {
    auto results = read_efficiency_csv(out_path(cfg, efficiency_file(m)));
    auto sel = select_by_efficiency(results, cfg.dea_threshold);
    write_selection_json(sel, out_path(cfg, selection_file(m)));
    if (log)
      *log << "select: " << model_name(m) << " kept " << sel.selected.size() << " of "
           << results.size() << " at threshold " << cfg.dea_threshold << "\n";
  }
}

// ---------------------------------------------------------------------------
// train/test protocol: stratified half split, tuning on the train half only

struct SplitIndices {
  std::vector<std::size_t> train, test;
};

inline SplitIndices stratified_half_split(const std::vector<int>& labels, int positive,
                                          std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] == positive ? pos : neg).push_back(i);
  if (pos.size() < 2 || neg.size() < 2)
    fail(ErrorKind::Split, "each class needs at least 2 rows to split in half");
  Rng gen(seed);
  shuffle(pos, gen);
  shuffle(neg, gen);
  SplitIndices split;
  auto deal = [&](const std::vector<std::size_t>& idx) {
    std::size_t n_train = (idx.size() + 1) / 2;
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < n_train ? split.train : split.test).push_back(idx[i]);
  };
  deal(pos);
  deal(neg);
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

inline FeatureMatrix subset_rows(const FeatureMatrix& fm,
                                 const std::vector<std::size_t>& idx) {
  FeatureMatrix out;
  out.positive = fm.positive;
  out.negative = fm.negative;
  out.columns = fm.columns;
  out.rows.reserve(idx.size());
  for (std::size_t i : idx) {
    out.rows.push_back(fm.rows[i]);
    out.labels.push_back(fm.labels[i]);
  }
  return out;
}

inline const std::vector<double>& grid_for(const PipelineConfig& cfg,
                                           ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::Knn: return cfg.knn_grid;
    case ClassifierKind::Svm: return cfg.svm_grid;
    case ClassifierKind::Gnb: return default_grid(ClassifierKind::Gnb);
  }
  fail(ErrorKind::Internal, "unreachable classifier kind");
}

struct PairOutcome {
  EvalRow row;
  RocCurve roc;
  CvReport cv;
  TrainedClassifier trained;
  double training_seconds = 0;
};

/// One (selection, classifier) evaluation: split, cross-validate on the
/// train half, refit, score the held-out half.
inline PairOutcome run_pair(const SignalDataset& ds, const SelectionResult& sel,
                            ClassifierKind kind, const PipelineConfig& cfg) {
  if (sel.selected.empty())
    fail(ErrorKind::Model, "selection for " + sel.model + " kept no channels");
  auto fm = build_features(ds, sel.selected);
  auto split = stratified_half_split(fm.labels, fm.positive, cfg.split_seed);
  auto train_fm = subset_rows(fm, split.train);
  auto test_fm = subset_rows(fm, split.test);

  auto t0 = std::chrono::steady_clock::now();
  PairOutcome out;
  out.cv = cross_validate(train_fm, kind, grid_for(cfg, kind), cfg.split_seed,
                          cfg.svm_epochs);
  out.trained = train_classifier(train_fm, kind, out.cv.chosen, cfg.svm_epochs);
  out.training_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  auto pred = out.trained.predict(test_fm.rows);
  auto cm = confusion(test_fm.labels, pred.labels, fm.positive);
  out.row.method = sel.model + "-" + classifier_name(kind);
  out.row.n_selected = static_cast<int>(sel.selected.size());
  out.row.report = metrics(cm);
  out.roc = roc_auc(pred.scores, test_fm.labels, fm.positive);
  out.row.report.auc = out.roc.auc;
  return out;
}

inline void run_train(const PipelineConfig& cfg, std::ostream* log = nullptr) {
  cfg.validate();
  auto ds = load_signals(cfg.signals_path, {}, cfg.positive_code);
  ensure_out_dir(cfg);
  for (DeaModel m : cfg.models()) {
    auto sel = read_selection_json(out_path(cfg, selection_file(m)));
    for (ClassifierKind kind : cfg.classifiers()) {
      auto outcome = run_pair(ds, sel, kind, cfg);
      ModelBundle bundle;
      bundle.classifier = std::move(outcome.trained);
      bundle.cv = std::move(outcome.cv);
      bundle.training_seconds = outcome.training_seconds;
      save_model(bundle, out_path(cfg, model_file(m, kind)));
      if (log)
        *log << "train: " << outcome.row.method << " chose "
             << csv::format(bundle.cv.chosen) << " (cv accuracy "
             << csv::format(bundle.cv.best_accuracy) << ")\n";
    }
  }
}

inline std::vector<EvalRow> run_evaluate(const PipelineConfig& cfg,
                                         std::ostream* log = nullptr) {
  cfg.validate();
  auto ds = load_signals(cfg.signals_path, {}, cfg.positive_code);
  std::vector<EvalRow> rows;
  for (DeaModel m : cfg.models()) {
    auto sel = read_selection_json(out_path(cfg, selection_file(m)));
    if (sel.selected.empty())
      fail(ErrorKind::Model, "selection for " + sel.model + " kept no channels");
    auto fm = build_features(ds, sel.selected);
    auto split = stratified_half_split(fm.labels, fm.positive, cfg.split_seed);
    auto test_fm = subset_rows(fm, split.test);
    for (ClassifierKind kind : cfg.classifiers()) {
      auto bundle = load_model(out_path(cfg, model_file(m, kind)));
      if (bundle.classifier.kind != kind)
        fail(ErrorKind::Schema, out_path(cfg, model_file(m, kind)) +
                                    ": stored kind does not match its filename");
      auto pred = bundle.classifier.predict(test_fm.rows);
      auto cm = confusion(test_fm.labels, pred.labels, fm.positive);
      EvalRow row;
      row.method = sel.model + "-" + std::string(classifier_name(kind));
      row.n_selected = static_cast<int>(sel.selected.size());
      row.report = metrics(cm);
      auto roc = roc_auc(pred.scores, test_fm.labels, fm.positive);
      row.report.auc = roc.auc;
      write_roc_csv(roc, out_path(cfg, roc_file(row.method)));
      rows.push_back(row);
      if (log)
        *log << "evaluate: " << row.method << " accuracy "
             << csv::format(row.report.accuracy) << " auc "
             << csv::format(row.report.auc) << "\n";
    }
  }
  write_eval_csv(rows, out_path(cfg, "evaluation.csv"));
  return rows;
}

// ---------------------------------------------------------------------------
// end-to-end run

struct PipelineReport {
  std::size_t n_channels = 0;
  std::vector<ChannelIssue> flagged;
  ShiftReport shifts;
  struct ModelEntry {
    std::string model;
    std::string status;  // ok | error
    std::string message;
    int n_selected = 0;
  };
  std::vector<ModelEntry> models;
  struct PairEntry {
    std::string method;
    std::string status;  // ok | error | skipped
    std::string message;
  };
  std::vector<PairEntry> pairs;
  std::vector<EvalRow> rows;
  int exit_code = 0;
};

inline void write_pipeline_report(const PipelineReport& rep, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["n_channels"] = rep.n_channels;
  auto flagged = nlohmann::ordered_json::array();
  for (const auto& issue : rep.flagged)
    flagged.push_back({{"channel", issue.key.str()}, {"message", issue.message}});
  doc["flagged_channels"] = std::move(flagged);
  auto shifts = nlohmann::ordered_json::array();
  for (const auto& entry : rep.shifts.entries)
    shifts.push_back({{"column", entry.column}, {"delta", entry.delta}});
  doc["positivity_shifts"] = std::move(shifts);
  auto models = nlohmann::ordered_json::array();
  for (const auto& m : rep.models)
    models.push_back({{"model", m.model},
                      {"status", m.status},
                      {"message", m.message},
                      {"n_selected", m.n_selected}});
  doc["models"] = std::move(models);
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& p : rep.pairs)
    pairs.push_back(
        {{"method", p.method}, {"status", p.status}, {"message", p.message}});
  doc["pairs"] = std::move(pairs);
  doc["exit_code"] = rep.exit_code;
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Usage, "cannot write " + path);
  out << doc.dump(2) << "\n";
}

/// The full chain: characterize, score, select, then train and score every
/// (model x classifier) pair. A pair failure is recorded and the remaining
/// pairs continue; the exit code turns 1 if anything failed.
inline PipelineReport run_pipeline(const PipelineConfig& cfg,
                                   std::ostream* log = nullptr) {
  cfg.validate();
  ensure_out_dir(cfg);
  auto joined = load_joined(cfg);
  auto characterized = characterize(joined, characterize_options(cfg));
  if (characterized.metrics.empty())
    fail(ErrorKind::Data, "no channel produced a full metric set");
  write_metrics_csv(characterized, joined.total_cost, out_path(cfg, "metrics.csv"));

  PipelineReport rep;
  rep.n_channels = joined.dataset.channels.size();
  rep.flagged = characterized.flagged;
  auto dmus = assemble_dmus(characterized.metrics, joined.total_cost, &rep.shifts);

  for (DeaModel m : cfg.models()) {
    SelectionResult sel;
    try {
      auto results = score_all(dmus, m, dea_options(cfg));
      write_efficiency_csv(results, out_path(cfg, efficiency_file(m)));
      sel = select_by_efficiency(results, cfg.dea_threshold);
      write_selection_json(sel, out_path(cfg, selection_file(m)));
      rep.models.push_back(
          {model_name(m), "ok", "", static_cast<int>(sel.selected.size())});
      if (log)
        *log << "pipeline: " << model_name(m) << " selected " << sel.selected.size()
             << " of " << dmus.size() << "\n";
    } catch (const Error& e) {
      rep.models.push_back({model_name(m), "error", e.what(), 0});
      rep.exit_code = 1;
      for (ClassifierKind kind : cfg.classifiers())
        rep.pairs.push_back(
            {std::string(model_name(m)) + "-" + classifier_name(kind), "skipped",
             "selection stage failed"});
      if (log) *log << "pipeline: " << model_name(m) << " failed: " << e.what() << "\n";
      continue;
    }
    for (ClassifierKind kind : cfg.classifiers()) {
      std::string method = sel.model + "-" + classifier_name(kind);
      try {
        auto outcome = run_pair(joined.dataset, sel, kind, cfg);
        write_roc_csv(outcome.roc, out_path(cfg, roc_file(method)));
        rep.rows.push_back(outcome.row);
        rep.pairs.push_back({method, "ok", ""});
        if (log)
          *log << "pipeline: " << method << " accuracy "
               << csv::format(outcome.row.report.accuracy) << " auc "
               << csv::format(outcome.row.report.auc) << "\n";
      } catch (const Error& e) {
        rep.pairs.push_back({method, "error", e.what()});
        rep.exit_code = 1;
        if (log) *log << "pipeline: " << method << " failed: " << e.what() << "\n";
      }
    }
  }
  write_eval_csv(rep.rows, out_path(cfg, "evaluation.csv"));
  write_pipeline_report(rep, out_path(cfg, "pipeline_report.json"));
  return rep;
}

}  // namespace deasel
