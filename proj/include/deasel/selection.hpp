#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "deasel/dataset.hpp"
#include "deasel/dea.hpp"
#include "deasel/error.hpp"
#include "deasel/signal_metrics.hpp"

namespace deasel {

struct SelectionResult {
  std::string model;  // a DEA model name or "pearson"
  double threshold = 0;
  std::vector<ChannelKey> selected;  // descending score, ties by id
  std::vector<ChannelKey> rejected;  // same ordering among the rest
  std::map<ChannelKey, double> scores;
};

/// Turn per-channel metrics and costs into DEA units: the five quality
/// indicators are outputs (higher is better), variance and total cost are
/// inputs (lower is better). The positivity shift runs here so callers
/// get solvable data; pass a report pointer to see what moved.
inline std::vector<DmuRecord> assemble_dmus(
    const std::map<ChannelKey, ChannelMetrics>& metrics,
    const std::map<ChannelKey, double>& total_cost, ShiftReport* shifts = nullptr) {
  std::vector<DmuRecord> dmus;
  for (const auto& [key, m] : metrics) {
    auto cost = total_cost.find(key);
    if (cost == total_cost.end())
      fail(ErrorKind::Join, "no total cost for channel " + key.str());
    DmuRecord d;
    d.id = key;
    d.outputs = {m.monotonicity, m.robustness, m.trendability, m.detectability,
                 m.rms};
    d.inputs = {m.variance, cost->second};
    for (double v : d.outputs)
      if (!std::isfinite(v))
        fail(ErrorKind::Data, "non-finite metric for channel " + key.str());
    for (double v : d.inputs)
      if (!std::isfinite(v))
        fail(ErrorKind::Data, "non-finite input for channel " + key.str());
    dmus.push_back(std::move(d));
  }
  auto report = apply_positivity_shift(dmus);
  if (shifts) *shifts = std::move(report);
  return dmus;
}

namespace detail {

inline void order_by_score(std::vector<ChannelKey>& keys,
                           const std::map<ChannelKey, double>& scores) {
  std::sort(keys.begin(), keys.end(), [&](const ChannelKey& a, const ChannelKey& b) {
    double sa = scores.at(a), sb = scores.at(b);
    if (sa != sb) return sa > sb;
    return a < b;
  });
}

}  // namespace detail

/// Keep the channels a DEA model rates efficient. `threshold` defaults to
/// the efficiency cutoff; lowering it admits near-frontier units. For the
/// additive model, whose efficient value is 0 and whose scores are
/// negative, t maps to a cutoff of -(1-t)*|worst score|, with the
/// efficiency tolerance folded in so t=1 keeps exactly the efficient set.
inline SelectionResult select_by_efficiency(const std::vector<EfficiencyResult>& results,
                                            double threshold = 1.0 - 1e-6,
                                            double tolerance = 1e-6) {
  if (results.empty()) fail(ErrorKind::Usage, "no efficiency results to select from");
  if (!(threshold > 0) || threshold > 1.0)
    fail(ErrorKind::Parameter,
         "selection threshold must be in (0, 1], got " + csv::format(threshold));
  DeaModel model = results[0].model;
  for (const auto& r : results)
    if (r.model != model)
      fail(ErrorKind::Usage, "mixed models in selection input: " +
                                 std::string(model_name(model)) + " and " +
                                 model_name(r.model));

  SelectionResult sel;
  sel.model = model_name(model);
  sel.threshold = threshold;
  double cutoff;
  if (model == DeaModel::Additive) {
    double worst = 0;
    for (const auto& r : results) worst = std::min(worst, r.score);
    cutoff = -(1.0 - threshold) * std::abs(worst) - tolerance;
  } else {
    cutoff = threshold;
  }
  for (const auto& r : results) {
    if (sel.scores.count(r.id))
      fail(ErrorKind::Conflict, "duplicate result for channel " + r.id.str());
    sel.scores[r.id] = r.score;
    (r.score >= cutoff ? sel.selected : sel.rejected).push_back(r.id);
  }
  detail::order_by_score(sel.selected, sel.scores);
  detail::order_by_score(sel.rejected, sel.scores);
  return sel;
}

/// Correlation baseline: rank channels by |Pearson r| between the
/// concatenated per-state samples and the numeric state codes.
inline SelectionResult pearson_rank(const SignalDataset& ds, std::size_t top_n = 0) {
  ds.validate();
  if (ds.states.size() != 2)
    fail(ErrorKind::Usage, "correlation ranking needs a binary-labeled dataset");

  SelectionResult sel;
  sel.model = "pearson";
  sel.threshold = 0;
  for (const auto& ch : ds.channels) {
    std::vector<double> x, label;
    for (const auto& [code, samples] : ch.per_state_samples)
      for (double v : samples) {
        x.push_back(v);
        label.push_back(static_cast<double>(code));
      }
    double n = static_cast<double>(x.size());
    double mx = 0, ml = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mx += x[i];
      ml += label[i];
    }
    mx /= n;
    ml /= n;
    double sxx = 0, sll = 0, sxl = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      sll += (label[i] - ml) * (label[i] - ml);
      sxl += (x[i] - mx) * (label[i] - ml);
    }
    sel.scores[ch.key] = sxx > 0 && sll > 0 ? std::abs(sxl / std::sqrt(sxx * sll)) : 0.0;
  }

  std::vector<ChannelKey> ranked;
  for (const auto& [key, score] : sel.scores) ranked.push_back(key);
  detail::order_by_score(ranked, sel.scores);
  std::size_t keep = top_n == 0 ? ranked.size() : std::min(top_n, ranked.size());
  sel.selected.assign(ranked.begin(), ranked.begin() + keep);
  sel.rejected.assign(ranked.begin() + keep, ranked.end());
  return sel;
}

inline void write_selection_json(const SelectionResult& sel, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["model"] = sel.model;
  doc["threshold"] = sel.threshold;
  auto dump = [&](const std::vector<ChannelKey>& keys) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& key : keys) {
      nlohmann::ordered_json entry;
      entry["sensor_id"] = key.sensor_id;
      entry["load_pct"] = key.load_pct;
      entry["score"] = sel.scores.at(key);
      arr.push_back(std::move(entry));
    }
    return arr;
  };
  doc["selected"] = dump(sel.selected);
  doc["rejected"] = dump(sel.rejected);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Usage, "cannot write " + path);
  out << doc.dump(2) << "\n";
}

inline SelectionResult read_selection_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Usage, "cannot open file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Schema, path + ": " + e.what());
  }
  SelectionResult sel;
  try {
    sel.model = doc.at("model").get<std::string>();
    sel.threshold = doc.at("threshold").get<double>();
    auto load = [&](const char* field, std::vector<ChannelKey>& keys) {
      for (const auto& entry : doc.at(field)) {
        ChannelKey key{entry.at("sensor_id").get<std::string>(),
                       entry.at("load_pct").get<std::string>()};
        keys.push_back(key);
        sel.scores[key] = entry.at("score").get<double>();
      }
    };
    load("selected", sel.selected);
    load("rejected", sel.rejected);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Schema, path + ": " + e.what());
  }
  return sel;
}

}  // namespace deasel
