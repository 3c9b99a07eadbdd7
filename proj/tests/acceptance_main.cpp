// Acceptance suite: seven go/no-go checks on the finished toolchain, one
// summary line each. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "deasel/classifiers.hpp"
#include "deasel/config.hpp"
#include "deasel/dataset.hpp"
#include "deasel/dea.hpp"
#include "deasel/error.hpp"
#include "deasel/evaluation.hpp"
#include "deasel/pipeline.hpp"
#include "deasel/rng.hpp"
#include "deasel/selection.hpp"
#include "deasel/signal_metrics.hpp"
#include "deasel/simplex.hpp"
#include "deasel/synth.hpp"
#include "oracle_lp.hpp"

namespace {

using namespace deasel;
using Clock = std::chrono::steady_clock;

struct Criterion {
  bool ok = true;
  std::string first_failure;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      first_failure = what;
    }
  }
  void expect_near(double actual, double expected, double tol, const std::string& what) {
    if (!(std::abs(actual - expected) <= tol))
      expect(false, what + ": got " + csv::format(actual) + ", expected " +
                        csv::format(expected) + " (tol " + csv::format(tol) + ")");
  }
};

int report(int index, const std::string& title, const Criterion& c, double seconds) {
  std::ostringstream line;
  line << (c.ok ? "[PASS]" : "[FAIL]") << " criterion " << index << ": " << title
       << " (" << csv::format(std::round(seconds * 1000.0) / 1000.0) << "s)";
  if (!c.ok) line << " -- " << c.first_failure;
  std::cout << line.str() << "\n";
  return c.ok ? 0 : 1;
}

ChannelSeries one_state(std::vector<double> samples) {
  ChannelSeries ch;
  ch.key = {"1", "0"};
  ch.per_state_samples[1] = std::move(samples);
  return ch;
}

ChannelSeries two_states(std::vector<double> a, std::vector<double> b) {
  ChannelSeries ch;
  ch.key = {"1", "0"};
  ch.per_state_samples[1] = std::move(a);
  ch.per_state_samples[2] = std::move(b);
  return ch;
}

double sample_variance(const std::vector<double>& x) {
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double acc = 0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(x.size() - 1);
}

// autocorrelation at lag tau, computed directly for the trendability check
double acf_lag(const std::vector<double>& x, std::size_t tau) {
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double num = 0, den = 0;
  for (double v : x) den += (v - mean) * (v - mean);
  for (std::size_t t = tau; t < x.size(); ++t)
    num += (x[t] - mean) * (x[t - tau] - mean);
  return num / den;
}

// -------------------------------------------------------------------------
// criterion 1: the six metric formulas on their hand-checked fixtures

Criterion criterion_metrics() {
  Criterion c;
  constexpr double kTol = 1e-9;
  constexpr double kDenoiserTol = 1e-6;

  // monotonic direction counting
  c.expect_near(monotonicity(one_state({1, 2, 3, 4, 5})), 1.0, kTol,
                "monotonicity increasing");
  c.expect_near(monotonicity(one_state({1, 0, 1, 0, 1})), 0.0, kTol,
                "monotonicity balanced");
  c.expect_near(monotonicity(one_state({1, 2, 1, 3})), 1.0 / 3.0, kTol,
                "monotonicity mixed");

  // wavelet smoother
  {
    std::vector<double> flat(64, 3.25);
    auto out = smooth(flat);
    double dev = 0;
    for (double v : out) dev = std::max(dev, std::abs(v - 3.25));
    c.expect(dev <= kDenoiserTol, "smooth leaves a constant unchanged");

    Rng rng(20240901);
    std::vector<double> noise(1024);
    for (double& v : noise) v = normal01(rng);
    auto denoised = smooth(noise);
    c.expect(sample_variance(denoised) < sample_variance(noise),
             "smooth shrinks noise variance");

    std::vector<double> ramp(256);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
    auto kept = smooth(ramp, {.levels = 1});
    double thr = smooth_threshold(ramp, {.levels = 1});
    double worst = 0;
    for (std::size_t i = 0; i < ramp.size(); ++i)
      worst = std::max(worst, std::abs(kept[i] - ramp[i]));
    c.expect(worst <= thr / std::sqrt(2.0) + kDenoiserTol,
             "smooth keeps a ramp within threshold tolerance");
  }

  // residual agreement
  c.expect_near(robustness(one_state({2.5, 2.5, 2.5, 2.5})), 1.0, kDenoiserTol,
                "robustness of a constant");
  {
    auto zero_smoother = [](const std::vector<double>& x) {
      return std::vector<double>(x.size(), 0.0);  // residual equals x
    };
    c.expect_near(robustness_with(one_state({1, 2, 3, 4}), zero_smoother),
                  std::exp(-1.0), kTol, "robustness at uniform ratio 1");
    c.expect_near(robustness_with(two_states({5, 5, 5}, {1, 2, 3}),
                                  [](const std::vector<double>& x) {
                                    bool constant = true;
                                    for (double v : x) constant &= v == x[0];
                                    if (constant) return x;
                                    return std::vector<double>(x.size(), 0.0);
                                  }),
                  (1.0 + std::exp(-1.0)) / 2.0, kTol,
                  "robustness averaged over a smooth and a ratio-1 state");
  }

  // lag correlation
  {
    std::vector<double> sine(256);
    for (std::size_t i = 0; i < sine.size(); ++i)
      sine[i] = std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / 128.0);
    double score = trendability(one_state(sine), 1);
    c.expect_near(score, std::abs(acf_lag(sine, 1)), kTol,
                  "trendability max_lag=1 equals |r(1)|");
    c.expect(score > 0.9, "trendability of a slow sine is near 1");

    Rng rng(555);
    std::vector<double> white(2048);
    for (double& v : white) v = normal01(rng);
    c.expect(trendability(one_state(white), 10) < 0.1,
             "trendability of white noise stays low");

    c.expect_near(trendability(one_state({1, 1}), 1, TrendMode::Literal), 1.0, kTol,
                  "literal trendability of [1,1]");
  }

  // class separation
  c.expect_near(detectability(two_states({0, 2}, {4, 6})), 4.0, kTol,
                "detectability of shifted states");
  c.expect_near(detectability(two_states({0, 2}, {0, 2})), 0.0, kTol,
                "detectability of identical states");
  c.expect_near(detectability(two_states({1, 3}, {0, 4})), 0.0, kTol,
                "detectability with equal means");

  // dispersion and energy
  c.expect_near(variance(one_state({7, 7, 7})), 0.0, kTol, "variance of a constant");
  c.expect_near(variance(one_state({1, 3})), 2.0, kTol, "variance of [1,3]");
  c.expect_near(variance(two_states({1, 3}, {5, 5})), 1.0, kTol,
                "variance averaged over states");
  c.expect_near(rms(one_state({-4, -4, -4})), 4.0, kTol, "rms of a constant");
  c.expect_near(rms(one_state({3, 4})), std::sqrt(12.5), kTol, "rms of [3,4]");
  c.expect_near(rms(one_state({0, 0, 0})), 0.0, kTol, "rms of zeros");

  // aggregation over channels
  {
    JoinedDataset joined;
    joined.dataset.states = {{"healthy", 1}, {"faulty", 2}};
    joined.dataset.samples_per_state = 4;
    ChannelSeries good = two_states({1, 2, 3, 4}, {5, 6, 7, 8});
    good.key = {"1", "0"};
    joined.dataset.channels = {good};
    joined.total_cost[good.key] = 10.0;
    auto solo = characterize(joined);
    c.expect(solo.metrics.size() == 1 && solo.flagged.empty(),
             "characterize handles a one-channel dataset");

    JoinedDataset wide;
    wide.dataset.states = joined.dataset.states;
    wide.dataset.samples_per_state = 4;
    for (int i = 1; i <= 40; ++i) {
      ChannelSeries ch =
          i == 40 ? two_states({2, 2, 2, 2}, {2, 2, 2, 2})  // zero scatter
                  : two_states({1, 2, 3, 4}, {5, 6, 7, 8});
      ch.key = {std::to_string(i), "0"};
      wide.dataset.channels.push_back(ch);
      wide.total_cost[ch.key] = 10.0;
    }
    auto mixed = characterize(wide);
    c.expect(mixed.metrics.size() == 39 && mixed.flagged.size() == 1 &&
                 mixed.flagged[0].key.sensor_id == "40",
             "characterize flags the zero-scatter channel and keeps the other 39");
  }
  return c;
}

// -------------------------------------------------------------------------
// criterion 2: simplex vs exhaustive vertex enumeration

Criterion criterion_lp_oracle() {
  Criterion c;
  Rng rng(20260814);
  auto int_in = [&](long long lo, long long hi) {
    return static_cast<double>(lo + static_cast<long long>(below(
                                        rng, static_cast<std::uint64_t>(hi - lo + 1))));
  };
  for (int trial = 0; trial < 200 && c.ok; ++trial) {
    std::size_t n = 1 + below(rng, 6);
    std::size_t m = 1 + below(rng, 6);
    LinearProgram lp;
    lp.sense = Sense::Maximize;
    lp.objective.resize(n);
    for (double& v : lp.objective) v = int_in(-5, 5);
    for (std::size_t r = 0; r + 1 < m; ++r) {
      std::vector<double> row(n);
      for (double& v : row) v = int_in(-5, 5);
      lp.add_row(row, Relation::LessEq, int_in(0, 5));
    }
    lp.add_row(std::vector<double>(n, 1.0), Relation::LessEq, int_in(0, 5));

    auto got = solve(lp);
    auto want = oracle::best_vertex(lp);
    c.expect(want.status == LpStatus::Optimal,
             "trial " + std::to_string(trial) + ": oracle found no vertex");
    c.expect(got.status == LpStatus::Optimal,
             "trial " + std::to_string(trial) + ": solver status not optimal");
    if (!c.ok) break;
    c.expect_near(got.objective, want.objective, 1e-7,
                  "trial " + std::to_string(trial) + " objective");
    c.expect(oracle::feasible(lp, got.values),
             "trial " + std::to_string(trial) + ": solver point infeasible");
  }
  return c;
}

// -------------------------------------------------------------------------
// criterion 3: DEA frontier properties on random tables

Criterion criterion_dea_properties() {
  Criterion c;
  Rng rng(424242);
  const DeaModel ratio_models[] = {DeaModel::Ccr, DeaModel::BccInput,
                                   DeaModel::BccOutput};
  for (int trial = 0; trial < 100 && c.ok; ++trial) {
    std::size_t n = 2 + below(rng, 9);  // up to 10 DMUs
    std::vector<DmuRecord> dmus;
    for (std::size_t i = 0; i < n; ++i) {
      DmuRecord d;
      d.id = {std::to_string(i + 1), "0"};
      for (int r = 0; r < 5; ++r) d.outputs.push_back(0.05 + 10.0 * uniform01(rng));
      for (int s = 0; s < 2; ++s) d.inputs.push_back(0.05 + 10.0 * uniform01(rng));
      dmus.push_back(std::move(d));
    }
    std::map<DeaModel, std::vector<EfficiencyResult>> scores;
    for (DeaModel model :
         {DeaModel::Ccr, DeaModel::BccInput, DeaModel::BccOutput, DeaModel::Additive}) {
      scores[model] = score_all(dmus, model);
      bool any_efficient = false;
      for (const auto& r : scores[model]) any_efficient |= r.efficient;
      c.expect(any_efficient, "trial " + std::to_string(trial) + ": no efficient DMU under " +
                                  model_name(model));
    }
    for (std::size_t j = 0; j < n; ++j) {
      double ccr = scores[DeaModel::Ccr][j].score;
      c.expect(scores[DeaModel::BccInput][j].score >= ccr - 1e-7,
               "trial " + std::to_string(trial) + ": IO-BCC below CCR");
      c.expect(scores[DeaModel::BccOutput][j].score >= ccr - 1e-7,
               "trial " + std::to_string(trial) + ": OO-BCC below CCR");
    }
    // dominated units never sit on the CCR frontier
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b) continue;
        bool dominates = true, strict = false;
        for (int r = 0; r < 5; ++r) {
          if (dmus[a].outputs[r] < dmus[b].outputs[r]) dominates = false;
          if (dmus[a].outputs[r] > dmus[b].outputs[r]) strict = true;
        }
        for (int s = 0; s < 2; ++s) {
          if (dmus[a].inputs[s] > dmus[b].inputs[s]) dominates = false;
          if (dmus[a].inputs[s] < dmus[b].inputs[s]) strict = true;
        }
        if (dominates && strict)
          c.expect(!scores[DeaModel::Ccr][b].efficient,
                   "trial " + std::to_string(trial) + ": dominated DMU rated CCR-efficient");
      }
    // units-invariance under positive column rescaling
    auto rescaled = dmus;
    std::vector<double> yscale(5), oscale(2);
    for (double& s : yscale) s = 0.02 + 40.0 * uniform01(rng);
    for (double& s : oscale) s = 0.02 + 40.0 * uniform01(rng);
    for (auto& d : rescaled) {
      for (int r = 0; r < 5; ++r) d.outputs[r] *= yscale[r];
      for (int s = 0; s < 2; ++s) d.inputs[s] *= oscale[s];
    }
    for (DeaModel model : ratio_models) {
      auto again = score_all(rescaled, model);
      for (std::size_t j = 0; j < n; ++j)
        c.expect_near(again[j].score, scores[model][j].score, 1e-6,
                      std::string("trial ") + std::to_string(trial) + " " +
                          model_name(model) + " rescale invariance");
    }
  }
  return c;
}

// -------------------------------------------------------------------------
// criterion 4: published confusion-row arithmetic

Criterion criterion_confusion_row() {
  Criterion c;
  ConfusionMatrix cm{.tp = 500, .fp = 8, .tn = 492, .fn = 0};
  auto r = metrics(cm);
  auto to4 = [](double v) { return std::round(v * 1e4) / 1e4; };
  c.expect(to4(r.accuracy) == 0.992, "accuracy != 0.992");
  c.expect(to4(r.precision_pos) == 0.9843, "positive precision != 0.9843");
  c.expect(to4(r.f_pos) == 0.9921, "positive F != 0.9921");
  c.expect(to4(r.f_neg) == 0.9919, "negative F != 0.9919");

  std::vector<double> scores;
  std::vector<int> truth;
  for (int i = 0; i < 500; ++i) { truth.push_back(1); scores.push_back(1); }
  for (int i = 0; i < 8; ++i) { truth.push_back(2); scores.push_back(1); }
  for (int i = 0; i < 492; ++i) { truth.push_back(2); scores.push_back(0); }
  c.expect(to4(roc_auc(scores, truth, 1).auc) == 0.992, "label AUC != 0.992");
  return c;
}

// -------------------------------------------------------------------------
// criterion 5: trapezoidal AUC equals pairwise concordance

double concordance(const std::vector<double>& scores, const std::vector<int>& truth,
                   int positive) {
  double pairs = 0, credit = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (truth[i] != positive) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (truth[j] == positive) continue;
      pairs += 1;
      if (scores[i] > scores[j]) credit += 1;
      else if (scores[i] == scores[j]) credit += 0.5;
    }
  }
  return credit / pairs;
}

Criterion criterion_auc_oracle() {
  Criterion c;
  Rng rng(777777);
  for (int trial = 0; trial < 100 && c.ok; ++trial) {
    std::size_t n = 2 + below(rng, 49);
    std::vector<double> scores(n);
    std::vector<int> truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(below(rng, 7)) / 4.0;  // coarse grid forces ties
      truth[i] = below(rng, 2) == 0 ? 1 : 2;
    }
    truth[0] = 1;
    truth[n - 1] = 2;
    c.expect_near(roc_auc(scores, truth, 1).auc, concordance(scores, truth, 1), 1e-12,
                  "trial " + std::to_string(trial) + " AUC vs concordance");
  }
  return c;
}

// -------------------------------------------------------------------------
// criteria 6 and 7: the seed-42 synthetic end-to-end fixture

PipelineConfig fixture_config(const std::string& dir) {
  PipelineConfig cfg;
  cfg.out_dir = dir;
  cfg.signals_path = dir + "/signals.csv";
  cfg.costs_path = dir + "/costs.csv";
  cfg.synth_seed = 42;
  cfg.synth_channels = 40;
  cfg.synth_good = 20;
  cfg.synth_samples = 500;
  return cfg;
}

PipelineReport run_fixture(const PipelineConfig& cfg) {
  run_synth(cfg);
  return run_pipeline(cfg);
}

Criterion criterion_end_to_end(const std::string& dir, double* pipeline_seconds) {
  Criterion c;
  auto cfg = fixture_config(dir);
  run_synth(cfg);
  auto t0 = Clock::now();
  auto report = run_pipeline(cfg);
  *pipeline_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

  c.expect(report.exit_code == 0, "a pipeline pair failed");
  c.expect(report.rows.size() == 12, "expected 12 evaluation rows, got " +
                                         std::to_string(report.rows.size()));

  std::map<std::string, std::size_t> selected_count;
  for (DeaModel m :
       {DeaModel::Ccr, DeaModel::BccInput, DeaModel::BccOutput, DeaModel::Additive}) {
    auto sel = read_selection_json(out_path(cfg, selection_file(m)));
    c.expect(!sel.selected.empty(),
             std::string(model_name(m)) + " selected nothing");
    c.expect(sel.selected.size() < 40,
             std::string(model_name(m)) + " selected every channel");
    for (const auto& key : sel.selected) {
      int id = std::stoi(key.sensor_id);
      c.expect(id >= 1 && id <= 20, std::string(model_name(m)) +
                                        " selected low-quality channel " + key.str());
    }
    selected_count[model_name(m)] = sel.selected.size();
  }
  c.expect(selected_count["ccr"] <= selected_count["iobcc"],
           "CCR selected more than IO-BCC");
  c.expect(selected_count["ccr"] <= selected_count["oobcc"],
           "CCR selected more than OO-BCC");

  bool found = false;
  for (const auto& row : report.rows) {
    if (row.method != "ccr-knn") continue;
    found = true;
    c.expect(row.report.accuracy >= 0.99,
             "ccr-knn accuracy " + csv::format(row.report.accuracy) + " < 0.99");
    c.expect(row.report.auc >= 0.99,
             "ccr-knn AUC " + csv::format(row.report.auc) + " < 0.99");
  }
  c.expect(found, "no ccr-knn row in the report");
  c.expect(*pipeline_seconds < 60.0, "12-pair pipeline took " +
                                         csv::format(*pipeline_seconds) + "s (>= 60s)");
  return c;
}

Criterion criterion_determinism(const std::string& first_dir, const std::string& rerun_dir) {
  Criterion c;
  auto cfg = fixture_config(rerun_dir);
  auto report = run_fixture(cfg);
  c.expect(report.exit_code == 0, "rerun failed");

  auto list_files = [](const std::string& dir) {
    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
      if (entry.is_regular_file()) names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
  };
  auto read_all = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  auto a = list_files(first_dir);
  auto b = list_files(rerun_dir);
  c.expect(a == b, "report file lists differ between runs");
  if (a == b)
    for (const auto& name : a)
      c.expect(read_all(first_dir + "/" + name) == read_all(rerun_dir + "/" + name),
               name + " differs between runs");
  return c;
}

}  // namespace

int main() {
  int failures = 0;
  auto timed = [&](int index, const std::string& title, auto&& fn, double budget) {
    auto t0 = Clock::now();
    Criterion c = fn();
    double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (budget > 0)
      c.expect(seconds < budget, "runtime " + csv::format(seconds) + "s exceeded " +
                                     csv::format(budget) + "s");
    failures += report(index, title, c, seconds);
  };

  timed(1, "metric formula fixtures (tol 1e-9, denoiser-dependent 1e-6)",
        criterion_metrics, 1.0);
  timed(2, "simplex matches vertex enumeration on 200 random LPs (tol 1e-7)",
        criterion_lp_oracle, 10.0);
  timed(3, "DEA frontier properties on 100 random tables (tol 1e-7/1e-6)",
        criterion_dea_properties, 30.0);
  timed(4, "published confusion-row arithmetic to 4 decimals",
        criterion_confusion_row, 0);
  timed(5, "trapezoidal AUC equals tie-aware concordance (tol 1e-12)",
        criterion_auc_oracle, 0);

  auto base = std::filesystem::temp_directory_path() / "deasel_acceptance";
  std::filesystem::remove_all(base);
  std::filesystem::create_directories(base);
  auto dir_a = (base / "run_a").string();
  auto dir_b = (base / "run_b").string();

  double pipeline_seconds = 0;
  {
    auto t0 = Clock::now();
    Criterion c = criterion_end_to_end(dir_a, &pipeline_seconds);
    double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    failures += report(6, "seed-42 fixture: subset quality, ccr-knn >= 0.99, < 60s",
                       c, seconds);
  }
  {
    auto t0 = Clock::now();
    Criterion c = criterion_determinism(dir_a, dir_b);
    double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    failures += report(7, "rerun emits byte-identical reports", c, seconds);
  }
  std::filesystem::remove_all(base);

  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all 7 criteria passed\n";
  return 0;
}
