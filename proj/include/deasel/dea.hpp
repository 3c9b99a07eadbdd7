#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "deasel/csv.hpp"
#include "deasel/dataset.hpp"
#include "deasel/error.hpp"
#include "deasel/simplex.hpp"

namespace deasel {

enum class DeaModel { Ccr, BccInput, BccOutput, Additive };

inline const char* model_name(DeaModel m) {
  switch (m) {
    case DeaModel::Ccr: return "ccr";
    case DeaModel::BccInput: return "iobcc";
    case DeaModel::BccOutput: return "oobcc";
    case DeaModel::Additive: return "additive";
  }
  return "?";
}

inline DeaModel parse_model(const std::string& name) {
  if (name == "ccr") return DeaModel::Ccr;
  if (name == "iobcc") return DeaModel::BccInput;
  if (name == "oobcc") return DeaModel::BccOutput;
  if (name == "additive") return DeaModel::Additive;
  fail(ErrorKind::Usage,
       "unknown model '" + name + "' (expected ccr, iobcc, oobcc or additive)");
}

/// One unit to score: a channel with its quality outputs and cost inputs.
struct DmuRecord {
  ChannelKey id;
  std::vector<double> outputs;  // higher is better
  std::vector<double> inputs;   // lower is better
};

struct WeightVector {
  std::vector<double> u;  // output multipliers
  std::vector<double> v;  // input multipliers
  std::optional<double> free_term;  // BCC intercept / additive offset
};

struct EfficiencyResult {
  ChannelKey id;
  DeaModel model = DeaModel::Ccr;
  double score = 0;
  WeightVector weights;
  bool efficient = false;
};

struct DeaOptions {
  double eps = 1e-6;        // multiplier floor for the ratio models
  double tolerance = 1e-6;  // efficient iff within this of 1 (ratio) or 0 (additive)
  bool normalize_additive = true;
  SimplexOptions lp;
};

inline void validate_dmus(const std::vector<DmuRecord>& dmus) {
  if (dmus.empty()) fail(ErrorKind::Usage, "no DMUs to score");
  std::size_t r = dmus[0].outputs.size(), s = dmus[0].inputs.size();
  if (r == 0 || s == 0)
    fail(ErrorKind::Usage, "DMUs need at least one output and one input");
  std::set<ChannelKey> ids;
  for (const auto& d : dmus) {
    if (!ids.insert(d.id).second)
      fail(ErrorKind::Conflict, "duplicate DMU id " + d.id.str());
    if (d.outputs.size() != r || d.inputs.size() != s)
      fail(ErrorKind::Usage, "DMU " + d.id.str() + " has ragged dimensions");
    for (double y : d.outputs)
      if (!std::isfinite(y) || y <= 0)
        fail(ErrorKind::Data, "DMU " + d.id.str() + " has non-positive output");
    for (double o : d.inputs)
      if (!std::isfinite(o) || o <= 0)
        fail(ErrorKind::Data, "DMU " + d.id.str() + " has non-positive input");
  }
}

/// DEA needs strictly positive data but some metrics (monotonicity in
/// particular) can be exactly 0. Columns containing values below 1e-9 are
/// shifted up by 1e-6 times their maximum; anything still non-positive
/// after that cannot be repaired automatically.
struct ShiftReport {
  struct Entry {
    std::string column;  // "output r" / "input s", 1-based
    double delta;
  };
  std::vector<Entry> entries;
};

inline ShiftReport apply_positivity_shift(std::vector<DmuRecord>& dmus) {
  ShiftReport report;
  if (dmus.empty()) return report;
  auto shift_column = [&](bool is_output, std::size_t idx) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& d : dmus) {
      double v = is_output ? d.outputs[idx] : d.inputs[idx];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    std::string name =
        (is_output ? "output " : "input ") + std::to_string(idx + 1);
    if (lo >= 1e-9) return;
    double delta = 1e-6 * hi;
    if (lo + delta <= 0)
      fail(ErrorKind::Data, name + " cannot be shifted positive (min " +
                                csv::format(lo) + ", max " + csv::format(hi) + ")");
    for (auto& d : dmus) (is_output ? d.outputs[idx] : d.inputs[idx]) += delta;
    report.entries.push_back({name, delta});
  };
  for (std::size_t r = 0; r < dmus[0].outputs.size(); ++r) shift_column(true, r);
  for (std::size_t s = 0; s < dmus[0].inputs.size(); ++s) shift_column(false, s);
  return report;
}

namespace detail {

// Column-normalized copy of the DMU data. Dividing each output/input
// column by its maximum changes nothing in exact arithmetic (multipliers
// absorb the scale) but pins all coefficients near 1, which keeps the
// multiplier floors meaningful across wildly different units and makes
// scores invariant under column rescaling in practice.
struct ScaledDmus {
  std::vector<std::vector<double>> y, o;  // [dmu][component]
  std::vector<double> ymax, omax;
};

inline ScaledDmus column_normalize(const std::vector<DmuRecord>& dmus) {
  ScaledDmus sc;
  std::size_t r = dmus[0].outputs.size(), s = dmus[0].inputs.size();
  sc.ymax.assign(r, 0.0);
  sc.omax.assign(s, 0.0);
  for (const auto& d : dmus) {
    for (std::size_t i = 0; i < r; ++i) sc.ymax[i] = std::max(sc.ymax[i], d.outputs[i]);
    for (std::size_t i = 0; i < s; ++i) sc.omax[i] = std::max(sc.omax[i], d.inputs[i]);
  }
  for (const auto& d : dmus) {
    std::vector<double> y(r), o(s);
    for (std::size_t i = 0; i < r; ++i) y[i] = d.outputs[i] / sc.ymax[i];
    for (std::size_t i = 0; i < s; ++i) o[i] = d.inputs[i] / sc.omax[i];
    sc.y.push_back(std::move(y));
    sc.o.push_back(std::move(o));
  }
  return sc;
}

// Shared Charnes-Cooper form of the three ratio models. Variables are
// [u_1..u_R, v_1..v_S, intercept?]; the intercept is free. The multiplier
// floors are explicit >= rows so they can be relaxed on retry.
inline LinearProgram ratio_program(const ScaledDmus& sc, std::size_t l,
                                   DeaModel model, double eps) {
  std::size_t r = sc.ymax.size(), s = sc.omax.size();
  bool io = model == DeaModel::BccInput;
  bool oo = model == DeaModel::BccOutput;
  std::size_t nvars = r + s + (io || oo ? 1 : 0);

  LinearProgram lp;
  lp.sense = Sense::Maximize;
  lp.objective.assign(nvars, 0.0);
  for (std::size_t i = 0; i < r; ++i) lp.objective[i] = sc.y[l][i];
  if (io) lp.objective[r + s] = 1.0;
  if (io || oo) {
    lp.free_vars.assign(nvars, false);
    lp.free_vars[r + s] = true;
  }

  // weighted inputs of the scored unit pin the denominator at 1
  std::vector<double> norm(nvars, 0.0);
  for (std::size_t i = 0; i < s; ++i) norm[r + i] = sc.o[l][i];
  if (oo) norm[r + s] = 1.0;
  lp.add_row(std::move(norm), Relation::Equal, 1.0);

  for (std::size_t j = 0; j < sc.y.size(); ++j) {
    std::vector<double> row(nvars, 0.0);
    for (std::size_t i = 0; i < r; ++i) row[i] = sc.y[j][i];
    for (std::size_t i = 0; i < s; ++i) row[r + i] = -sc.o[j][i];
    if (io) row[r + s] = 1.0;
    if (oo) row[r + s] = -1.0;
    lp.add_row(std::move(row), Relation::LessEq, 0.0);
  }

  if (eps > 0) {
    for (std::size_t i = 0; i < r + s; ++i) {
      std::vector<double> row(nvars, 0.0);
      row[i] = 1.0;
      lp.add_row(std::move(row), Relation::GreaterEq, eps);
    }
  }
  return lp;
}

inline EfficiencyResult solve_ratio(const std::vector<DmuRecord>& dmus, std::size_t l,
                                    DeaModel model, double eps, double tolerance,
                                    const SimplexOptions& lpopts) {
  auto sc = column_normalize(dmus);
  auto sol = solve(ratio_program(sc, l, model, eps), lpopts);
  if (sol.status == LpStatus::Infeasible && eps > 0) {
    // the floors can over-constrain extreme data; relax once before giving up
    sol = solve(ratio_program(sc, l, model, eps / 100.0), lpopts);
  }
  if (sol.status == LpStatus::Infeasible)
    fail(ErrorKind::Model, std::string(model_name(model)) + " program infeasible for " +
                               dmus[l].id.str() + " even with relaxed floors");
  if (sol.status == LpStatus::Unbounded)
    fail(ErrorKind::Internal, std::string(model_name(model)) +
                                  " program unbounded for " + dmus[l].id.str());
  if (sol.objective > 1.0 + 1e-7 || sol.objective < -1e-9)
    fail(ErrorKind::Internal, std::string(model_name(model)) + " score " +
                                  csv::format(sol.objective) + " out of range for " +
                                  dmus[l].id.str());

  std::size_t r = sc.ymax.size(), s = sc.omax.size();
  EfficiencyResult res;
  res.id = dmus[l].id;
  res.model = model;
  res.score = sol.objective;
  res.efficient = sol.objective >= 1.0 - tolerance;
  // map multipliers back to the original units
  for (std::size_t i = 0; i < r; ++i)
    res.weights.u.push_back(sol.values[i] / sc.ymax[i]);
  for (std::size_t i = 0; i < s; ++i)
    res.weights.v.push_back(sol.values[r + i] / sc.omax[i]);
  if (model != DeaModel::Ccr) res.weights.free_term = sol.values[r + s];
  return res;
}

inline EfficiencyResult solve_additive(const std::vector<DmuRecord>& dmus,
                                       std::size_t l, bool normalize, double tolerance,
                                       const SimplexOptions& lpopts) {
  auto sc = column_normalize(dmus);
  if (!normalize) {
    for (double& m : sc.ymax) m = 1.0;
    for (double& m : sc.omax) m = 1.0;
    sc.y.clear();
    sc.o.clear();
    for (const auto& d : dmus) {
      sc.y.push_back(d.outputs);
      sc.o.push_back(d.inputs);
    }
  }
  std::size_t r = sc.ymax.size(), s = sc.omax.size();
  std::size_t nvars = r + s + 1;  // u, v, offset

  LinearProgram lp;
  lp.sense = Sense::Maximize;
  lp.objective.assign(nvars, 0.0);
  for (std::size_t i = 0; i < r; ++i) lp.objective[i] = sc.y[l][i];
  for (std::size_t i = 0; i < s; ++i) lp.objective[r + i] = -sc.o[l][i];
  lp.objective[r + s] = -1.0;
  lp.free_vars.assign(nvars, false);
  lp.free_vars[r + s] = true;

  for (std::size_t j = 0; j < sc.y.size(); ++j) {
    std::vector<double> row(nvars, 0.0);
    for (std::size_t i = 0; i < r; ++i) row[i] = sc.y[j][i];
    for (std::size_t i = 0; i < s; ++i) row[r + i] = -sc.o[j][i];
    row[r + s] = -1.0;
    lp.add_row(std::move(row), Relation::LessEq, 0.0);
  }
  for (std::size_t i = 0; i < r + s; ++i) {
    std::vector<double> row(nvars, 0.0);
    row[i] = 1.0;
    lp.add_row(std::move(row), Relation::GreaterEq, 1.0);
  }

  auto sol = solve(lp, lpopts);
  // u = v = 1 with a large enough offset is always feasible, and the
  // scored unit's own row caps the objective at zero
  if (sol.status != LpStatus::Optimal)
    fail(ErrorKind::Internal,
         "additive program did not solve for " + dmus[l].id.str());
  if (sol.objective > 1e-7)
    fail(ErrorKind::Internal, "additive score " + csv::format(sol.objective) +
                                  " above zero for " + dmus[l].id.str());

  EfficiencyResult res;
  res.id = dmus[l].id;
  res.model = DeaModel::Additive;
  res.score = sol.objective;
  res.efficient = sol.objective >= -tolerance;
  for (std::size_t i = 0; i < r; ++i)
    res.weights.u.push_back(sol.values[i] / sc.ymax[i]);
  for (std::size_t i = 0; i < s; ++i)
    res.weights.v.push_back(sol.values[r + i] / sc.omax[i]);
  res.weights.free_term = sol.values[r + s];
  return res;
}

}  // namespace detail

inline EfficiencyResult ccr(const std::vector<DmuRecord>& dmus, std::size_t l,
                            double eps = 1e-6, const SimplexOptions& lpopts = {}) {
  validate_dmus(dmus);
  return detail::solve_ratio(dmus, l, DeaModel::Ccr, eps, 1e-6, lpopts);
}

inline EfficiencyResult bcc_input(const std::vector<DmuRecord>& dmus, std::size_t l,
                                  double eps = 1e-6, const SimplexOptions& lpopts = {}) {
  validate_dmus(dmus);
  return detail::solve_ratio(dmus, l, DeaModel::BccInput, eps, 1e-6, lpopts);
}

inline EfficiencyResult bcc_output(const std::vector<DmuRecord>& dmus, std::size_t l,
                                   double eps = 1e-6, const SimplexOptions& lpopts = {}) {
  validate_dmus(dmus);
  return detail::solve_ratio(dmus, l, DeaModel::BccOutput, eps, 1e-6, lpopts);
}

inline EfficiencyResult additive(const std::vector<DmuRecord>& dmus, std::size_t l,
                                 bool normalize = true,
                                 const SimplexOptions& lpopts = {}) {
  validate_dmus(dmus);
  return detail::solve_additive(dmus, l, normalize, 1e-6, lpopts);
}

/// Score every DMU under one model. Per-DMU failures are aggregated into
/// a single error so one bad unit does not hide the others.
inline std::vector<EfficiencyResult> score_all(const std::vector<DmuRecord>& dmus,
                                               DeaModel model,
                                               const DeaOptions& opts = {}) {
  validate_dmus(dmus);
  std::vector<EfficiencyResult> results;
  std::string failures;
  for (std::size_t l = 0; l < dmus.size(); ++l) {
    try {
      if (model == DeaModel::Additive)
        results.push_back(detail::solve_additive(dmus, l, opts.normalize_additive,
                                                 opts.tolerance, opts.lp));
      else
        results.push_back(
            detail::solve_ratio(dmus, l, model, opts.eps, opts.tolerance, opts.lp));
    } catch (const Error& e) {
      failures += (failures.empty() ? "" : "; ") + std::string(e.what());
    }
  }
  if (!failures.empty())
    fail(ErrorKind::Model, std::string(model_name(model)) + " scoring failed: " + failures);
  return results;
}

inline void write_efficiency_csv(const std::vector<EfficiencyResult>& results,
                                 const std::string& path) {
  if (results.empty()) fail(ErrorKind::Usage, "no efficiency results to write");
  std::size_t r = results[0].weights.u.size(), s = results[0].weights.v.size();
  csv::Writer out(path);
  std::vector<std::string> header = {"sensor_id", "load_pct", "model", "score",
                                     "efficient"};
  for (std::size_t i = 1; i <= r; ++i) header.push_back("u_" + std::to_string(i));
  for (std::size_t i = 1; i <= s; ++i) header.push_back("v_" + std::to_string(i));
  header.push_back("free_term");
  out.row(header);
  for (const auto& res : results) {
    if (res.weights.u.size() != r || res.weights.v.size() != s)
      fail(ErrorKind::Usage, "efficiency results have ragged weight vectors");
    std::vector<std::string> row = {res.id.sensor_id, res.id.load_pct,
                                    model_name(res.model), csv::format(res.score),
                                    res.efficient ? "1" : "0"};
    for (double u : res.weights.u) row.push_back(csv::format(u));
    for (double v : res.weights.v) row.push_back(csv::format(v));
    row.push_back(res.weights.free_term ? csv::format(*res.weights.free_term) : "");
    out.row(row);
  }
}

inline std::vector<EfficiencyResult> read_efficiency_csv(const std::string& path) {
  auto table = csv::read_table(path);
  int c_sensor = table.require_column("sensor_id", path);
  int c_load = table.require_column("load_pct", path);
  int c_model = table.require_column("model", path);
  int c_score = table.require_column("score", path);
  int c_eff = table.require_column("efficient", path);
  int c_free = table.require_column("free_term", path);
  std::vector<int> u_cols, v_cols;
  for (int i = 1; table.column("u_" + std::to_string(i)) >= 0; ++i)
    u_cols.push_back(table.column("u_" + std::to_string(i)));
  for (int i = 1; table.column("v_" + std::to_string(i)) >= 0; ++i)
    v_cols.push_back(table.column("v_" + std::to_string(i)));
  if (u_cols.empty() || v_cols.empty())
    fail(ErrorKind::Schema, path + ": missing u_*/v_* weight columns");

  std::vector<EfficiencyResult> results;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    std::string where = path + ":" + std::to_string(i + 2);
    EfficiencyResult res;
    res.id = {row[c_sensor], row[c_load]};
    res.model = parse_model(row[c_model]);
    res.score = csv::parse_double(row[c_score], where);
    res.efficient = csv::parse_int(row[c_eff], where) != 0;
    for (int c : u_cols) res.weights.u.push_back(csv::parse_double(row[c], where));
    for (int c : v_cols) res.weights.v.push_back(csv::parse_double(row[c], where));
    if (!row[c_free].empty())
      res.weights.free_term = csv::parse_double(row[c_free], where);
    results.push_back(std::move(res));
  }
  if (results.empty()) fail(ErrorKind::Shape, path + ": no efficiency rows");
  return results;
}

}  // namespace deasel
