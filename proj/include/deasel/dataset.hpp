#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "deasel/csv.hpp"
#include "deasel/error.hpp"

namespace deasel {

/// One channel = one (sensor, load condition) pair.
struct ChannelKey {
  std::string sensor_id;
  std::string load_pct;  // "0", "10", ... or an arbitrary tag

  std::string str() const { return sensor_id + "@" + load_pct; }

  friend bool operator==(const ChannelKey&, const ChannelKey&) = default;
};

// Canonical order: sensor id lexicographic, then load numeric when both
// loads parse as numbers ("90" after "10"), else lexicographic.
inline bool operator<(const ChannelKey& a, const ChannelKey& b) {
  if (a.sensor_id != b.sensor_id) return a.sensor_id < b.sensor_id;
  double la = 0, lb = 0;
  auto ra = std::from_chars(a.load_pct.data(), a.load_pct.data() + a.load_pct.size(), la);
  auto rb = std::from_chars(b.load_pct.data(), b.load_pct.data() + b.load_pct.size(), lb);
  bool na = ra.ec == std::errc() && ra.ptr == a.load_pct.data() + a.load_pct.size();
  bool nb = rb.ec == std::errc() && rb.ptr == b.load_pct.data() + b.load_pct.size();
  if (na && nb && la != lb) return la < lb;
  return a.load_pct < b.load_pct;
}

struct StateLabel {
  std::string name;
  int code = 0;  // positive integer, unique within a dataset
};

struct ChannelSeries {
  ChannelKey key;
  std::map<int, std::vector<double>> per_state_samples;  // state code -> samples

  int state_count() const { return static_cast<int>(per_state_samples.size()); }
};

/// Validated multi-channel dataset: every channel carries the same state
/// set and the same number of samples N per state, N >= 2, >= 2 states.
struct SignalDataset {
  std::vector<ChannelSeries> channels;  // canonical (sensor, load) order
  std::vector<StateLabel> states;       // ascending code order
  std::size_t samples_per_state = 0;
  int positive_code = 1;  // the "healthy" class for binary evaluation

  const ChannelSeries* find(const ChannelKey& key) const {
    for (const auto& ch : channels)
      if (ch.key == key) return &ch;
    return nullptr;
  }

  void validate() const {
    if (channels.empty()) fail(ErrorKind::Shape, "dataset has no channels");
    if (states.size() < 2)
      fail(ErrorKind::Shape, "dataset needs at least 2 states, got " +
                                 std::to_string(states.size()));
    if (samples_per_state < 2)
      fail(ErrorKind::Shape, "dataset needs at least 2 samples per state, got " +
                                 std::to_string(samples_per_state));
    std::set<int> codes;
    for (const auto& s : states) {
      if (s.code <= 0) fail(ErrorKind::Data, "state codes must be positive");
      if (!codes.insert(s.code).second)
        fail(ErrorKind::Conflict, "duplicate state code " + std::to_string(s.code));
    }
    if (!codes.count(positive_code))
      fail(ErrorKind::Config, "positive state code " + std::to_string(positive_code) +
                                  " not present in dataset");
    std::set<ChannelKey> keys;
    for (const auto& ch : channels) {
      if (!keys.insert(ch.key).second)
        fail(ErrorKind::Conflict, "duplicate channel " + ch.key.str());
      if (ch.per_state_samples.size() != states.size())
        fail(ErrorKind::Shape, "channel " + ch.key.str() + " has " +
                                   std::to_string(ch.per_state_samples.size()) +
                                   " states, expected " + std::to_string(states.size()));
      for (const auto& [code, samples] : ch.per_state_samples) {
        if (!codes.count(code))
          fail(ErrorKind::Shape, "channel " + ch.key.str() +
                                     " has unknown state code " + std::to_string(code));
        if (samples.size() != samples_per_state)
          fail(ErrorKind::Shape,
               "channel " + ch.key.str() + " state " + std::to_string(code) + " has " +
                   std::to_string(samples.size()) + " samples, expected " +
                   std::to_string(samples_per_state));
        for (double v : samples)
          if (!std::isfinite(v))
            fail(ErrorKind::Data,
                 "non-finite sample in channel " + ch.key.str() + " state " +
                     std::to_string(code));
      }
    }
  }
};

/// Per-channel cost components; all non-negative, total strictly positive.
struct CostProfile {
  ChannelKey key;
  double purchase = 0;
  double installation = 0;
  double replacement = 0;
  double disassembly = 0;
  double inspection = 0;
  double communication = 0;  // optional column, defaults to 0

  double total() const {
    return purchase + installation + replacement + disassembly + inspection +
           communication;
  }
};

/// Signal dataset with channel costs attached.
struct JoinedDataset {
  SignalDataset dataset;
  std::map<ChannelKey, double> total_cost;
  int unused_cost_rows = 0;  // cost rows with no matching channel
};

/// Maps the canonical signal-CSV column names onto the file's actual ones.
struct SignalSchema {
  std::string sensor_id = "sensor_id";
  std::string load_pct = "load_pct";
  std::string state_code = "state_code";
  std::string sample_index = "sample_index";
  std::string value = "value";
};

inline SignalDataset load_signals(const std::string& path,
                                  const SignalSchema& schema = {},
                                  int positive_code = 1) {
  auto table = csv::read_table(path);
  int c_sensor = table.require_column(schema.sensor_id, path);
  int c_load = table.require_column(schema.load_pct, path);
  int c_state = table.require_column(schema.state_code, path);
  int c_index = table.require_column(schema.sample_index, path);
  int c_value = table.require_column(schema.value, path);

  // (channel, state) -> (sample_index, value), then sort by index
  std::map<ChannelKey, std::map<int, std::vector<std::pair<long long, double>>>> groups;
  std::set<int> codes;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    std::string where = path + ":" + std::to_string(i + 2);
    ChannelKey key{row[c_sensor], row[c_load]};
    long long code = csv::parse_int(row[c_state], where);
    if (code <= 0) fail(ErrorKind::Data, "state code must be positive at " + where);
    long long index = csv::parse_int(row[c_index], where);
    double value = csv::parse_double(row[c_value], where);
    if (!std::isfinite(value))
      fail(ErrorKind::Data, "non-finite value at " + where);
    codes.insert(static_cast<int>(code));
    groups[key][static_cast<int>(code)].emplace_back(index, value);
  }
  if (groups.empty()) fail(ErrorKind::Shape, path + ": no data rows");

  SignalDataset ds;
  ds.positive_code = positive_code;
  for (int code : codes)
    ds.states.push_back({"state_" + std::to_string(code), code});

  std::size_t n = 0;
  for (auto& [key, states] : groups) {
    ChannelSeries ch;
    ch.key = key;
    for (auto& [code, samples] : states) {
      std::sort(samples.begin(), samples.end());
      for (std::size_t i = 1; i < samples.size(); ++i)
        if (samples[i].first == samples[i - 1].first)
          fail(ErrorKind::Data, "duplicate sample_index " +
                                    std::to_string(samples[i].first) + " in channel " +
                                    key.str() + " state " + std::to_string(code));
      std::vector<double> values;
      values.reserve(samples.size());
      for (auto& [idx, v] : samples) values.push_back(v);
      if (n == 0) n = values.size();
      ch.per_state_samples[code] = std::move(values);
    }
    ds.channels.push_back(std::move(ch));
  }
  ds.samples_per_state = n;
  ds.validate();
  return ds;
}

/// Canonical CSV emission: channels in key order, states ascending,
/// samples re-indexed 0..N-1. load(write(ds)) is byte-stable.
inline void write_signals(const SignalDataset& ds, const std::string& path) {
  csv::Writer out(path);
  out.row({"sensor_id", "load_pct", "state_code", "sample_index", "value"});
  for (const auto& ch : ds.channels)
    for (const auto& [code, samples] : ch.per_state_samples)
      for (std::size_t i = 0; i < samples.size(); ++i)
        out.row({ch.key.sensor_id, ch.key.load_pct, csv::format((long long)code),
                 csv::format((long long)i), csv::format(samples[i])});
}

inline std::vector<CostProfile> load_costs(const std::string& path) {
  auto table = csv::read_table(path);
  int c_sensor = table.require_column("sensor_id", path);
  int c_load = table.require_column("load_pct", path);
  const char* names[] = {"purchase", "installation", "replacement", "disassembly",
                         "inspection"};
  int cols[5];
  for (int i = 0; i < 5; ++i) cols[i] = table.require_column(names[i], path);
  int c_comm = table.column("communication");

  std::vector<CostProfile> costs;
  std::set<ChannelKey> seen;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    std::string where = path + ":" + std::to_string(i + 2);
    CostProfile cp;
    cp.key = {row[c_sensor], row[c_load]};
    if (!seen.insert(cp.key).second)
      fail(ErrorKind::Conflict, "duplicate cost row for channel " + cp.key.str());
    double* fields[] = {&cp.purchase, &cp.installation, &cp.replacement,
                        &cp.disassembly, &cp.inspection};
    for (int f = 0; f < 5; ++f) {
      *fields[f] = csv::parse_double(row[cols[f]], where);
      if (*fields[f] < 0)
        fail(ErrorKind::Data, std::string("negative ") + names[f] + " cost at " + where);
    }
    if (c_comm >= 0) {
      cp.communication = csv::parse_double(row[c_comm], where);
      if (cp.communication < 0)
        fail(ErrorKind::Data, "negative communication cost at " + where);
    }
    if (!(cp.total() > 0))
      fail(ErrorKind::Data, "total cost must be positive at " + where);
    costs.push_back(cp);
  }
  std::sort(costs.begin(), costs.end(),
            [](const CostProfile& a, const CostProfile& b) { return a.key < b.key; });
  return costs;
}

inline void write_costs(const std::vector<CostProfile>& costs, const std::string& path) {
  bool with_comm = std::any_of(costs.begin(), costs.end(),
                               [](const CostProfile& c) { return c.communication != 0; });
  csv::Writer out(path);
  std::vector<std::string> header = {"sensor_id",    "load_pct",    "purchase",
                                     "installation", "replacement", "disassembly",
                                     "inspection"};
  if (with_comm) header.push_back("communication");
  out.row(header);
  for (const auto& cp : costs) {
    std::vector<std::string> row = {cp.key.sensor_id,           cp.key.load_pct,
                                    csv::format(cp.purchase),   csv::format(cp.installation),
                                    csv::format(cp.replacement), csv::format(cp.disassembly),
                                    csv::format(cp.inspection)};
    if (with_comm) row.push_back(csv::format(cp.communication));
    out.row(row);
  }
}

/// Attach total costs to channels. Every channel must have exactly one
/// cost row; extra cost rows are tolerated and counted.
inline JoinedDataset join(const SignalDataset& ds, const std::vector<CostProfile>& costs) {
  JoinedDataset joined;
  joined.dataset = ds;
  std::map<ChannelKey, double> by_key;
  for (const auto& cp : costs) by_key[cp.key] = cp.total();

  std::vector<std::string> missing;
  std::set<ChannelKey> used;
  for (const auto& ch : ds.channels) {
    auto it = by_key.find(ch.key);
    if (it == by_key.end()) {
      missing.push_back(ch.key.str());
    } else {
      joined.total_cost[ch.key] = it->second;
      used.insert(ch.key);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    fail(ErrorKind::Join, "no cost row for channel(s): " + list);
  }
  joined.unused_cost_rows = static_cast<int>(by_key.size() - used.size());
  return joined;
}

}  // namespace deasel
