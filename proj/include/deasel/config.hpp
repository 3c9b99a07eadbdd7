#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "deasel/classifiers.hpp"
#include "deasel/csv.hpp"
#include "deasel/dea.hpp"
#include "deasel/error.hpp"
#include "deasel/signal_metrics.hpp"

namespace deasel {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

/// Parse a flat `section.key = value` file. `#` starts a comment line;
/// blank lines are skipped; anything else must carry an `=`.
inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Config, "cannot open config file " + path);
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto text = detail::trim(line);
    if (text.empty() || text[0] == '#') continue;
    auto eq = text.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::Config,
           path + ":" + std::to_string(line_no) + ": expected `key = value`");
    auto key = detail::trim(text.substr(0, eq));
    auto value = detail::trim(text.substr(eq + 1));
    if (key.empty())
      fail(ErrorKind::Config, path + ":" + std::to_string(line_no) + ": empty key");
    if (entries.count(key))
      fail(ErrorKind::Config,
           path + ":" + std::to_string(line_no) + ": duplicate key " + key);
    entries[key] = value;
  }
  return entries;
}

/// Every tunable of the toolchain, one dotted key per field.
struct PipelineConfig {
  std::string signals_path = "signals.csv";   // paths.signals
  std::string costs_path = "costs.csv";       // paths.costs
  std::string out_dir = "out";                // paths.out
  int positive_code = 1;                      // data.positive
  int denoise_levels = 0;                     // denoise.levels (0 = auto)
  TrendMode trend_mode = TrendMode::Normalized;  // trend.mode
  std::size_t trend_max_lag = 0;              // trend.max_lag (0 = auto)
  bool cap_detectability = false;             // detect.cap
  double detectability_ceiling = 1e6;         // detect.ceiling
  std::string dea_model = "all";              // dea.model
  double dea_eps = 1e-6;                      // dea.eps
  double dea_threshold = 1.0 - 1e-6;          // dea.threshold
  bool normalize_additive = true;             // dea.normalize_additive
  std::string classifier = "all";             // classify.kind
  std::vector<double> knn_grid = {1, 3, 5, 7, 9};  // classify.knn_grid
  std::vector<double> svm_grid = {0.1, 1, 10};     // classify.svm_grid
  int svm_epochs = 200;                       // classify.epochs
  std::uint64_t split_seed = 42;              // split.seed
  std::uint64_t synth_seed = 42;              // synth.seed
  std::size_t synth_channels = 40;            // synth.channels
  std::size_t synth_good = 20;                // synth.good
  std::size_t synth_samples = 500;            // synth.samples

  static const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "paths.signals",    "paths.costs",           "paths.out",
        "data.positive",    "denoise.levels",
        "trend.mode",       "trend.max_lag",         "detect.cap",
        "detect.ceiling",   "dea.model",             "dea.eps",
        "dea.threshold",    "dea.normalize_additive", "classify.kind",
        "classify.knn_grid", "classify.svm_grid",    "classify.epochs",
        "split.seed",       "synth.seed",            "synth.channels",
        "synth.good",       "synth.samples"};
    return keys;
  }

  void set(const std::string& key, const std::string& raw);
  void apply(const std::map<std::string, std::string>& entries) {
    for (const auto& [key, value] : entries) set(key, value);
  }
  void validate() const;

  std::vector<DeaModel> models() const {
    if (dea_model == "all")
      return {DeaModel::Ccr, DeaModel::BccInput, DeaModel::BccOutput,
              DeaModel::Additive};
    return {parse_model(dea_model)};
  }
  std::vector<ClassifierKind> classifiers() const {
    if (classifier == "all")
      return {ClassifierKind::Knn, ClassifierKind::Gnb, ClassifierKind::Svm};
    return {parse_classifier(classifier)};
  }
};

namespace detail {

inline double config_double(const std::string& key, const std::string& raw) {
  try {
    return csv::parse_double(raw, key);
  } catch (const Error&) {
    fail(ErrorKind::Config, key + ": expected a number, got '" + raw + "'");
  }
}

inline long long config_int(const std::string& key, const std::string& raw) {
  try {
    return csv::parse_int(raw, key);
  } catch (const Error&) {
    fail(ErrorKind::Config, key + ": expected an integer, got '" + raw + "'");
  }
}

inline bool config_bool(const std::string& key, const std::string& raw) {
  std::string v = raw;
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorKind::Config, key + ": expected a boolean, got '" + raw + "'");
}

inline std::vector<double> config_grid(const std::string& key, const std::string& raw) {
  std::vector<double> grid;
  std::string buf;
  std::istringstream ss(raw);
  while (std::getline(ss, buf, ','))
    grid.push_back(config_double(key, trim(buf)));
  if (grid.empty()) fail(ErrorKind::Config, key + ": empty grid");
  return grid;
}

}  // namespace detail

inline void PipelineConfig::set(const std::string& key, const std::string& raw) {
  using detail::config_bool;
  using detail::config_double;
  using detail::config_grid;
  using detail::config_int;
  if (key == "paths.signals") signals_path = raw;
  else if (key == "paths.costs") costs_path = raw;
  else if (key == "paths.out") out_dir = raw;
  else if (key == "data.positive") positive_code = static_cast<int>(config_int(key, raw));
  else if (key == "denoise.levels") denoise_levels = static_cast<int>(config_int(key, raw));
  else if (key == "trend.mode") {
    if (raw == "normalized") trend_mode = TrendMode::Normalized;
    else if (raw == "literal") trend_mode = TrendMode::Literal;
    else fail(ErrorKind::Config, "trend.mode must be normalized or literal, got '" + raw + "'");
  } else if (key == "trend.max_lag") {
    auto v = config_int(key, raw);
    if (v < 0) fail(ErrorKind::Config, "trend.max_lag must be >= 0");
    trend_max_lag = static_cast<std::size_t>(v);
  } else if (key == "detect.cap") cap_detectability = config_bool(key, raw);
  else if (key == "detect.ceiling") detectability_ceiling = config_double(key, raw);
  else if (key == "dea.model") {
    if (raw != "all") parse_model(raw);  // validates the name
    dea_model = raw;
  } else if (key == "dea.eps") dea_eps = config_double(key, raw);
  else if (key == "dea.threshold") dea_threshold = config_double(key, raw);
  else if (key == "dea.normalize_additive") normalize_additive = config_bool(key, raw);
  else if (key == "classify.kind") {
    if (raw != "all") parse_classifier(raw);  // validates the name
    classifier = raw;
  } else if (key == "classify.knn_grid") knn_grid = config_grid(key, raw);
  else if (key == "classify.svm_grid") svm_grid = config_grid(key, raw);
  else if (key == "classify.epochs") svm_epochs = static_cast<int>(config_int(key, raw));
  else if (key == "split.seed") split_seed = static_cast<std::uint64_t>(config_int(key, raw));
  else if (key == "synth.seed") synth_seed = static_cast<std::uint64_t>(config_int(key, raw));
  else if (key == "synth.channels") {
    auto v = config_int(key, raw);
    if (v < 1) fail(ErrorKind::Config, "synth.channels must be positive");
    synth_channels = static_cast<std::size_t>(v);
  } else if (key == "synth.good") {
    auto v = config_int(key, raw);
    if (v < 0) fail(ErrorKind::Config, "synth.good must be >= 0");
    synth_good = static_cast<std::size_t>(v);
  } else if (key == "synth.samples") {
    auto v = config_int(key, raw);
    if (v < 1) fail(ErrorKind::Config, "synth.samples must be positive");
    synth_samples = static_cast<std::size_t>(v);
  } else {
    fail(ErrorKind::Config, "unknown config key '" + key + "'");
  }
}

inline void PipelineConfig::validate() const {
  if (!(dea_eps >= 0)) fail(ErrorKind::Config, "dea.eps must be >= 0");
  if (!(dea_threshold > 0) || dea_threshold > 1.0)
    fail(ErrorKind::Config, "dea.threshold must be in (0, 1]");
  if (svm_epochs < 1) fail(ErrorKind::Config, "classify.epochs must be >= 1");
  if (positive_code <= 0) fail(ErrorKind::Config, "data.positive must be positive");
  for (double k : knn_grid)
    if (k < 1 || k != std::floor(k))
      fail(ErrorKind::Config, "classify.knn_grid entries must be positive integers");
  for (double c : svm_grid)
    if (!(c > 0)) fail(ErrorKind::Config, "classify.svm_grid entries must be positive");
  if (synth_good > synth_channels)
    fail(ErrorKind::Config, "synth.good cannot exceed synth.channels");
  if (denoise_levels < 0) fail(ErrorKind::Config, "denoise.levels must be >= 0");
  if (dea_model != "all") {
    try {
      parse_model(dea_model);
    } catch (const Error&) {
      fail(ErrorKind::Config,
           "dea.model must be one of ccr, iobcc, oobcc, additive, all");
    }
  }
  if (classifier != "all") {
    try {
      parse_classifier(classifier);
    } catch (const Error&) {
      fail(ErrorKind::Config, "classify.kind must be one of knn, gnb, svm, all");
    }
  }
}

}  // namespace deasel
