#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "deasel/dataset.hpp"
#include "deasel/error.hpp"

namespace deasel {

/// The six per-channel signal-quality parameters. Monotonicity and
/// trendability live in [0,1], robustness in (0,1], the rest are >= 0.
struct ChannelMetrics {
  double monotonicity = 0;
  double robustness = 0;
  double trendability = 0;
  double detectability = 0;
  double variance = 0;
  double rms = 0;
};

struct DenoiseConfig {
  int levels = 0;  // 0 = auto: min(4, floor(log2(N)))
};

enum class TrendMode { Normalized, Literal };

namespace detail {

inline int max_levels(std::size_t n) {
  int lv = 0;
  while (n >= 2) {
    n /= 2;
    ++lv;
  }
  return lv;  // floor(log2(n))
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

constexpr double kInvSqrt2 = 0.70710678118654752440;

// One orthonormal Haar analysis step. An odd trailing sample is carried
// into the approximation unchanged.
inline void haar_forward(const std::vector<double>& s, std::vector<double>& approx,
                         std::vector<double>& detail) {
  std::size_t pairs = s.size() / 2;
  approx.resize(s.size() - pairs);
  detail.resize(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    approx[i] = (s[2 * i] + s[2 * i + 1]) * kInvSqrt2;
    detail[i] = (s[2 * i] - s[2 * i + 1]) * kInvSqrt2;
  }
  if (s.size() % 2) approx[pairs] = s.back();
}

inline void haar_inverse(const std::vector<double>& approx,
                         const std::vector<double>& detail, std::vector<double>& s) {
  std::size_t pairs = detail.size();
  s.resize(pairs + approx.size());
  for (std::size_t i = 0; i < pairs; ++i) {
    s[2 * i] = (approx[i] + detail[i]) * kInvSqrt2;
    s[2 * i + 1] = (approx[i] - detail[i]) * kInvSqrt2;
  }
  if (approx.size() > pairs) s[2 * pairs] = approx.back();
}

inline double soft_threshold(double d, double thr) {
  double mag = std::abs(d) - thr;
  return mag <= 0 ? 0.0 : (d < 0 ? -mag : mag);
}

}  // namespace detail

/// Multi-level Haar wavelet smoother: soft-thresholds every detail
/// coefficient at the universal threshold sigma*sqrt(2*ln N), sigma
/// estimated from the finest-level details as median(|d|)/0.6745.
inline std::vector<double> smooth(const std::vector<double>& samples,
                                  const DenoiseConfig& cfg = {}) {
  std::size_t n = samples.size();
  if (n < 2) fail(ErrorKind::Shape, "smooth needs at least 2 samples");
  int cap = detail::max_levels(n);
  int levels = cfg.levels == 0 ? std::min(4, cap) : cfg.levels;
  if (levels < 0 || levels > cap)
    fail(ErrorKind::Config, "denoise levels " + std::to_string(levels) +
                                " too deep for length " + std::to_string(n) +
                                " (max " + std::to_string(cap) + ")");

  std::vector<std::vector<double>> details(levels);
  std::vector<double> approx = samples, next;
  for (int lv = 0; lv < levels; ++lv) {
    detail::haar_forward(approx, next, details[lv]);
    approx.swap(next);
  }

  std::vector<double> abs_finest = details[0];
  for (double& d : abs_finest) d = std::abs(d);
  double sigma = detail::median(abs_finest) / 0.6745;
  double thr = sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));

  for (auto& level : details)
    for (double& d : level) d = detail::soft_threshold(d, thr);

  for (int lv = levels - 1; lv >= 0; --lv) {
    detail::haar_inverse(approx, details[lv], next);
    approx.swap(next);
  }
  return approx;
}

/// Universal threshold the smoother would apply to `samples`; exposed for
/// tests that reason about how far smoothing can move a sample.
inline double smooth_threshold(const std::vector<double>& samples,
                               const DenoiseConfig& cfg = {}) {
  std::size_t n = samples.size();
  if (n < 2) fail(ErrorKind::Shape, "smooth needs at least 2 samples");
  std::vector<double> approx, det;
  detail::haar_forward(samples, approx, det);
  for (double& d : det) d = std::abs(d);
  return detail::median(det) / 0.6745 * std::sqrt(2.0 * std::log(static_cast<double>(n)));
}

/// Mean over states of |#rising - #falling| / (N-1); zero differences
/// count in neither tally.
inline double monotonicity(const ChannelSeries& ch) {
  double sum = 0;
  for (const auto& [code, x] : ch.per_state_samples) {
    if (x.size() < 2)
      fail(ErrorKind::Shape, "monotonicity needs >= 2 samples per state");
    long long pos = 0, neg = 0;
    for (std::size_t i = 1; i < x.size(); ++i) {
      double d = x[i] - x[i - 1];
      if (d > 0) ++pos;
      else if (d < 0) ++neg;
    }
    sum += static_cast<double>(std::llabs(pos - neg)) / static_cast<double>(x.size() - 1);
  }
  return sum / static_cast<double>(ch.state_count());
}

/// Robustness against the smoother's residual: mean over states of the
/// mean of exp(-|res/x|). Samples with |x| < 1e-12 are excluded and the
/// denominator adjusted; a state with no usable samples contributes 1
/// (its residual is identically zero).
template <class Smoother>
double robustness_with(const ChannelSeries& ch, Smoother&& smoother) {
  double sum = 0;
  for (const auto& [code, x] : ch.per_state_samples) {
    std::vector<double> sm = smoother(x);
    double acc = 0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::abs(x[i]) < 1e-12) continue;
      acc += std::exp(-std::abs((x[i] - sm[i]) / x[i]));
      ++used;
    }
    sum += used ? acc / static_cast<double>(used) : 1.0;
  }
  return sum / static_cast<double>(ch.state_count());
}

inline double robustness(const ChannelSeries& ch, const DenoiseConfig& cfg = {}) {
  return robustness_with(
      ch, [&cfg](const std::vector<double>& x) { return smooth(x, cfg); });
}

namespace detail {

// Pearson autocorrelation at lag tau; 0 when the state has no variance.
inline double autocorrelation(const std::vector<double>& x, std::size_t tau) {
  std::size_t n = x.size();
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  if (var <= 0) return 0.0;
  double cov = 0;
  for (std::size_t t = tau; t < n; ++t)
    cov += (x[t] - mean) * (x[t - tau] - mean);
  return cov / var;
}

}  // namespace detail

inline int default_max_lag(std::size_t n) {
  return std::max(1, static_cast<int>(std::min<std::size_t>(50, n / 4)));
}

/// Normalized mode: mean over states of (1/max_lag) * sum_{tau=1..max_lag}
/// |r(tau)|, in [0,1]. Literal mode: the raw double sum of |x_t * x_{t-tau}|
/// averaged over states.
inline double trendability(const ChannelSeries& ch, int max_lag = 0,
                           TrendMode mode = TrendMode::Normalized) {
  double sum = 0;
  for (const auto& [code, x] : ch.per_state_samples) {
    std::size_t n = x.size();
    int lag_cap = max_lag == 0 ? default_max_lag(n) : max_lag;
    if (lag_cap < 1 || static_cast<std::size_t>(lag_cap) >= n)
      fail(ErrorKind::Parameter,
           "max_lag must be in [1, N-1]; got " + std::to_string(lag_cap) +
               " for N=" + std::to_string(n));
    if (mode == TrendMode::Normalized) {
      double acc = 0;
      for (int tau = 1; tau <= lag_cap; ++tau)
        acc += std::abs(detail::autocorrelation(x, static_cast<std::size_t>(tau)));
      sum += acc / static_cast<double>(lag_cap);
    } else {
      double acc = 0;
      for (int tau = 1; tau <= lag_cap; ++tau)
        for (std::size_t t = static_cast<std::size_t>(tau); t < n; ++t)
          acc += std::abs(x[t] * x[t - static_cast<std::size_t>(tau)]);
      sum += acc;
    }
  }
  return sum / static_cast<double>(ch.state_count());
}

/// Fisher discriminant ratio: between-state scatter over within-state
/// scatter, for scalar samples. Throws on zero within-state scatter.
inline double detectability(const ChannelSeries& ch) {
  if (ch.state_count() < 2)
    fail(ErrorKind::Shape, "detectability needs >= 2 states");
  double grand_sum = 0;
  std::size_t total = 0;
  std::map<int, double> means;
  for (const auto& [code, x] : ch.per_state_samples) {
    double s = std::accumulate(x.begin(), x.end(), 0.0);
    means[code] = s / static_cast<double>(x.size());
    grand_sum += s;
    total += x.size();
  }
  double grand = grand_sum / static_cast<double>(total);
  double between = 0, within = 0;
  for (const auto& [code, x] : ch.per_state_samples) {
    double m = means[code];
    between += static_cast<double>(x.size()) * (m - grand) * (m - grand);
    for (double v : x) within += (v - m) * (v - m);
  }
  if (within <= 0)
    fail(ErrorKind::Data, "zero within-state scatter in channel " + ch.key.str());
  return between / within;
}

/// Mean over states of the sample variance (N-1 denominator).
inline double variance(const ChannelSeries& ch) {
  double sum = 0;
  for (const auto& [code, x] : ch.per_state_samples) {
    if (x.size() < 2) fail(ErrorKind::Shape, "variance needs >= 2 samples per state");
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double acc = 0;
    for (double v : x) acc += (v - mean) * (v - mean);
    sum += acc / static_cast<double>(x.size() - 1);
  }
  return sum / static_cast<double>(ch.state_count());
}

/// Mean over states of sqrt(mean(x^2)).
inline double rms(const ChannelSeries& ch) {
  double sum = 0;
  for (const auto& [code, x] : ch.per_state_samples) {
    if (x.empty()) fail(ErrorKind::Shape, "rms needs >= 1 sample per state");
    double acc = 0;
    for (double v : x) acc += v * v;
    sum += std::sqrt(acc / static_cast<double>(x.size()));
  }
  return sum / static_cast<double>(ch.state_count());
}

struct CharacterizeOptions {
  DenoiseConfig denoise;
  TrendMode trend_mode = TrendMode::Normalized;
  int max_lag = 0;  // 0 = auto
  bool cap_detectability = false;
  double detectability_ceiling = 1e6;
};

struct ChannelIssue {
  ChannelKey key;
  std::string message;
};

struct CharacterizeResult {
  std::map<ChannelKey, ChannelMetrics> metrics;
  std::vector<ChannelIssue> flagged;  // channels excluded with the reason
};

/// Compute all six metrics for every channel. Per-channel failures (for
/// now only the detectability singularity) are collected, not thrown;
/// with cap_detectability the singular value is replaced by the ceiling
/// instead.
inline CharacterizeResult characterize(const JoinedDataset& joined,
                                       const CharacterizeOptions& opts = {}) {
  CharacterizeResult result;
  for (const auto& ch : joined.dataset.channels) {
    try {
      ChannelMetrics m;
      m.monotonicity = monotonicity(ch);
      m.robustness = robustness(ch, opts.denoise);
      m.trendability = trendability(ch, opts.max_lag, opts.trend_mode);
      try {
        m.detectability = detectability(ch);
        if (opts.cap_detectability)
          m.detectability = std::min(m.detectability, opts.detectability_ceiling);
      } catch (const Error& e) {
        if (!opts.cap_detectability) throw;
        m.detectability = opts.detectability_ceiling;
      }
      m.variance = variance(ch);
      m.rms = rms(ch);
      result.metrics[ch.key] = m;
    } catch (const Error& e) {
      result.flagged.push_back({ch.key, e.what()});
    }
  }
  return result;
}

inline void write_metrics_csv(const CharacterizeResult& result,
                              const std::map<ChannelKey, double>& total_cost,
                              const std::string& path) {
  csv::Writer out(path);
  out.row({"sensor_id", "load_pct", "monotonicity", "robustness", "trendability",
           "detectability", "variance", "rms", "total_cost"});
  for (const auto& [key, m] : result.metrics) {
    auto it = total_cost.find(key);
    if (it == total_cost.end())
      fail(ErrorKind::Join, "no total cost for channel " + key.str());
    out.row({key.sensor_id, key.load_pct, csv::format(m.monotonicity),
             csv::format(m.robustness), csv::format(m.trendability),
             csv::format(m.detectability), csv::format(m.variance),
             csv::format(m.rms), csv::format(it->second)});
  }
}

struct MetricsTable {
  std::map<ChannelKey, ChannelMetrics> metrics;
  std::map<ChannelKey, double> total_cost;
};

inline MetricsTable read_metrics_csv(const std::string& path) {
  auto table = csv::read_table(path);
  int c_sensor = table.require_column("sensor_id", path);
  int c_load = table.require_column("load_pct", path);
  const char* names[] = {"monotonicity", "robustness",   "trendability",
                         "detectability", "variance",    "rms",
                         "total_cost"};
  int cols[7];
  for (int i = 0; i < 7; ++i) cols[i] = table.require_column(names[i], path);

  MetricsTable out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    std::string where = path + ":" + std::to_string(i + 2);
    ChannelKey key{row[c_sensor], row[c_load]};
    if (out.metrics.count(key))
      fail(ErrorKind::Conflict, "duplicate metrics row for " + key.str());
    ChannelMetrics m;
    m.monotonicity = csv::parse_double(row[cols[0]], where);
    m.robustness = csv::parse_double(row[cols[1]], where);
    m.trendability = csv::parse_double(row[cols[2]], where);
    m.detectability = csv::parse_double(row[cols[3]], where);
    m.variance = csv::parse_double(row[cols[4]], where);
    m.rms = csv::parse_double(row[cols[5]], where);
    out.metrics[key] = m;
    out.total_cost[key] = csv::parse_double(row[cols[6]], where);
  }
  return out;
}

}  // namespace deasel
