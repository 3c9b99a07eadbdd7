#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "deasel/dataset.hpp"
#include "deasel/error.hpp"
#include "deasel/rng.hpp"

namespace deasel {

/// Recipe for one synthetic channel. The signal is a strength-scaled ramp
/// plus a per-state mean shift plus Gaussian noise with sigma = 1/snr, so
/// the knobs map directly onto the quality metrics: trend drives
/// monotonicity and trendability, separation drives detectability, snr
/// drives robustness, and the cost range feeds the DEA input side.
struct ChannelSpec {
  std::string sensor_id;
  std::string load_pct = "0";
  double snr = 100.0;         // <= 0 or infinite means noise-free
  double trend_strength = 0;  // total rise of the ramp over one state
  double separation = 0;      // mean shift added per state index
  double cost_min = 100;      // bounds for the drawn total cost
  double cost_max = 200;
};

struct SynthSpec {
  std::vector<ChannelSpec> channels;
  std::vector<StateLabel> states = {{"healthy", 1}, {"faulty", 2}};
  std::size_t samples_per_state = 500;
  int positive_code = 1;
  std::uint64_t seed = 42;
};

struct SynthResult {
  SignalDataset dataset;
  std::vector<CostProfile> costs;
};

inline double noise_sigma(double snr) {
  if (!(snr > 0) || !std::isfinite(snr)) return 0.0;
  return 1.0 / snr;
}

/// Deterministic generation: one generator seeded from `spec.seed`, consumed
/// in channel-major, state-major, sample-minor order.
inline SynthResult generate(const SynthSpec& spec) {
  if (spec.channels.empty()) fail(ErrorKind::Parameter, "channel count must be positive");
  if (spec.samples_per_state == 0)
    fail(ErrorKind::Parameter, "samples per state must be positive");
  if (spec.states.size() < 2)
    fail(ErrorKind::Parameter, "need at least two states, got " +
                                   std::to_string(spec.states.size()));
  for (const auto& ch : spec.channels) {
    if (ch.sensor_id.empty()) fail(ErrorKind::Parameter, "empty sensor id");
    if (!(ch.cost_min > 0) || ch.cost_max < ch.cost_min)
      fail(ErrorKind::Parameter,
           "cost range for sensor " + ch.sensor_id + " must satisfy 0 < min <= max");
  }

  Rng rng(spec.seed);
  SynthResult out;
  out.dataset.states = spec.states;
  out.dataset.samples_per_state = spec.samples_per_state;
  out.dataset.positive_code = spec.positive_code;

  std::size_t n = spec.samples_per_state;
  double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  for (const auto& ch : spec.channels) {
    double total = uniform(rng, ch.cost_min, ch.cost_max);
    CostProfile cost;
    cost.key = {ch.sensor_id, ch.load_pct};
    cost.purchase = 0.40 * total;
    cost.installation = 0.15 * total;
    cost.replacement = 0.20 * total;
    cost.disassembly = 0.15 * total;
    cost.inspection = 0.10 * total;
    out.costs.push_back(cost);

    ChannelSeries series;
    series.key = cost.key;
    double sigma = noise_sigma(ch.snr);
    for (std::size_t s = 0; s < spec.states.size(); ++s) {
      auto& samples = series.per_state_samples[spec.states[s].code];
      samples.reserve(n);
      for (std::size_t t = 0; t < n; ++t) {
        double value = ch.trend_strength * (static_cast<double>(t) / denom) +
                       ch.separation * static_cast<double>(s);
        if (sigma > 0) value += sigma * normal01(rng);
        samples.push_back(value);
      }
    }
    out.dataset.channels.push_back(std::move(series));
  }
  out.dataset.validate();
  return out;
}

/// The stock benchmark layout: the first group is clean, trending, well
/// separated and cheap; the second is noise at a higher price. Parameters
/// vary deterministically with the channel index so the frontier has more
/// than one shape.
inline SynthSpec two_group_spec(std::size_t good, std::size_t bad,
                                std::size_t samples_per_state = 500,
                                std::uint64_t seed = 42) {
  if (good == 0 || bad == 0)
    fail(ErrorKind::Parameter, "both channel groups must be non-empty");
  SynthSpec spec;
  spec.samples_per_state = samples_per_state;
  spec.seed = seed;
  for (std::size_t i = 0; i < good + bad; ++i) {
    ChannelSpec ch;
    ch.sensor_id = std::to_string(i + 1);
    if (i < good) {
      ch.snr = 5000.0 + 500.0 * static_cast<double>(i);
      ch.trend_strength = 0.3 + 0.4 * static_cast<double>(i % 7) / 6.0;
      ch.separation = 4.0 + 2.0 * static_cast<double>(i % 5) / 4.0;
      ch.cost_min = 500;
      ch.cost_max = 700;
    } else {
      ch.snr = 0.7 + 0.8 * static_cast<double>(i % 4) / 3.0;
      ch.trend_strength = 0;
      ch.separation = 0;
      ch.cost_min = 800;
      ch.cost_max = 1000;
    }
    spec.channels.push_back(std::move(ch));
  }
  return spec;
}

}  // namespace deasel
