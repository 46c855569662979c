#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scenecat/common.hpp"
#include "scenecat/metrics.hpp"
#include "scenecat/rng.hpp"

namespace scenecat {

struct CompletenessConfig {
  std::vector<double> p_new_values = {1e-3, 1e-4, 1e-5};
  double tau = 0.95;            // completeness confidence
  double confidence_c = 1.96;   // normal quantile for the sim-count bound
  double standard_error = 0.01; // target standard error e
  long pilot_count = 1000;      // R
  std::uint64_t max_sims = 100000;  // I_max
  std::uint64_t seed = 0;

  void validate() const;
};

// Scales the known probabilities by (1−p_new) and appends the new category.
// p_new = 0 returns the input unchanged (identity for oracle tests).
// Throws ConfigError unless 0 ≤ p_new < 1 and probs sums to 1 within 1e-9.
std::vector<double> inject_new_category(const std::vector<double>& probs, double p_new);

// Draws with replacement until every category index in [0, category_count)
// has appeared; returns the draw count. `next_category` is any callable
// yielding the next drawn index.
template <typename Source>
long collect_until_complete(int category_count, Source&& next_category) {
  std::vector<bool> seen(static_cast<std::size_t>(category_count), false);
  int remaining = category_count;
  long draws = 0;
  while (remaining > 0) {
    int k = next_category();
    ++draws;
    if (!seen[static_cast<std::size_t>(k)]) {
      seen[static_cast<std::size_t>(k)] = true;
      --remaining;
    }
  }
  return draws;
}

// One collection run over the alias table; throws ConfigError when any
// category has zero probability (the run would never terminate).
long simulate_collection(const std::vector<double>& probs, std::mt19937_64& rng);

struct PilotResult {
  double mean = 0;
  double stddev = 0;  // sample (Bessel-corrected) standard deviation
  std::vector<long> samples;
};

// R independent collection runs on per-simulation derived streams.
PilotResult pilot(const std::vector<double>& probs, long count, std::uint64_t seed,
                  std::uint64_t stream_tag = 0);

// ceil(c²σ²/e²)
std::uint64_t required_sims(double stddev, double c, double e);

// Smallest Y with |{S_i ≤ Y}| / n ≥ τ (empirical τ-quantile).
long s_min(std::vector<long> samples, double tau);

struct CompletenessEntry {
  double p_new = 0;
  double pilot_mean = 0;
  double pilot_stddev = 0;
  std::uint64_t required = 0;
  std::uint64_t executed = 0;
  bool cap_applied = false;
  long s_min = 0;
  std::vector<long> collection_lengths;  // all executed S_i
};

struct CompletenessReport {
  double tau = 0;
  int category_count = 0;           // nonzero input categories, before injection
  int zero_categories_dropped = 0;  // unused entries removed from the distribution
  std::vector<CompletenessEntry> entries;
  std::vector<std::string> warnings;
};

// Full analysis: per p_new, inject → pilot(R) → required_sims → extend to
// min(max(required, R), I_max) runs (pilot retained) → S_min(τ).
// Deterministic per seed.
CompletenessReport completeness_report(const CategoryDistribution& distribution,
                                       const CompletenessConfig& config);

// JSON report (all scalar fields, S_i histogram summary) and the raw
// per-p_new S_i histogram CSV.
void write_completeness_json(const std::string& path, const CompletenessReport& report);
void write_si_histogram_csv(const std::string& path, const CompletenessReport& report);

}  // namespace scenecat
