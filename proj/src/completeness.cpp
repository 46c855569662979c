#include "scenecat/completeness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "json.hpp"

namespace scenecat {

void CompletenessConfig::validate() const {
  if (p_new_values.empty()) throw ConfigError("need at least one p_new value");
  for (double p : p_new_values)
    if (!(p >= 0.0 && p < 1.0))
      throw ConfigError("p_new must lie in [0,1), got " + std::to_string(p));
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0,1)");
  if (!(confidence_c > 0.0)) throw ConfigError("confidence constant must be positive");
  if (!(standard_error > 0.0)) throw ConfigError("standard error must be positive");
  if (pilot_count < 2) throw ConfigError("pilot count must be at least 2");
  if (max_sims < static_cast<std::uint64_t>(pilot_count))
    throw ConfigError("simulation cap must be at least the pilot count");
}

std::vector<double> inject_new_category(const std::vector<double>& probs, double p_new) {
  if (p_new < 0.0 || p_new >= 1.0)
    throw ConfigError("p_new must lie in [0,1), got " + std::to_string(p_new));
  double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9)
    throw ConfigError("probabilities sum to " + std::to_string(total) + ", expected 1");
  if (p_new == 0.0) return probs;

  std::vector<double> out;
  out.reserve(probs.size() + 1);
  for (double p : probs) out.push_back(p * (1.0 - p_new));
  out.push_back(p_new);
  return out;
}

long simulate_collection(const std::vector<double>& probs, std::mt19937_64& rng) {
  for (double p : probs)
    if (!(p > 0.0))
      throw ConfigError("collection over a zero-probability category never terminates");
  AliasTable table(probs);
  return collect_until_complete(table.size(), [&] { return table.sample(rng); });
}

PilotResult pilot(const std::vector<double>& probs, long count, std::uint64_t seed,
                  std::uint64_t stream_tag) {
  if (count < 2) throw ConfigError("pilot needs at least 2 runs");
  for (double p : probs)
    if (!(p > 0.0))
      throw ConfigError("collection over a zero-probability category never terminates");

  AliasTable table(probs);
  PilotResult result;
  result.samples.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) {
    auto rng = seeded_engine(seed, {0x636f6cu, stream_tag, static_cast<std::uint64_t>(i)});
    result.samples.push_back(
        collect_until_complete(table.size(), [&] { return table.sample(rng); }));
  }

  double sum = 0;
  for (long s : result.samples) sum += static_cast<double>(s);
  result.mean = sum / static_cast<double>(count);
  double sq = 0;
  for (long s : result.samples) {
    double d = static_cast<double>(s) - result.mean;
    sq += d * d;
  }
  result.stddev = std::sqrt(sq / static_cast<double>(count - 1));
  return result;
}

std::uint64_t required_sims(double stddev, double c, double e) {
  if (stddev < 0) throw ConfigError("standard deviation must be >= 0");
  if (!(e > 0)) throw ConfigError("standard error must be positive");
  double value = c * c * stddev * stddev / (e * e);
  return static_cast<std::uint64_t>(std::ceil(value));
}

long s_min(std::vector<long> samples, double tau) {
  if (samples.empty()) throw ConfigError("S_min needs at least one sample");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0,1)");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  for (std::size_t k = 1; k <= samples.size(); ++k)
    if (static_cast<double>(k) / n >= tau) return samples[k - 1];
  return samples.back();  // unreachable: k = n gives ratio 1 ≥ τ
}

CompletenessReport completeness_report(const CategoryDistribution& distribution,
                                       const CompletenessConfig& config) {
  config.validate();

  CompletenessReport report;
  report.tau = config.tau;

  std::vector<double> probs;
  probs.reserve(distribution.probabilities.size());
  for (double p : distribution.probabilities) {
    if (p > 0.0)
      probs.push_back(p);
    else
      report.zero_categories_dropped++;
  }
  if (probs.empty()) throw ConfigError("all categories have zero probability");
  if (report.zero_categories_dropped > 0)
    report.warnings.push_back(std::to_string(report.zero_categories_dropped) +
                              " zero-probability categories dropped before injection");
  report.category_count = static_cast<int>(probs.size());

  // renormalize exactly after dropping (counts-derived probabilities keep
  // their ratios; the drop removes only exact zeros so this is a no-op in the
  // usual case, but guards against accumulated rounding)
  double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= total;

  double min_known = *std::min_element(probs.begin(), probs.end());

  for (std::size_t pi = 0; pi < config.p_new_values.size(); ++pi) {
    const double p_new = config.p_new_values[pi];
    CompletenessEntry entry;
    entry.p_new = p_new;

    std::vector<double> extended = inject_new_category(probs, p_new);
    if (p_new >= min_known * (1.0 - p_new))
      report.warnings.push_back("p_new " + std::to_string(p_new) +
                                " is not below every known scaled probability");

    PilotResult pr = pilot(extended, config.pilot_count, config.seed, pi);
    entry.pilot_mean = pr.mean;
    entry.pilot_stddev = pr.stddev;
    entry.required = required_sims(pr.stddev, config.confidence_c, config.standard_error);

    // pilot samples are retained, so at least R runs exist; the cap bounds
    // the total from above
    std::uint64_t wanted = std::max(entry.required, static_cast<std::uint64_t>(config.pilot_count));
    entry.executed = std::min(wanted, config.max_sims);
    entry.cap_applied = wanted > config.max_sims;

    entry.collection_lengths = std::move(pr.samples);
    entry.collection_lengths.reserve(entry.executed);
    AliasTable table(extended);
    for (std::uint64_t i = static_cast<std::uint64_t>(config.pilot_count); i < entry.executed;
         ++i) {
      auto rng = seeded_engine(config.seed, {0x636f6cu, pi, i});
      entry.collection_lengths.push_back(
          collect_until_complete(table.size(), [&] { return table.sample(rng); }));
    }

    entry.s_min = s_min(entry.collection_lengths, config.tau);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

namespace {

std::map<long, long> histogram(const std::vector<long>& values) {
  std::map<long, long> h;
  for (long v : values) h[v]++;
  return h;
}

}  // namespace

void write_completeness_json(const std::string& path, const CompletenessReport& report) {
  nlohmann::json js;
  js["tau"] = report.tau;
  js["category_count"] = report.category_count;
  js["zero_categories_dropped"] = report.zero_categories_dropped;
  js["warnings"] = report.warnings;
  nlohmann::json entries = nlohmann::json::array();
  for (const CompletenessEntry& e : report.entries) {
    nlohmann::json ej;
    ej["p_new"] = e.p_new;
    ej["pilot_mean"] = e.pilot_mean;
    ej["pilot_stddev"] = e.pilot_stddev;
    ej["required_sims"] = e.required;
    ej["executed_sims"] = e.executed;
    ej["cap_applied"] = e.cap_applied;
    ej["s_min"] = e.s_min;
    auto h = histogram(e.collection_lengths);
    ej["s_i_min"] = h.begin()->first;
    ej["s_i_max"] = h.rbegin()->first;
    entries.push_back(std::move(ej));
  }
  js["per_p_new"] = entries;

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << js.dump(2) << "\n";
}

void write_si_histogram_csv(const std::string& path, const CompletenessReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "p_new,s_i,count\n";
  for (const CompletenessEntry& e : report.entries) {
    char pbuf[40];
    std::snprintf(pbuf, sizeof(pbuf), "%.17g", e.p_new);
    for (const auto& [value, count] : histogram(e.collection_lengths))
      out << pbuf << ',' << value << ',' << count << '\n';
  }
}

}  // namespace scenecat
