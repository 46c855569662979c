#include "scenecat/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scenecat/rng.hpp"

namespace scenecat {

const char* to_string(BehaviorClass c) {
  switch (c) {
    case BehaviorClass::kLaneChangeLeft:
      return "lcl";
    case BehaviorClass::kLaneKeep:
      return "kl";
    case BehaviorClass::kLaneChangeRight:
      return "lcr";
  }
  return "?";
}

BehaviorClass behavior_from_index(int index) {
  if (index < 0 || index >= kClassCount)
    throw ConfigError("behavior class index out of range: " + std::to_string(index));
  return static_cast<BehaviorClass>(index);
}

void validate_scenario(const Scenario& s) {
  if (s.values.size() != static_cast<std::size_t>(kScenarioDim))
    throw ConfigError("scenario has " + std::to_string(s.values.size()) + " values, expected " +
                      std::to_string(kScenarioDim));
  if (!s.presence[0]) throw ConfigError("scenario target slot (0) marked absent");
  for (double v : s.values)
    if (!std::isfinite(v)) throw ConfigError("scenario contains a non-finite value");
  for (int slot = 0; slot < kVehicleSlots; ++slot) {
    if (s.presence[slot]) continue;
    for (int f = 0; f < kFeatureCount; ++f)
      for (int t = 0; t < kTimeSteps; ++t)
        if (s.at(slot, f, t) != 0.0)
          throw ConfigError("absent slot " + std::to_string(slot) + " has nonzero values");
  }
  int label = static_cast<int>(s.label);
  if (label < 0 || label >= kClassCount)
    throw ConfigError("scenario label out of range: " + std::to_string(label));
}

std::array<long, kClassCount> Dataset::class_counts() const {
  std::array<long, kClassCount> counts{};
  for (const Scenario& s : scenarios) counts[static_cast<int>(s.label)]++;
  return counts;
}

FeatureStats compute_feature_stats(const Dataset& dataset) {
  if (dataset.scenarios.empty()) throw ConfigError("cannot compute feature stats of empty dataset");
  FeatureStats stats;
  std::array<double, kFeatureCount> sum{}, sumsq{};
  long n = 0;
  for (const Scenario& s : dataset.scenarios) {
    for (int slot = 0; slot < kVehicleSlots; ++slot) {
      if (!s.presence[slot]) continue;
      for (int f = 0; f < kFeatureCount; ++f) {
        for (int t = 0; t < kTimeSteps; ++t) {
          double v = s.at(slot, f, t);
          sum[f] += v;
          sumsq[f] += v * v;
        }
      }
      ++n;
    }
  }
  double count = static_cast<double>(n) * kTimeSteps;
  for (int f = 0; f < kFeatureCount; ++f) {
    stats.mean[f] = sum[f] / count;
    double var = sumsq[f] / count - stats.mean[f] * stats.mean[f];
    stats.stddev[f] = std::sqrt(std::max(var, 0.0));
    if (stats.stddev[f] < 1e-9) stats.stddev[f] = 1.0;  // constant feature: pass through
  }
  return stats;
}

void normalize_scenario(const Scenario& s, const FeatureStats& stats, double* out) {
  // absent slots stay exactly zero: standardizing their zero-fill would turn
  // them into large constant offsets (-mean/stddev) that dominate the grid
  for (int slot = 0; slot < kVehicleSlots; ++slot)
    for (int f = 0; f < kFeatureCount; ++f)
      for (int t = 0; t < kTimeSteps; ++t) {
        int i = Scenario::index(slot, f, t);
        out[i] = s.presence[slot] ? (s.values[i] - stats.mean[f]) / stats.stddev[f] : 0.0;
      }
}

void denormalize_values(const double* in, const FeatureStats& stats, double* out) {
  for (int slot = 0; slot < kVehicleSlots; ++slot)
    for (int f = 0; f < kFeatureCount; ++f)
      for (int t = 0; t < kTimeSteps; ++t) {
        int i = Scenario::index(slot, f, t);
        out[i] = in[i] * stats.stddev[f] + stats.mean[f];
      }
}

const TrackPoint* Track::at_frame(long frame) const {
  if (points.empty() || frame < first_frame() || frame > last_frame()) return nullptr;
  // frames are consecutive, so direct offset lookup works
  const TrackPoint& p = points[static_cast<std::size_t>(frame - first_frame())];
  return p.frame == frame ? &p : nullptr;
}

BehaviorClass label_scenario(const Track& target, long window_end_frame, int horizon) {
  const TrackPoint* now = target.at_frame(window_end_frame);
  if (now == nullptr)
    throw ConfigError("track " + std::to_string(target.id) + " has no frame " +
                      std::to_string(window_end_frame));
  if (target.last_frame() < window_end_frame + horizon)
    throw ConfigError("track " + std::to_string(target.id) + " ends " +
                      std::to_string(target.last_frame() - window_end_frame) +
                      " frames after the window, horizon needs " + std::to_string(horizon));
  int lane_now = now->lane_id;
  for (long f = window_end_frame + 1; f <= window_end_frame + horizon; ++f) {
    const TrackPoint* p = target.at_frame(f);
    if (p == nullptr)
      throw ConfigError("track " + std::to_string(target.id) + " missing frame " +
                        std::to_string(f) + " inside the label horizon");
    if (p->lane_id != lane_now)
      // highD lane ids grow to the right in driving direction
      return p->lane_id < lane_now ? BehaviorClass::kLaneChangeLeft
                                   : BehaviorClass::kLaneChangeRight;
  }
  return BehaviorClass::kLaneKeep;
}

Scenario transform_to_target_frame(Scenario s) {
  double x0 = s.at(0, kFeatX, 0);
  double y0 = s.at(0, kFeatY, 0);
  for (int slot = 0; slot < kVehicleSlots; ++slot) {
    if (!s.presence[slot]) continue;  // keep absent slots exactly zero
    for (int t = 0; t < kTimeSteps; ++t) {
      s.at(slot, kFeatX, t) -= x0;
      s.at(slot, kFeatY, t) -= y0;
    }
  }
  return s;
}

Dataset balance_dataset(const Dataset& dataset, std::uint64_t seed) {
  auto counts = dataset.class_counts();
  for (int c = 0; c < kClassCount; ++c)
    if (counts[c] == 0)
      throw ConfigError(std::string("cannot balance: class '") + to_string(behavior_from_index(c)) +
                        "' has no scenarios");
  long target = *std::min_element(counts.begin(), counts.end());

  // per class, pick `target` indices uniformly without replacement
  std::array<std::vector<std::size_t>, kClassCount> by_class;
  for (std::size_t i = 0; i < dataset.scenarios.size(); ++i)
    by_class[static_cast<int>(dataset.scenarios[i].label)].push_back(i);

  std::vector<bool> keep(dataset.scenarios.size(), false);
  for (int c = 0; c < kClassCount; ++c) {
    auto rng = seeded_engine(seed, {0x62616cu, static_cast<std::uint64_t>(c)});
    deterministic_shuffle(by_class[c], rng);
    for (long k = 0; k < target; ++k) keep[by_class[c][static_cast<std::size_t>(k)]] = true;
  }

  Dataset out;
  out.split_tag = dataset.split_tag;
  for (std::size_t i = 0; i < dataset.scenarios.size(); ++i)
    if (keep[i]) out.scenarios.push_back(dataset.scenarios[i]);
  return out;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction,
                                          std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ConfigError("train fraction must lie in (0, 1), got " + std::to_string(train_fraction));

  std::array<std::vector<std::size_t>, kClassCount> by_class;
  for (std::size_t i = 0; i < dataset.scenarios.size(); ++i)
    by_class[static_cast<int>(dataset.scenarios[i].label)].push_back(i);

  std::vector<bool> in_train(dataset.scenarios.size(), false);
  for (int c = 0; c < kClassCount; ++c) {
    auto rng = seeded_engine(seed, {0x73706cu, static_cast<std::uint64_t>(c)});
    deterministic_shuffle(by_class[c], rng);
    long size = static_cast<long>(by_class[c].size());
    long n_train = std::lround(train_fraction * static_cast<double>(size));
    // keep both parts non-empty whenever the class has at least two members
    if (size >= 2) n_train = std::clamp<long>(n_train, 1, size - 1);
    else n_train = size;
    for (long k = 0; k < n_train; ++k) in_train[by_class[c][static_cast<std::size_t>(k)]] = true;
  }

  Dataset train, test;
  train.split_tag = "train";
  test.split_tag = "test";
  for (std::size_t i = 0; i < dataset.scenarios.size(); ++i)
    (in_train[i] ? train : test).scenarios.push_back(dataset.scenarios[i]);
  return {std::move(train), std::move(test)};
}

}  // namespace scenecat
