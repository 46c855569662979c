#include "scenecat/dataset_io.hpp"

#include <cstdint>
#include <vector>

#include "scenecat/container.hpp"

namespace scenecat {

void save_dataset(const Dataset& dataset, const std::string& path) {
  const std::uint64_t m = dataset.scenarios.size();

  std::vector<double> values;
  values.reserve(m * kScenarioDim);
  std::vector<std::int64_t> labels;
  labels.reserve(m);
  std::vector<std::uint8_t> presence;
  presence.reserve(m * kVehicleSlots);
  for (const Scenario& s : dataset.scenarios) {
    validate_scenario(s);
    values.insert(values.end(), s.values.begin(), s.values.end());
    labels.push_back(static_cast<std::int64_t>(s.label));
    for (bool p : s.presence) presence.push_back(p ? 1 : 0);
  }

  ContainerWriter writer("scenecat.dataset");
  nlohmann::json meta;
  meta["split_tag"] = dataset.split_tag;
  meta["scenario_count"] = m;
  meta["slots"] = kVehicleSlots;
  meta["features"] = kFeatureCount;
  meta["time_steps"] = kTimeSteps;
  meta["class_names"] = {"lcl", "kl", "lcr"};
  writer.set_meta(meta);

  writer.add_f64("values", values.data(),
                 {m, static_cast<std::uint64_t>(kVehicleSlots),
                  static_cast<std::uint64_t>(kFeatureCount),
                  static_cast<std::uint64_t>(kTimeSteps)});
  writer.add_i64("labels", labels.data(), {m});
  writer.add_u8("presence", presence.data(), {m, static_cast<std::uint64_t>(kVehicleSlots)});

  if (m > 0) {
    FeatureStats stats = compute_feature_stats(dataset);
    writer.add_f64("feature_mean", stats.mean.data(),
                   {static_cast<std::uint64_t>(kFeatureCount)});
    writer.add_f64("feature_stddev", stats.stddev.data(),
                   {static_cast<std::uint64_t>(kFeatureCount)});
  }
  writer.write(path);
}

Dataset load_dataset(const std::string& path, FeatureStats* stats) {
  ContainerReader reader(path);
  if (reader.kind() != "scenecat.dataset")
    throw IoError("'" + path + "' is a '" + reader.kind() + "' container, expected a dataset");

  const Section& vs = reader.section("values");
  if (vs.shape.size() != 4 || vs.shape[1] != kVehicleSlots || vs.shape[2] != kFeatureCount ||
      vs.shape[3] != kTimeSteps)
    throw IoError("'" + path + "': unexpected values shape");
  std::uint64_t m = vs.shape[0];

  std::vector<double> values = reader.f64("values");
  std::vector<std::int64_t> labels = reader.i64("labels");
  std::vector<std::uint8_t> presence = reader.u8("presence");
  if (labels.size() != m || presence.size() != m * kVehicleSlots)
    throw IoError("'" + path + "': section sizes disagree");

  Dataset out;
  out.split_tag = reader.meta().value("split_tag", std::string("full"));
  out.scenarios.resize(m);
  for (std::uint64_t i = 0; i < m; ++i) {
    Scenario& s = out.scenarios[i];
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(i * kScenarioDim),
              values.begin() + static_cast<std::ptrdiff_t>((i + 1) * kScenarioDim),
              s.values.begin());
    s.label = behavior_from_index(static_cast<int>(labels[i]));
    for (int slot = 0; slot < kVehicleSlots; ++slot)
      s.presence[static_cast<std::size_t>(slot)] = presence[i * kVehicleSlots + slot] != 0;
    validate_scenario(s);
  }

  if (stats != nullptr && reader.has("feature_mean")) {
    std::vector<double> mean = reader.f64("feature_mean");
    std::vector<double> sd = reader.f64("feature_stddev");
    for (int f = 0; f < kFeatureCount; ++f) {
      stats->mean[f] = mean[static_cast<std::size_t>(f)];
      stats->stddev[f] = sd[static_cast<std::size_t>(f)];
    }
  }
  return out;
}

}  // namespace scenecat
