#pragma once

#include <string>

#include "scenecat/data.hpp"

namespace scenecat {

// Writes a dataset container (values, labels, presence, per-feature stats).
void save_dataset(const Dataset& dataset, const std::string& path);

// Loads a dataset container; optionally returns the stored feature stats.
Dataset load_dataset(const std::string& path, FeatureStats* stats = nullptr);

}  // namespace scenecat
