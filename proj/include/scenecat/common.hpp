#pragma once

#include <stdexcept>
#include <string>

namespace scenecat {

// Fixed scenario geometry: 9 vehicle slots x 4 features x 75 time steps.
inline constexpr int kVehicleSlots = 9;
inline constexpr int kFeatureCount = 4;
inline constexpr int kTimeSteps = 75;
inline constexpr int kClassCount = 3;
inline constexpr int kScenarioDim = kVehicleSlots * kFeatureCount * kTimeSteps;

inline constexpr double kFrameRateHz = 25.0;

// Frames of future track inspected when labeling the target's behavior (2 s).
inline constexpr int kLabelHorizonFrames = 50;

// Feature indices within a vehicle slot.
inline constexpr int kFeatX = 0;
inline constexpr int kFeatY = 1;
inline constexpr int kFeatVx = 2;
inline constexpr int kFeatVy = 3;

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace scenecat
