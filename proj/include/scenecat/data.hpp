#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scenecat/common.hpp"

namespace scenecat {

// Class ordering is (lcl, kl, lcr) everywhere: files, matrices, one-hots.
enum class BehaviorClass : int {
  kLaneChangeLeft = 0,
  kLaneKeep = 1,
  kLaneChangeRight = 2,
};

const char* to_string(BehaviorClass c);
BehaviorClass behavior_from_index(int index);

// Slot roles relative to the target vehicle. Slot 0 is always the target.
enum class SlotRole : int {
  kTarget = 0,
  kLeadSame = 1,
  kRearSame = 2,
  kLeadLeft = 3,
  kRearLeft = 4,
  kSideLeft = 5,
  kLeadRight = 6,
  kRearRight = 7,
  kSideRight = 8,
};

// One observed traffic situation: a 9x4x75 value grid (slot-major, feature
// order x, y, vx, vy) plus the target's future behavior class. Absent slots
// are zero-filled and flagged in `presence`.
struct Scenario {
  std::vector<double> values;  // kScenarioDim entries
  std::array<bool, kVehicleSlots> presence{};
  BehaviorClass label = BehaviorClass::kLaneKeep;

  Scenario() : values(kScenarioDim, 0.0) { presence[0] = true; }

  static int index(int slot, int feature, int t) {
    return (slot * kFeatureCount + feature) * kTimeSteps + t;
  }
  double& at(int slot, int feature, int t) { return values[index(slot, feature, t)]; }
  double at(int slot, int feature, int t) const { return values[index(slot, feature, t)]; }
};

// Throws ConfigError describing the first violated invariant.
void validate_scenario(const Scenario& s);

struct Dataset {
  std::vector<Scenario> scenarios;
  std::string split_tag = "full";

  std::array<long, kClassCount> class_counts() const;
  std::size_t size() const { return scenarios.size(); }
};

// Per-feature standardization statistics, computed over present slots only
// and applied to the full grid at model-input time.
struct FeatureStats {
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> stddev{};
};

FeatureStats compute_feature_stats(const Dataset& dataset);
void normalize_scenario(const Scenario& s, const FeatureStats& stats, double* out);
void denormalize_values(const double* in, const FeatureStats& stats, double* out);

// A raw vehicle track with consecutive frames.
struct TrackPoint {
  long frame = 0;
  double x = 0, y = 0, vx = 0, vy = 0;
  int lane_id = 0;
};

struct Track {
  long id = 0;
  std::vector<TrackPoint> points;

  long first_frame() const { return points.empty() ? 0 : points.front().frame; }
  long last_frame() const { return points.empty() ? -1 : points.back().frame; }
  const TrackPoint* at_frame(long frame) const;
};

// Future-behavior label of the target: lane id at window_end_frame compared
// against the first change within the next `horizon` frames. Lane ids
// decrease to the left (highD convention). Throws ConfigError when the track
// does not extend `horizon` frames past the window.
BehaviorClass label_scenario(const Track& target, long window_end_frame,
                             int horizon = kLabelHorizonFrames);

// Translates all present slots so the target's position at t=0 is the
// origin. Velocities unchanged; absent slots stay zero-filled.
Scenario transform_to_target_frame(Scenario s);

// Undersamples every class to the minimum class count. Deterministic given
// seed; scenario order within the result follows the input order.
Dataset balance_dataset(const Dataset& dataset, std::uint64_t seed);

// Class-stratified disjoint split. Both parts keep input ordering.
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset, double train_fraction,
                                          std::uint64_t seed);

// ---- synthetic generation ----------------------------------------------

struct SynthConfig {
  std::array<int, kClassCount> per_class{10, 10, 10};  // (lcl, kl, lcr)
  // 0 = continuous sampling; K > 0 = scenarios drawn from K well separated
  // motif clusters (distinct speed band + neighbor pattern per cluster).
  int clusters = 0;
  int lane_count = 3;
  double lane_width = 3.7;
  double speed_min = 23.0;  // m/s
  double speed_max = 37.0;
  double noise = 1.0;  // scales within-cluster jitter

  void validate() const;
};

Dataset synth_generate(const SynthConfig& config, std::uint64_t seed);

// Variant that also returns the generated target tracks and the observation
// window end frame per scenario, for label-consistency checks.
struct SynthTrace {
  std::vector<Track> target_tracks;
  std::vector<long> window_end_frames;
};
Dataset synth_generate(const SynthConfig& config, std::uint64_t seed, SynthTrace* trace);

// ---- highD-style ingestion ----------------------------------------------

struct IngestOptions {
  int window_stride = kTimeSteps;  // non-overlapping windows
  int horizon = kLabelHorizonFrames;
  // longitudinal |dx| at or below which an adjacent-lane vehicle counts as
  // "alongside" rather than lead/rear
  double alongside_range_m = 10.0;
};

struct IngestStats {
  std::size_t scenarios = 0;
  std::size_t windows_considered = 0;
  std::size_t skipped_short_horizon = 0;
  std::size_t skipped_no_target = 0;
};

// Reads a highD-format tracks CSV (columns frame, id, x, y, xVelocity,
// yVelocity, laneId) plus its recording meta CSV, windows every track into
// 75-frame scenarios and labels them. Malformed rows raise ParseError naming
// the line.
Dataset ingest_tracks(const std::string& tracks_path, const std::string& meta_path,
                      const IngestOptions& options = {}, IngestStats* stats = nullptr);

// Windowing core shared by ingestion and tests.
Dataset window_tracks(const std::vector<Track>& tracks, const IngestOptions& options,
                      IngestStats* stats);

}  // namespace scenecat
