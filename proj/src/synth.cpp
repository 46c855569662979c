#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "scenecat/data.hpp"
#include "scenecat/rng.hpp"

namespace scenecat {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kRampFrames = 50;       // lateral maneuver duration
constexpr int kTrackFrames = kTimeSteps + kLabelHorizonFrames;  // 125

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

int lane_of(double y, double lane_width, int lane_count) {
  int lane = static_cast<int>(std::floor(y / lane_width)) + 1;
  return std::clamp(lane, 1, lane_count);
}

struct Plan {
  BehaviorClass cls;
  int cluster = -1;
  int start_lane = 0;
  double base_speed = 0;
  std::uint32_t neighbor_mask = 0;  // bit (slot-1) set → slot populated
  int ramp_start = 0;               // frame the lateral maneuver begins
  double jitter_amp = 0;            // lateral wobble, lane-keep only
  double jitter_phase = 0;
};

Track build_target_track(const Plan& plan, const SynthConfig& cfg) {
  const double dt = 1.0 / kFrameRateHz;
  const double w = cfg.lane_width;
  const double y_center = (plan.start_lane - 0.5) * w;
  double delta = 0.0;
  if (plan.cls == BehaviorClass::kLaneChangeLeft) delta = -w;
  if (plan.cls == BehaviorClass::kLaneChangeRight) delta = w;

  Track track;
  track.id = 0;
  track.points.reserve(kTrackFrames);
  for (int f = 0; f < kTrackFrames; ++f) {
    TrackPoint p;
    p.frame = f;
    p.x = 1000.0 + plan.base_speed * f * dt;
    p.vx = plan.base_speed;
    p.y = y_center;
    p.vy = 0.0;
    if (delta != 0.0 && f >= plan.ramp_start) {
      int s = std::min(f - plan.ramp_start, kRampFrames);
      double phase = kPi * s / kRampFrames;
      p.y += delta * (1.0 - std::cos(phase)) / 2.0;
      if (s < kRampFrames)
        p.vy = delta * kPi / (2.0 * kRampFrames) * std::sin(phase) * kFrameRateHz;
    } else if (delta == 0.0) {
      double arg = 2.0 * kPi * f / kTimeSteps + plan.jitter_phase;
      p.y += plan.jitter_amp * std::sin(arg);
      p.vy = plan.jitter_amp * (2.0 * kPi / kTimeSteps) * std::cos(arg) * kFrameRateHz;
    }
    p.lane_id = lane_of(p.y, w, cfg.lane_count);
    track.points.push_back(p);
  }
  return track;
}

// relative longitudinal placement per role, in meters from the target
struct RolePlacement {
  int lane_offset;  // -1 left, 0 same, +1 right
  double dx_lo, dx_hi;
};

constexpr RolePlacement kRolePlacements[kVehicleSlots] = {
    {0, 0, 0},        // target, unused
    {0, 12, 45},      // lead same
    {0, -45, -12},    // rear same
    {-1, 12, 45},     // lead left
    {-1, -45, -12},   // rear left
    {-1, -8, 8},      // alongside left
    {1, 12, 45},      // lead right
    {1, -45, -12},    // rear right
    {1, -8, 8},       // alongside right
};

void fill_neighbors(Scenario& scenario, const Plan& plan, const SynthConfig& cfg,
                    const Track& target, std::mt19937_64& rng) {
  const double dt = 1.0 / kFrameRateHz;
  const double w = cfg.lane_width;
  for (int slot = 1; slot < kVehicleSlots; ++slot) {
    const RolePlacement& role = kRolePlacements[slot];
    int lane = plan.start_lane + role.lane_offset;
    bool wanted = (plan.neighbor_mask >> (slot - 1)) & 1u;
    if (!wanted || lane < 1 || lane > cfg.lane_count) continue;

    scenario.presence[slot] = true;
    double dx0 = uniform_in(rng, role.dx_lo, role.dx_hi);
    double speed = plan.base_speed + uniform_in(rng, -2.0, 2.0);
    double y = (lane - 0.5) * w + uniform_in(rng, -0.3, 0.3) * cfg.noise;
    double x0 = target.points[0].x + dx0;
    for (int t = 0; t < kTimeSteps; ++t) {
      scenario.at(slot, kFeatX, t) = x0 + speed * t * dt;
      scenario.at(slot, kFeatY, t) = y;
      scenario.at(slot, kFeatVx, t) = speed;
      scenario.at(slot, kFeatVy, t) = 0.0;
    }
  }
}

}  // namespace

void SynthConfig::validate() const {
  for (int c = 0; c < kClassCount; ++c)
    if (per_class[c] <= 0)
      throw ConfigError(std::string("per-class scenario count for '") +
                        to_string(behavior_from_index(c)) + "' must be positive, got " +
                        std::to_string(per_class[c]));
  if (clusters < 0) throw ConfigError("cluster count must be >= 0");
  if (clusters > 0 && clusters < kClassCount)
    throw ConfigError("clustered mode needs at least " + std::to_string(kClassCount) +
                      " clusters, got " + std::to_string(clusters));
  if (lane_count < 2) throw ConfigError("need at least 2 lanes for lane changes");
  if (clusters > 0 && lane_count < 3)
    throw ConfigError("clustered mode places targets mid-lane and needs >= 3 lanes");
  if (!(lane_width > 0)) throw ConfigError("lane width must be positive");
  if (!(speed_min > 0) || !(speed_max > speed_min))
    throw ConfigError("speed range must satisfy 0 < min < max");
  if (noise < 0) throw ConfigError("noise scale must be >= 0");
}

Dataset synth_generate(const SynthConfig& config, std::uint64_t seed) {
  return synth_generate(config, seed, nullptr);
}

Dataset synth_generate(const SynthConfig& config, std::uint64_t seed, SynthTrace* trace) {
  config.validate();

  // clusters available to each class, in clustered mode
  std::array<std::vector<int>, kClassCount> class_clusters;
  if (config.clusters > 0)
    for (int k = 0; k < config.clusters; ++k) class_clusters[k % kClassCount].push_back(k);

  Dataset out;
  if (trace) {
    trace->target_tracks.clear();
    trace->window_end_frames.clear();
  }

  std::uint64_t serial = 0;
  for (int c = 0; c < kClassCount; ++c) {
    for (int j = 0; j < config.per_class[c]; ++j, ++serial) {
      auto rng = seeded_engine(seed, {0x73796eu, serial});
      Plan plan;
      plan.cls = behavior_from_index(c);
      plan.ramp_start = 50 + static_cast<int>(bounded_index(rng, 11));

      if (config.clusters > 0) {
        const auto& pool = class_clusters[c];
        plan.cluster = pool[static_cast<std::size_t>(j) % pool.size()];
        plan.start_lane = (config.lane_count + 1) / 2;
        double band = (plan.cluster + 0.5) / config.clusters;
        plan.base_speed = config.speed_min + (config.speed_max - config.speed_min) * band +
                          uniform_in(rng, -0.5, 0.5) * config.noise;
        plan.neighbor_mask = static_cast<std::uint32_t>(plan.cluster) & 0xFFu;
      } else {
        switch (plan.cls) {
          case BehaviorClass::kLaneChangeLeft:
            plan.start_lane = 2 + static_cast<int>(bounded_index(rng, config.lane_count - 1));
            break;
          case BehaviorClass::kLaneChangeRight:
            plan.start_lane = 1 + static_cast<int>(bounded_index(rng, config.lane_count - 1));
            break;
          case BehaviorClass::kLaneKeep:
            plan.start_lane = 1 + static_cast<int>(bounded_index(rng, config.lane_count));
            break;
        }
        plan.base_speed = uniform_in(rng, config.speed_min, config.speed_max);
        plan.neighbor_mask = 0;
        for (int slot = 1; slot < kVehicleSlots; ++slot)
          if (uniform_unit(rng) < 0.55) plan.neighbor_mask |= 1u << (slot - 1);
      }
      if (plan.cls == BehaviorClass::kLaneKeep) {
        plan.jitter_amp = std::min(0.3 * config.noise, 0.2 * config.lane_width);
        plan.jitter_phase = uniform_in(rng, 0.0, 2.0 * kPi);
      }

      Track target = build_target_track(plan, config);
      Scenario scenario;
      scenario.label = plan.cls;
      for (int t = 0; t < kTimeSteps; ++t) {
        const TrackPoint& p = target.points[static_cast<std::size_t>(t)];
        scenario.at(0, kFeatX, t) = p.x;
        scenario.at(0, kFeatY, t) = p.y;
        scenario.at(0, kFeatVx, t) = p.vx;
        scenario.at(0, kFeatVy, t) = p.vy;
      }
      fill_neighbors(scenario, plan, config, target, rng);
      scenario = transform_to_target_frame(std::move(scenario));
      validate_scenario(scenario);

      out.scenarios.push_back(std::move(scenario));
      if (trace) {
        trace->target_tracks.push_back(std::move(target));
        trace->window_end_frames.push_back(kTimeSteps - 1);
      }
    }
  }

  // decorrelate storage order from class order
  std::vector<std::size_t> order(out.scenarios.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto shuffle_rng = seeded_engine(seed, {0x73796eu, 0xFFFFu});
  deterministic_shuffle(order, shuffle_rng);

  Dataset shuffled;
  shuffled.split_tag = out.split_tag;
  shuffled.scenarios.reserve(out.scenarios.size());
  SynthTrace shuffled_trace;
  for (std::size_t idx : order) {
    shuffled.scenarios.push_back(std::move(out.scenarios[idx]));
    if (trace) {
      shuffled_trace.target_tracks.push_back(std::move(trace->target_tracks[idx]));
      shuffled_trace.window_end_frames.push_back(trace->window_end_frames[idx]);
    }
  }
  if (trace) *trace = std::move(shuffled_trace);
  return shuffled;
}

}  // namespace scenecat
