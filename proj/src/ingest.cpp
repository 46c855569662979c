#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "scenecat/csv.hpp"
#include "scenecat/data.hpp"

namespace scenecat {

namespace {

std::vector<Track> read_tracks_csv(const std::string& path) {
  CsvReader reader(path);
  int col_frame = reader.column("frame");
  int col_id = reader.column("id");
  int col_x = reader.column("x");
  int col_y = reader.column("y");
  int col_vx = reader.column("xVelocity");
  int col_vy = reader.column("yVelocity");
  int col_lane = reader.column("laneId");

  std::map<long, Track> by_id;
  std::vector<std::string_view> row;
  while (reader.next_row(row)) {
    TrackPoint p;
    p.frame = reader.parse_long(row, col_frame, "frame");
    long id = reader.parse_long(row, col_id, "id");
    p.x = reader.parse_double(row, col_x, "x");
    p.y = reader.parse_double(row, col_y, "y");
    p.vx = reader.parse_double(row, col_vx, "xVelocity");
    p.vy = reader.parse_double(row, col_vy, "yVelocity");
    p.lane_id = static_cast<int>(reader.parse_long(row, col_lane, "laneId"));
    Track& track = by_id[id];
    track.id = id;
    track.points.push_back(p);
  }

  std::vector<Track> tracks;
  tracks.reserve(by_id.size());
  for (auto& [id, track] : by_id) {
    std::sort(track.points.begin(), track.points.end(),
              [](const TrackPoint& a, const TrackPoint& b) { return a.frame < b.frame; });
    for (std::size_t i = 1; i < track.points.size(); ++i)
      if (track.points[i].frame != track.points[i - 1].frame + 1)
        throw ParseError(path + ": track " + std::to_string(id) +
                         " has non-consecutive frames around " +
                         std::to_string(track.points[i - 1].frame));
    tracks.push_back(std::move(track));
  }
  return tracks;
}

void check_frame_rate(const std::string& meta_path) {
  CsvReader reader(meta_path);
  int col = reader.column("frameRate");
  std::vector<std::string_view> row;
  if (!reader.next_row(row)) throw ParseError(meta_path + ": no data row");
  double rate = reader.parse_double(row, col, "frameRate");
  if (rate != kFrameRateHz)
    throw ConfigError(meta_path + ": frame rate " + std::to_string(rate) + " Hz, expected " +
                      std::to_string(kFrameRateHz));
}

bool covers_window(const Track& t, long start, long end) {
  return t.first_frame() <= start && t.last_frame() >= end;
}

// Slot layout: 0 target, 1 lead same, 2 rear same, 3 lead left, 4 rear left,
// 5 alongside left, 6 lead right, 7 rear right, 8 alongside right.
int role_slot(int lane_offset, double dx_heading, double alongside_range) {
  if (lane_offset == 0) return dx_heading > 0 ? 1 : 2;
  int base = lane_offset < 0 ? 3 : 6;
  if (dx_heading > alongside_range) return base;       // lead
  if (dx_heading < -alongside_range) return base + 1;  // rear
  return base + 2;                                     // alongside
}

}  // namespace

Dataset window_tracks(const std::vector<Track>& tracks, const IngestOptions& options,
                      IngestStats* stats) {
  if (options.window_stride <= 0) throw ConfigError("window stride must be positive");
  if (options.horizon <= 0) throw ConfigError("labeling horizon must be positive");

  IngestStats local;
  Dataset out;
  for (const Track& target : tracks) {
    if (static_cast<long>(target.points.size()) < kTimeSteps) {
      local.skipped_no_target++;
      continue;
    }
    for (long start = target.first_frame(); start + kTimeSteps - 1 <= target.last_frame();
         start += options.window_stride) {
      long end = start + kTimeSteps - 1;
      local.windows_considered++;
      if (target.last_frame() < end + options.horizon) {
        local.skipped_short_horizon++;
        continue;
      }

      Scenario scenario;
      scenario.label = label_scenario(target, end, options.horizon);
      for (int t = 0; t < kTimeSteps; ++t) {
        const TrackPoint* p = target.at_frame(start + t);
        scenario.at(0, kFeatX, t) = p->x;
        scenario.at(0, kFeatY, t) = p->y;
        scenario.at(0, kFeatVx, t) = p->vx;
        scenario.at(0, kFeatVy, t) = p->vy;
      }

      // role assignment at the decision point (last observed frame);
      // nearest candidate per role wins
      const TrackPoint* target_end = target.at_frame(end);
      double heading = target_end->vx >= 0 ? 1.0 : -1.0;
      std::array<const Track*, kVehicleSlots> chosen{};
      std::array<double, kVehicleSlots> chosen_dist{};
      for (const Track& other : tracks) {
        if (&other == &target || !covers_window(other, start, end)) continue;
        const TrackPoint* p = other.at_frame(end);
        int lane_offset = p->lane_id - target_end->lane_id;
        if (lane_offset < -1 || lane_offset > 1) continue;
        double dx = p->x - target_end->x;
        int slot = role_slot(lane_offset, dx * heading, options.alongside_range_m);
        double dist = std::abs(dx);
        if (chosen[slot] == nullptr || dist < chosen_dist[slot]) {
          chosen[slot] = &other;
          chosen_dist[slot] = dist;
        }
      }
      for (int slot = 1; slot < kVehicleSlots; ++slot) {
        if (chosen[slot] == nullptr) continue;
        scenario.presence[slot] = true;
        for (int t = 0; t < kTimeSteps; ++t) {
          const TrackPoint* p = chosen[slot]->at_frame(start + t);
          scenario.at(slot, kFeatX, t) = p->x;
          scenario.at(slot, kFeatY, t) = p->y;
          scenario.at(slot, kFeatVx, t) = p->vx;
          scenario.at(slot, kFeatVy, t) = p->vy;
        }
      }

      scenario = transform_to_target_frame(std::move(scenario));
      validate_scenario(scenario);
      out.scenarios.push_back(std::move(scenario));
      local.scenarios++;
    }
  }
  if (stats) *stats = local;
  return out;
}

Dataset ingest_tracks(const std::string& tracks_path, const std::string& meta_path,
                      const IngestOptions& options, IngestStats* stats) {
  check_frame_rate(meta_path);
  std::vector<Track> tracks = read_tracks_csv(tracks_path);
  return window_tracks(tracks, options, stats);
}

}  // namespace scenecat
