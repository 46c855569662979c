#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "scenecat/data.hpp"

namespace scenecat::testing {

// Constant-velocity straight track, consecutive frames.
inline Track const_track(long id, long first_frame, int frames, double x0, double vx,
                         double y, int lane) {
  Track t;
  t.id = id;
  for (int f = 0; f < frames; ++f) {
    TrackPoint p;
    p.frame = first_frame + f;
    p.x = x0 + vx * f / kFrameRateHz;
    p.y = y;
    p.vx = vx;
    p.vy = 0;
    p.lane_id = lane;
    t.points.push_back(p);
  }
  return t;
}

// Switches the lane id (and shifts y by one lane width) from `change_frame`.
inline void change_lane_at(Track& t, long change_frame, int new_lane, double new_y) {
  for (TrackPoint& p : t.points)
    if (p.frame >= change_frame) {
      p.lane_id = new_lane;
      p.y = new_y;
    }
}

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string tracks_csv(const std::vector<Track>& tracks) {
  std::string out = "frame,id,x,y,xVelocity,yVelocity,laneId\n";
  for (const Track& t : tracks)
    for (const TrackPoint& p : t.points) {
      out += std::to_string(p.frame) + ',' + std::to_string(t.id) + ',' + g17(p.x) + ',' +
             g17(p.y) + ',' + g17(p.vx) + ',' + g17(p.vy) + ',' + std::to_string(p.lane_id) +
             '\n';
    }
  return out;
}

inline std::string meta_csv(double frame_rate = 25.0) {
  return "id,frameRate,locationId\n1," + g17(frame_rate) + ",2\n";
}

}  // namespace scenecat::testing
