#pragma once

// Walking paths between activity locations.
//
// Paths come from A* on the layout grid (8-connected, heading kept in the
// search state so turns can be charged), are thinned to stride-length steps
// and then timed at a constant walking speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "adlsim/core.hpp"
#include "adlsim/floor_plan.hpp"
#include "adlsim/rng.hpp"

namespace adlsim {

struct AgentModel {
  double speed = 68.75;       // cm/s
  double body_radius = kBodyRadius;
  double fall_radius = kFallBodyRadius;
  double stride = 40.0;       // cm
};

/// Additive path cost: `length` per cm, `proximity` per cell entered closer
/// than `proximity_range` to an obstacle, `turn` per 45 degrees of heading
/// change, `stride_deviation` per cm a step falls short of the stride.
struct PathWeights {
  double length = 1.0;
  double proximity = 0.5;
  double proximity_range = 30.0;
  double turn = 0.2;
  double stride_deviation = 0.1;
};

class UnreachableError : public Error {
public:
  UnreachableError(GridLocation from, GridLocation to, const std::string& why)
      : Error("trajectory", "no path from (" + std::to_string(from.x) + ", " + std::to_string(from.y) + ") to (" +
                                std::to_string(to.x) + ", " + std::to_string(to.y) + "): " + why) {}
};

enum class TrajectoryPurpose { Normal, Wandering, Fall };

inline std::string_view to_string(TrajectoryPurpose p) {
  switch (p) {
    case TrajectoryPurpose::Normal: return "normal";
    case TrajectoryPurpose::Wandering: return "wandering";
    case TrajectoryPurpose::Fall: return "fall";
  }
  return "?";
}

/// `radius` is the body radius from this point until the next one. A point
/// with `hold` set starts a stationary fall hold that lasts until the next
/// point, which sits at the same location.
struct TrajectoryPoint {
  SimTime t;
  GridLocation location;
  double radius = kBodyRadius;
  bool hold = false;
  bool operator==(const TrajectoryPoint&) const = default;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  TrajectoryPurpose purpose = TrajectoryPurpose::Normal;
  std::vector<std::uint64_t> label_ids;
  std::int64_t transition = -1;  // index of the activity this walk leads into

  SimTime start() const { return points.front().t; }
  SimTime end() const { return points.back().t; }
  SimTime duration() const { return end() - start(); }
  bool operator==(const Trajectory&) const = default;
};

inline double path_length(const std::vector<GridLocation>& path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) len += distance(path[i - 1], path[i]);
  return len;
}

inline std::int64_t walk_ticks(double cm, const AgentModel& agent) {
  return std::llround(cm * static_cast<double>(kTicksPerSecond) / agent.speed);
}

inline SimTime walk_time(const std::vector<GridLocation>& path, const AgentModel& agent) {
  return SimTime(walk_ticks(path_length(path), agent));
}

/// Times `path` backward from `arrival`: the last point is at `arrival` and
/// each point precedes it by its remaining distance over the walking speed.
inline Trajectory timestamp_path(const std::vector<GridLocation>& path, const AgentModel& agent, SimTime arrival,
                                 std::optional<SimTime> earliest = std::nullopt) {
  if (path.empty()) throw Error("trajectory", "cannot time an empty path");
  const double total = path_length(path);
  Trajectory tr;
  double cum = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) cum += distance(path[i - 1], path[i]);
    tr.points.push_back({arrival - SimTime(walk_ticks(total - cum, agent)), path[i], agent.body_radius, false});
  }
  if (earliest && tr.start() < *earliest)
    throw Error("trajectory", "walk of " + format_time(tr.duration()) + " does not fit before " + format_time(arrival));
  return tr;
}

/// Times `path` forward from `departure`.
inline Trajectory timestamp_forward(const std::vector<GridLocation>& path, const AgentModel& agent, SimTime departure) {
  if (path.empty()) throw Error("trajectory", "cannot time an empty path");
  Trajectory tr;
  double cum = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) cum += distance(path[i - 1], path[i]);
    tr.points.push_back({departure + SimTime(walk_ticks(cum, agent)), path[i], agent.body_radius, false});
  }
  return tr;
}

class Planner {
public:
  explicit Planner(const FloorPlan& plan, AgentModel agent = {}, PathWeights weights = {})
      : plan_(plan), agent_(agent), w_(weights), pitch_(plan.pitch) {
    if (pitch_ <= 0) throw ConfigError("trajectory", "grid pitch must be positive");
    if (!(agent.speed > 0.0)) throw ConfigError("trajectory", "walking speed must be positive");
    nx_ = static_cast<int>(std::floor(plan.width / pitch_)) + 1;
    ny_ = static_cast<int>(std::floor(plan.height / pitch_)) + 1;
    free_.assign(static_cast<std::size_t>(nx_ * ny_), 0);
    near_.assign(free_.size(), 0);
    for (int y = 0; y < ny_; ++y)
      for (int x = 0; x < nx_; ++x) {
        const Point2 p{static_cast<double>(x * pitch_), static_cast<double>(y * pitch_)};
        const double c = plan.clearance(p);
        const auto i = static_cast<std::size_t>(y * nx_ + x);
        free_[i] = c >= agent.body_radius;
        near_[i] = c < w_.proximity_range;
        if (free_[i]) walkable_cells_.push_back({x * pitch_, y * pitch_});
      }
  }

  const FloorPlan& plan() const { return plan_; }
  const AgentModel& agent() const { return agent_; }
  const std::vector<GridLocation>& walkable_cells() const { return walkable_cells_; }

  bool on_grid(GridLocation g) const {
    return g.x % pitch_ == 0 && g.y % pitch_ == 0 && g.x >= 0 && g.y >= 0 && g.x / pitch_ < nx_ && g.y / pitch_ < ny_;
  }
  bool walkable_cell(GridLocation g) const { return on_grid(g) && free_[index(g.x / pitch_, g.y / pitch_)]; }

  /// True when a body of radius `r` can slide along the straight chord a-b.
  bool chord_walkable(GridLocation a, GridLocation b, double r) const {
    const double len = distance(a, b);
    const int steps = std::max(1, static_cast<int>(std::ceil(len / 2.0)));
    for (int s = 0; s <= steps; ++s) {
      const double f = static_cast<double>(s) / steps;
      const Point2 p{a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f};
      if (!plan_.contains(p) || plan_.clearance(p) < r) return false;
    }
    return true;
  }

  /// Collision-free path from `from` to `to`, thinned so that consecutive
  /// points are at most one stride apart. Endpoints are exact.
  std::vector<GridLocation> plan_path(GridLocation from, GridLocation to, bool use_cache = true) {
    if (!walkable_cell(from)) throw UnreachableError(from, to, "start is not a walkable grid cell");
    if (!walkable_cell(to)) throw UnreachableError(from, to, "goal is not a walkable grid cell");
    if (from == to) return {from};
    const std::uint64_t key = (static_cast<std::uint64_t>(index(from.x / pitch_, from.y / pitch_)) << 32) |
                              static_cast<std::uint64_t>(index(to.x / pitch_, to.y / pitch_));
    if (use_cache) {
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    auto path = thin(search(from, to));
    if (use_cache) {
      if (cache_.size() > 200000) cache_.clear();
      cache_.emplace(key, path);
    }
    return path;
  }

private:
  static constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  static constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};
  static constexpr int kNoHeading = 8;

  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y * nx_ + x); }

  double octile(int x0, int y0, int x1, int y1) const {
    const double dx = std::abs(x0 - x1), dy = std::abs(y0 - y1);
    return (std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy)) * pitch_ * w_.length;
  }

  std::vector<GridLocation> search(GridLocation from, GridLocation to) {
    const int sx = from.x / pitch_, sy = from.y / pitch_, gx = to.x / pitch_, gy = to.y / pitch_;
    const std::size_t n_states = free_.size() * 9;
    if (g_.size() != n_states) {
      g_.assign(n_states, 0.0);
      parent_.assign(n_states, -1);
      stamp_.assign(n_states, 0);
    }
    ++generation_;
    using Entry = std::pair<double, std::int32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    auto state = [&](std::size_t cell, int h) { return static_cast<std::int32_t>(cell * 9 + static_cast<std::size_t>(h)); };
    const auto s0 = state(index(sx, sy), kNoHeading);
    g_[s0] = 0.0;
    parent_[s0] = -1;
    stamp_[s0] = generation_;
    open.push({octile(sx, sy, gx, gy), s0});
    const double diag = std::sqrt(2.0) * pitch_;
    while (!open.empty()) {
      const auto [f, s] = open.top();
      open.pop();
      const auto cell = static_cast<std::size_t>(s) / 9;
      const int heading = s % 9;
      const int x = static_cast<int>(cell) % nx_, y = static_cast<int>(cell) / nx_;
      const double gs = g_[s];
      if (f > gs + octile(x, y, gx, gy) + 1e-9) continue;  // stale entry
      if (x == gx && y == gy) {
        std::vector<GridLocation> path;
        for (std::int32_t c = s; c >= 0; c = parent_[c]) {
          const auto cc = static_cast<std::size_t>(c) / 9;
          path.push_back({static_cast<int>(cc) % nx_ * pitch_, static_cast<int>(cc) / nx_ * pitch_});
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      for (int d = 0; d < 8; ++d) {
        const int x2 = x + kDx[d], y2 = y + kDy[d];
        if (x2 < 0 || y2 < 0 || x2 >= nx_ || y2 >= ny_ || !free_[index(x2, y2)]) continue;
        const bool diagonal = kDx[d] != 0 && kDy[d] != 0;
        if (diagonal && (!free_[index(x2, y)] || !free_[index(x, y2)])) continue;
        double cost = (diagonal ? diag : pitch_) * w_.length;
        if (near_[index(x2, y2)]) cost += w_.proximity;
        if (heading != kNoHeading) {
          const int turn = std::abs(heading - d);
          cost += w_.turn * std::min(turn, 8 - turn);
        }
        const auto s2 = state(index(x2, y2), d);
        const double g2 = gs + cost;
        if (stamp_[s2] == generation_ && g_[s2] <= g2) continue;
        stamp_[s2] = generation_;
        g_[s2] = g2;
        parent_[s2] = s;
        open.push({g2 + octile(x2, y2, gx, gy), s2});
      }
    }
    throw UnreachableError(from, to, "goal lies in a disconnected region");
  }

  // Greedy stride fitting: from each kept point, jump to the path cell that
  // minimizes the stride-deviation charge (the farthest one within a stride)
  // among those reachable along a walkable chord.
  std::vector<GridLocation> thin(const std::vector<GridLocation>& raw) const {
    std::vector<GridLocation> out{raw.front()};
    std::size_t i = 0;
    while (i + 1 < raw.size()) {
      std::size_t best = i + 1;
      double best_cost = w_.stride_deviation * (agent_.stride - distance(raw[i], raw[i + 1]));
      for (std::size_t j = i + 2; j < raw.size(); ++j) {
        const double d = distance(raw[i], raw[j]);
        if (d > agent_.stride) break;
        const double cost = w_.stride_deviation * (agent_.stride - d);
        if (cost < best_cost && chord_walkable(raw[i], raw[j], agent_.body_radius)) {
          best = j;
          best_cost = cost;
        }
      }
      out.push_back(raw[best]);
      i = best;
    }
    return out;
  }

  const FloorPlan& plan_;
  AgentModel agent_;
  PathWeights w_;
  int pitch_;
  int nx_ = 0, ny_ = 0;
  std::vector<std::uint8_t> free_, near_;
  std::vector<GridLocation> walkable_cells_;
  std::vector<double> g_;
  std::vector<std::int32_t> parent_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t generation_ = 0;
  std::unordered_map<std::uint64_t, std::vector<GridLocation>> cache_;
};

inline std::vector<GridLocation> plan_path(const FloorPlan& plan, GridLocation from, GridLocation to,
                                           const AgentModel& agent = {}, const PathWeights& weights = {}) {
  Planner p(plan, agent, weights);
  return p.plan_path(from, to, false);
}

/// Walk from `from` through uniformly random walkable staging points until the
/// walking time reaches `duration`, then on to `to`. Timed forward from
/// `departure`; at least one staging point is always visited.
inline Trajectory plan_wandering(Planner& planner, GridLocation from, GridLocation to, SimTime duration,
                                 SimTime departure, Rng& rng, int max_retries = 100) {
  const auto& cells = planner.walkable_cells();
  if (cells.empty()) throw Error("trajectory", "layout has no walkable cells for staging");
  std::vector<GridLocation> path{from};
  auto extend = [&](GridLocation target) {
    auto leg = planner.plan_path(path.back(), target, false);
    path.insert(path.end(), leg.begin() + 1, leg.end());
  };
  const SimTime min_walk = duration;
  int staged = 0, failures = 0;
  while (staged == 0 || walk_time(path, planner.agent()) < min_walk) {
    const auto target = cells[static_cast<std::size_t>(draw_index(rng, 0, static_cast<std::int64_t>(cells.size()) - 1))];
    if (target == path.back()) continue;
    try {
      extend(target);
      ++staged;
    } catch (const UnreachableError&) {
      if (++failures >= max_retries) throw;
    }
  }
  extend(to);
  Trajectory tr = timestamp_forward(path, planner.agent(), departure);
  tr.purpose = TrajectoryPurpose::Wandering;
  return tr;
}

enum class FallKind { WhileWalking, WhileStanding };

struct FallResult {
  SimTime hold_start;
  SimTime hold_end;
  GridLocation location;
  FallKind kind;                // as realized
  std::optional<std::string> note;  // set when a walking fall became a standing one
};

/// Inserts a stationary hold of `hold` ticks with the fall radius: at the
/// first point for a standing fall, at a uniformly random interior point
/// (walkable at the fall radius) for a walking fall. Later points shift by
/// `hold`.
inline FallResult inject_fall(Trajectory& tr, FallKind kind, Rng& rng, const AgentModel& agent = {},
                              const Planner* planner = nullptr, SimTime hold = SimTime::seconds(30)) {
  if (tr.points.empty()) throw Error("trajectory", "cannot inject a fall into an empty trajectory");
  auto in_hold = [&](std::size_t i) { return tr.points[i].hold || (i > 0 && tr.points[i - 1].hold); };
  FallResult res{};
  res.kind = kind;
  std::size_t h = 0;
  if (kind == FallKind::WhileWalking) {
    std::vector<std::size_t> interior;
    for (std::size_t i = 1; i + 1 < tr.points.size(); ++i) {
      if (in_hold(i)) continue;
      if (planner && !planner->chord_walkable(tr.points[i].location, tr.points[i].location, agent.fall_radius)) continue;
      interior.push_back(i);
    }
    if (interior.empty()) {
      res.kind = FallKind::WhileStanding;
      res.note = tr.points.size() < 3 ? "walking fall on a path without interior points, held at the start"
                                      : "no interior point has room for a fall, held at the start";
    } else {
      h = interior[static_cast<std::size_t>(draw_index(rng, 0, static_cast<std::int64_t>(interior.size()) - 1))];
    }
  }
  if (res.kind == FallKind::WhileStanding)
    while (h < tr.points.size() && tr.points[h].hold) ++h;  // stack after an earlier hold
  auto p = tr.points[h];
  for (std::size_t i = h + 1; i < tr.points.size(); ++i) tr.points[i].t += hold;
  tr.points[h].radius = agent.fall_radius;
  tr.points[h].hold = true;
  p.t += hold;
  p.hold = false;
  p.radius = agent.body_radius;
  tr.points.insert(tr.points.begin() + static_cast<std::ptrdiff_t>(h) + 1, p);
  res.hold_start = tr.points[h].t;
  res.hold_end = res.hold_start + hold;
  res.location = p.location;
  if (tr.purpose == TrajectoryPurpose::Normal) tr.purpose = TrajectoryPurpose::Fall;
  return res;
}

}  // namespace adlsim
