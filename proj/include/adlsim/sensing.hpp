#pragma once

// Binary sensor sampling on a 10 Hz master clock and the change-only log.
//
// PIR fires while the body disc touches its detection disc and the body moved
// since the previous tick; a pressure mat fires while the body disc overlaps
// it; power/flow sensors read their appliance once per second.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "adlsim/core.hpp"
#include "adlsim/floor_plan.hpp"
#include "adlsim/trajectory.hpp"

namespace adlsim {

class BitVector {
public:
  BitVector() = default;
  explicit BitVector(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

  std::size_t size() const { return n_; }
  bool get(std::size_t i) const { return (w_[i / 64] >> (i % 64)) & 1U; }
  void set(std::size_t i, bool v) {
    const std::uint64_t m = std::uint64_t{1} << (i % 64);
    if (v) w_[i / 64] |= m;
    else w_[i / 64] &= ~m;
  }
  void clear() { std::fill(w_.begin(), w_.end(), 0); }
  bool any() const {
    return std::any_of(w_.begin(), w_.end(), [](std::uint64_t x) { return x != 0; });
  }

  /// '0'/'1' per bit in index order.
  std::string to_string() const {
    std::string s(n_, '0');
    for (std::size_t i = 0; i < n_; ++i)
      if (get(i)) s[i] = '1';
    return s;
  }
  static BitVector from_string(std::string_view s) {
    BitVector b(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != '0' && s[i] != '1') throw Error("sensing", "bit string may only contain 0 and 1");
      b.set(i, s[i] == '1');
    }
    return b;
  }

  bool operator==(const BitVector&) const = default;

private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> w_;
};

struct LoggedFrame {
  std::int64_t index = 0;
  BitVector bits;
  bool operator==(const LoggedFrame&) const = default;
};

/// Change-only record: the first frame and every frame that differs from its
/// predecessor, out of `n_samples` frames taken every `period`.
struct CompressedLog {
  std::size_t n_bits = 0;
  std::int64_t n_samples = 0;
  SimTime period = SimTime(1);
  std::vector<LoggedFrame> frames;
  bool operator==(const CompressedLog&) const = default;
};

inline CompressedLog compress(const std::vector<BitVector>& stream) {
  CompressedLog log;
  log.n_samples = static_cast<std::int64_t>(stream.size());
  if (stream.empty()) return log;
  log.n_bits = stream.front().size();
  for (std::size_t i = 0; i < stream.size(); ++i) {
    if (stream[i].size() != log.n_bits) throw Error("sensing", "frame width changes within the stream");
    if (i == 0 || !(stream[i] == log.frames.back().bits))
      log.frames.push_back({static_cast<std::int64_t>(i), stream[i]});
  }
  return log;
}

inline void check_log(const CompressedLog& log) {
  if (log.n_samples == 0) {
    if (!log.frames.empty()) throw Error("sensing", "malformed log: frames stored for an empty stream");
    return;
  }
  if (log.frames.empty() || log.frames.front().index != 0)
    throw Error("sensing", "malformed log: the first frame must be stored");
  for (std::size_t k = 0; k < log.frames.size(); ++k) {
    const auto& f = log.frames[k];
    if (f.bits.size() != log.n_bits) throw Error("sensing", "malformed log: frame width mismatch");
    if (f.index >= log.n_samples) throw Error("sensing", "malformed log: index beyond the stream");
    if (k > 0 && f.index <= log.frames[k - 1].index)
      throw Error("sensing", "malformed log: indices must strictly increase");
  }
}

inline std::vector<BitVector> decompress(const CompressedLog& log) {
  check_log(log);
  std::vector<BitVector> out;
  out.reserve(static_cast<std::size_t>(log.n_samples));
  for (std::size_t k = 0; k < log.frames.size(); ++k) {
    const std::int64_t until = k + 1 < log.frames.size() ? log.frames[k + 1].index : log.n_samples;
    for (std::int64_t i = log.frames[k].index; i < until; ++i) out.push_back(log.frames[k].bits);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Timeline
// ---------------------------------------------------------------------------

/// Everything the sensors can observe: where the resident stands between
/// walks, the walks themselves and when each appliance draws power.
struct SensorTimeline {
  GridLocation initial;
  std::vector<Trajectory> trajectories;  // sorted, non-overlapping
  std::map<std::string, std::vector<std::pair<SimTime, SimTime>>> appliance_on;  // merged [begin, end)
  SimTime horizon;
};

inline std::vector<std::pair<SimTime, SimTime>> merge_intervals(std::vector<std::pair<SimTime, SimTime>> v) {
  std::sort(v.begin(), v.end());
  std::vector<std::pair<SimTime, SimTime>> out;
  for (const auto& iv : v) {
    if (iv.second <= iv.first) continue;
    if (!out.empty() && iv.first <= out.back().second) out.back().second = std::max(out.back().second, iv.second);
    else out.push_back(iv);
  }
  return out;
}

namespace detail {

struct BodyState {
  Point2 pos;
  double radius = kBodyRadius;
};

inline BodyState body_on(const Trajectory& tr, std::int64_t tick, std::size_t& seg) {
  const auto& p = tr.points;
  while (seg + 1 < p.size() && p[seg + 1].t.count() <= tick) ++seg;
  if (seg + 1 >= p.size()) return {to_point(p.back().location), p.back().radius};
  const auto& a = p[seg];
  const auto& b = p[seg + 1];
  const double f = static_cast<double>(tick - a.t.count()) / static_cast<double>((b.t - a.t).count());
  return {{a.location.x + (b.location.x - a.location.x) * f, a.location.y + (b.location.y - a.location.y) * f},
          a.radius};
}

inline bool disc_hit(const SensorSpec& s, const BodyState& b) {
  return distance(to_point(s.position), b.pos) < s.radius + b.radius;
}

}  // namespace detail

using FrameSink = std::function<void(std::int64_t index, const BitVector& bits)>;

/// Streams frames of the change-only log to `sink` in index order.
class SensorSampler {
public:
  SensorSampler(const std::vector<SensorSpec>& sensors, const SensorTimeline& tl) : sensors_(sensors), tl_(tl) {
    for (const auto& s : sensors_)
      if (s.kind == SensorKind::COST) {
        auto it = tl_.appliance_on.find(s.appliance);
        cost_.push_back(it == tl_.appliance_on.end() ? nullptr : &it->second);
      } else {
        cost_.push_back(nullptr);
      }
  }

  std::int64_t samples() const { return tl_.horizon.count(); }

  /// `fast` skips runs of ticks during which no sensor can change.
  void run(const FrameSink& sink, bool fast = true) {
    const std::int64_t n = samples();
    if (n <= 0) return;
    const std::size_t nb = sensors_.size();
    BitVector frame(nb), last(nb);
    sink(0, frame);  // all sensors start off
    std::vector<bool> cost_state(nb, false);
    std::vector<std::size_t> cost_ptr(nb, 0);

    std::size_t k = 0;     // next trajectory not yet finished
    std::size_t seg = 0;   // segment within trajectory k
    GridLocation rest = tl_.initial;
    detail::BodyState prev{to_point(rest), kBodyRadius};

    for (std::int64_t i = 1; i < n;) {
      // Body at tick i.
      while (k < tl_.trajectories.size() && tl_.trajectories[k].end().count() < i) {
        rest = tl_.trajectories[k].points.back().location;
        ++k;
        seg = 0;
      }
      detail::BodyState body{to_point(rest), kBodyRadius};
      bool walking = false;
      if (k < tl_.trajectories.size() && tl_.trajectories[k].start().count() <= i) {
        body = detail::body_on(tl_.trajectories[k], i, seg);
        walking = true;
      }
      const bool moved = !(body.pos == prev.pos);

      for (std::size_t b = 0; b < nb; ++b) {
        const auto& s = sensors_[b];
        switch (s.kind) {
          case SensorKind::PIR: frame.set(b, moved && detail::disc_hit(s, body)); break;
          case SensorKind::PR: frame.set(b, detail::disc_hit(s, body)); break;
          case SensorKind::COST:
            if (i % 10 == 0) cost_state[b] = appliance_on(b, i, cost_ptr[b]);
            frame.set(b, cost_state[b]);
            break;
        }
      }
      if (!(frame == last)) {
        sink(i, frame);
        last = frame;
      }
      prev = body;

      std::int64_t next = i + 1;
      if (fast && !walking && !moved) {
        // Nothing but power sensors can change until the next walk starts moving.
        std::int64_t until = k < tl_.trajectories.size() ? tl_.trajectories[k].start().count() : n;
        const std::int64_t sampled = i / 10 * 10;  // tick whose power reading is held
        if (sampled == 0) until = std::min<std::int64_t>(until, 10);
        for (std::size_t b = 0; b < nb; ++b)
          if (sensors_[b].kind == SensorKind::COST) until = std::min(until, next_cost_change(b, sampled, cost_ptr[b]));
        next = std::max(next, std::min(until, n));
      }
      i = next;
    }
  }

private:
  bool appliance_on(std::size_t b, std::int64_t tick, std::size_t& ptr) const {
    const auto* iv = cost_[b];
    if (!iv) return false;
    while (ptr < iv->size() && (*iv)[ptr].second.count() <= tick) ++ptr;
    return ptr < iv->size() && (*iv)[ptr].first.count() <= tick;
  }

  // First 1 Hz sample tick after `tick` at which the appliance state can differ.
  std::int64_t next_cost_change(std::size_t b, std::int64_t tick, std::size_t ptr) const {
    const auto* iv = cost_[b];
    if (!iv) return std::numeric_limits<std::int64_t>::max();
    while (ptr < iv->size() && (*iv)[ptr].second.count() <= tick) ++ptr;
    if (ptr >= iv->size()) return std::numeric_limits<std::int64_t>::max();
    const std::int64_t boundary = (*iv)[ptr].first.count() > tick ? (*iv)[ptr].first.count() : (*iv)[ptr].second.count();
    return (boundary + 9) / 10 * 10;
  }

  const std::vector<SensorSpec>& sensors_;
  const SensorTimeline& tl_;
  std::vector<const std::vector<std::pair<SimTime, SimTime>>*> cost_;
};

/// Change-only log of the whole timeline, held in memory.
inline CompressedLog simulate_sensors(const std::vector<SensorSpec>& sensors, const SensorTimeline& tl,
                                      bool fast = true) {
  CompressedLog log;
  log.n_bits = sensors.size();
  log.n_samples = std::max<std::int64_t>(tl.horizon.count(), 0);
  SensorSampler(sensors, tl).run([&](std::int64_t i, const BitVector& b) { log.frames.push_back({i, b}); }, fast);
  return log;
}

/// Tick-by-tick evaluation straight from the definitions, without any
/// incremental state. Used as a reference for the streaming sampler.
inline std::vector<BitVector> sample_naive(const std::vector<SensorSpec>& sensors, const SensorTimeline& tl) {
  const std::int64_t n = tl.horizon.count();
  auto body_at = [&](std::int64_t tick) {
    GridLocation rest = tl.initial;
    for (const auto& tr : tl.trajectories) {
      if (tr.start().count() > tick) break;
      if (tr.end().count() < tick) {
        rest = tr.points.back().location;
        continue;
      }
      std::size_t seg = 0;
      return detail::body_on(tr, tick, seg);
    }
    return detail::BodyState{to_point(rest), kBodyRadius};
  };
  auto on = [&](const std::string& appliance, std::int64_t tick) {
    auto it = tl.appliance_on.find(appliance);
    if (it == tl.appliance_on.end()) return false;
    for (const auto& [a, b] : it->second)
      if (a.count() <= tick && tick < b.count()) return true;
    return false;
  };
  std::vector<BitVector> out;
  for (std::int64_t i = 0; i < n; ++i) {
    BitVector f(sensors.size());
    if (i > 0) {
      const auto body = body_at(i);
      const bool moved = !(body.pos == body_at(i - 1).pos);
      const std::int64_t cost_tick = i / 10 * 10;
      for (std::size_t b = 0; b < sensors.size(); ++b) {
        const auto& s = sensors[b];
        if (s.kind == SensorKind::PIR) f.set(b, moved && detail::disc_hit(s, body));
        else if (s.kind == SensorKind::PR) f.set(b, detail::disc_hit(s, body));
        else f.set(b, cost_tick > 0 && on(s.appliance, cost_tick));
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

inline void write_sensor_header(std::ostream& os, const std::vector<SensorSpec>& sensors, std::int64_t n_samples) {
  os << "# N_b=" << sensors.size() << "\n# T_s=0.1\n# N_s=" << n_samples << "\n";
  for (const auto& s : sensors) {
    os << "# sensor " << s.id << " " << to_string(s.kind);
    if (s.kind == SensorKind::COST) os << " " << s.appliance;
    else os << " " << s.position.x << " " << s.position.y << " " << s.radius;
    os << "\n";
  }
  os << "index,t,bitstring\n";
}

inline void write_frame(std::ostream& os, std::int64_t index, const BitVector& bits) {
  os << index << "," << format_time(SimTime(index)) << "," << bits.to_string() << "\n";
}

/// Parses a sensors.csv written by `write_sensor_header`/`write_frame`.
inline CompressedLog read_sensor_log(std::string_view doc) {
  CompressedLog log;
  for (const auto& raw : text::split(doc, '\n')) {
    const auto line = text::trim(raw);
    if (line.empty() || line == "index,t,bitstring") continue;
    if (line.front() == '#') {
      if (line.substr(0, 6) == "# N_b=") log.n_bits = static_cast<std::size_t>(text::to_int(line.substr(6)));
      if (line.substr(0, 6) == "# N_s=") log.n_samples = text::to_int(line.substr(6));
      continue;
    }
    const auto f = text::split(line, ',');
    if (f.size() != 3) throw Error("sensing", "malformed sensor record '" + std::string(line) + "'");
    log.frames.push_back({text::to_int(f[0]), BitVector::from_string(f[2])});
  }
  check_log(log);
  return log;
}

}  // namespace adlsim
