#pragma once

// Shared vocabulary: simulation time, grid locations, activities and labels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adlsim {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
  Error(std::string module, const std::string& what)
      : std::runtime_error("[" + module + "] " + what), module_(std::move(module)) {}
  const std::string& module() const noexcept { return module_; }

private:
  std::string module_;
};

// Malformed or inconsistent configuration input.
class ConfigError : public Error {
public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Time
// ---------------------------------------------------------------------------

// One tick is 0.1 s, the sampling period of the fastest sensors.
inline constexpr std::int64_t kTicksPerSecond = 10;
inline constexpr std::int64_t kTicksPerMinute = 60 * kTicksPerSecond;
inline constexpr std::int64_t kTicksPerHour = 60 * kTicksPerMinute;
inline constexpr std::int64_t kTicksPerDay = 24 * kTicksPerHour;

/// Offset from simulation start (or a duration) at 0.1 s resolution.
class SimTime {
public:
  constexpr SimTime() = default;
  constexpr explicit SimTime(std::int64_t ticks) : ticks_(ticks) {}

  static constexpr SimTime ticks(std::int64_t t) { return SimTime(t); }
  static SimTime seconds(double s) { return SimTime(std::llround(s * kTicksPerSecond)); }
  static SimTime minutes(double m) { return SimTime(std::llround(m * kTicksPerMinute)); }
  static constexpr SimTime days(std::int64_t d) { return SimTime(d * kTicksPerDay); }

  constexpr std::int64_t count() const { return ticks_; }
  constexpr double to_seconds() const { return static_cast<double>(ticks_) / kTicksPerSecond; }
  constexpr double to_minutes() const { return static_cast<double>(ticks_) / kTicksPerMinute; }

  // Floor division so that accessors stay meaningful for offsets.
  constexpr std::int64_t day() const { return floor_div(ticks_, kTicksPerDay); }
  constexpr SimTime time_of_day() const { return SimTime(ticks_ - day() * kTicksPerDay); }
  constexpr int hour() const { return static_cast<int>(time_of_day().ticks_ / kTicksPerHour); }
  constexpr int minute() const {
    return static_cast<int>((time_of_day().ticks_ % kTicksPerHour) / kTicksPerMinute);
  }
  constexpr int second() const {
    return static_cast<int>((time_of_day().ticks_ % kTicksPerMinute) / kTicksPerSecond);
  }
  constexpr int decisecond() const { return static_cast<int>(time_of_day().ticks_ % kTicksPerSecond); }

  constexpr auto operator<=>(const SimTime&) const = default;
  constexpr SimTime operator+(SimTime o) const { return SimTime(ticks_ + o.ticks_); }
  constexpr SimTime operator-(SimTime o) const { return SimTime(ticks_ - o.ticks_); }
  constexpr SimTime& operator+=(SimTime o) { ticks_ += o.ticks_; return *this; }
  constexpr SimTime& operator-=(SimTime o) { ticks_ -= o.ticks_; return *this; }

private:
  static constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
  }
  std::int64_t ticks_ = 0;
};

/// Canonical `Dd HH:MM:SS.s` rendering, e.g. `3d 22:13:05.4`.
inline std::string format_time(SimTime t) {
  if (t.count() < 0) throw Error("core", "cannot format negative time");
  char buf[48];
  std::snprintf(buf, sizeof buf, "%lldd %02d:%02d:%02d.%d", static_cast<long long>(t.day()), t.hour(),
                t.minute(), t.second(), t.decisecond());
  return buf;
}

inline SimTime parse_time(std::string_view s) {
  long long d = 0;
  int h = 0, m = 0, sec = 0, ds = 0;
  std::string tmp(s);
  char tail = 0;
  if (std::sscanf(tmp.c_str(), "%lldd %d:%d:%d.%d%c", &d, &h, &m, &sec, &ds, &tail) != 5 || d < 0 ||
      h < 0 || h > 23 || m < 0 || m > 59 || sec < 0 || sec > 59 || ds < 0 || ds > 9) {
    throw Error("core", "malformed timestamp '" + tmp + "'");
  }
  return SimTime(d * kTicksPerDay + h * kTicksPerHour + m * kTicksPerMinute + sec * kTicksPerSecond + ds);
}

// ---------------------------------------------------------------------------
// Space
// ---------------------------------------------------------------------------

/// Grid-aligned point in centimeters.
struct GridLocation {
  int x = 0;
  int y = 0;
  constexpr auto operator<=>(const GridLocation&) const = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  constexpr bool operator==(const Point2&) const = default;
};

inline Point2 to_point(GridLocation g) { return {static_cast<double>(g.x), static_cast<double>(g.y)}; }

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline double distance(GridLocation a, GridLocation b) { return distance(to_point(a), to_point(b)); }

// ---------------------------------------------------------------------------
// Activities
// ---------------------------------------------------------------------------

enum class Tier { Fundamental, Necessary, Random };

inline std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::Fundamental: return "F";
    case Tier::Necessary: return "N";
    case Tier::Random: return "R";
  }
  return "?";
}

inline Tier parse_tier(std::string_view s) {
  if (s == "F" || s == "Fundamental") return Tier::Fundamental;
  if (s == "N" || s == "Necessary") return Tier::Necessary;
  if (s == "R" || s == "Random") return Tier::Random;
  throw ConfigError("core", "unknown activity tier '" + std::string(s) + "'");
}

/// One scheduled activity. `id` is shared by all day-pieces of an instance.
struct ActivityInstance {
  std::uint64_t id = 0;
  std::string name;
  Tier tier = Tier::Random;
  SimTime start;
  SimTime duration;
  GridLocation location;

  SimTime end() const { return start + duration; }
  bool operator==(const ActivityInstance&) const = default;
};

struct ActivitySequence {
  std::vector<ActivityInstance> items;
  int day_count = 0;

  SimTime horizon() const { return SimTime::days(day_count); }
  bool operator==(const ActivitySequence&) const = default;
};

/// Pieces of `seq` clipped to each day. Instances crossing midnight are split
/// and every piece keeps the instance id.
inline std::vector<std::vector<ActivityInstance>> split_by_day(const ActivitySequence& seq) {
  std::vector<std::vector<ActivityInstance>> days(static_cast<std::size_t>(std::max(seq.day_count, 0)));
  for (const auto& a : seq.items) {
    SimTime s = a.start;
    const SimTime e = std::min(a.end(), seq.horizon());
    while (s < e) {
      const std::int64_t d = s.day();
      if (d < 0 || d >= seq.day_count) break;
      const SimTime day_end = SimTime::days(d + 1);
      ActivityInstance piece = a;
      piece.start = s;
      piece.duration = std::min(e, day_end) - s;
      days[static_cast<std::size_t>(d)].push_back(std::move(piece));
      s = day_end;
    }
  }
  return days;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
  enum class Kind { UncoveredDay, Gap, Overlap, Unsorted, NonPositiveDuration, OutOfHorizon };
  Kind kind;
  std::int64_t day = 0;
  SimTime begin;
  SimTime end;

  bool operator==(const Violation&) const = default;
};

inline std::string_view to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::UncoveredDay: return "uncovered day";
    case Violation::Kind::Gap: return "gap";
    case Violation::Kind::Overlap: return "overlap";
    case Violation::Kind::Unsorted: return "unsorted";
    case Violation::Kind::NonPositiveDuration: return "non-positive duration";
    case Violation::Kind::OutOfHorizon: return "out of horizon";
  }
  return "?";
}

/// Checks that `seq` is sorted, overlap-free and covers every day without gaps.
/// Violations are returned as data; an empty list means the sequence is valid.
inline std::vector<Violation> validate_sequence(const ActivitySequence& seq) {
  using K = Violation::Kind;
  std::vector<Violation> out;
  const SimTime horizon = seq.horizon();

  for (std::size_t i = 0; i < seq.items.size(); ++i) {
    const auto& a = seq.items[i];
    if (a.duration.count() <= 0) out.push_back({K::NonPositiveDuration, a.start.day(), a.start, a.end()});
    if (a.start.count() < 0 || a.end() > horizon) out.push_back({K::OutOfHorizon, a.start.day(), a.start, a.end()});
    if (i > 0) {
      const auto& p = seq.items[i - 1];
      if (a.start < p.start) out.push_back({K::Unsorted, a.start.day(), a.start, p.start});
      else if (a.start < p.end()) out.push_back({K::Overlap, a.start.day(), a.start, p.end()});
    }
  }

  // Coverage, per day, on the interval union.
  auto pieces = split_by_day(seq);
  for (std::int64_t d = 0; d < seq.day_count; ++d) {
    auto& day = pieces[static_cast<std::size_t>(d)];
    const SimTime day_start = SimTime::days(d), day_end = SimTime::days(d + 1);
    if (day.empty()) {
      out.push_back({K::UncoveredDay, d, day_start, day_end});
      continue;
    }
    std::sort(day.begin(), day.end(), [](const auto& x, const auto& y) { return x.start < y.start; });
    SimTime covered = day_start;
    for (const auto& p : day) {
      if (p.start > covered) out.push_back({K::Gap, d, covered, p.start});
      covered = std::max(covered, p.end());
    }
    if (covered < day_end) out.push_back({K::Gap, d, covered, day_end});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Anomaly labels
// ---------------------------------------------------------------------------

enum class AnomalyKind { SemiBedridden, Housebound, Wandering, Forgetting, FallWhileWalking, FallWhileStanding };

inline constexpr AnomalyKind kAllAnomalies[] = {AnomalyKind::SemiBedridden,   AnomalyKind::Housebound,
                                                AnomalyKind::Wandering,       AnomalyKind::Forgetting,
                                                AnomalyKind::FallWhileWalking, AnomalyKind::FallWhileStanding};

inline std::string_view to_string(AnomalyKind k) {
  switch (k) {
    case AnomalyKind::SemiBedridden: return "semi_bedridden";
    case AnomalyKind::Housebound: return "housebound";
    case AnomalyKind::Wandering: return "wandering";
    case AnomalyKind::Forgetting: return "forgetting";
    case AnomalyKind::FallWhileWalking: return "fall_while_walking";
    case AnomalyKind::FallWhileStanding: return "fall_while_standing";
  }
  return "?";
}

inline AnomalyKind parse_anomaly_kind(std::string_view s) {
  for (auto k : kAllAnomalies)
    if (to_string(k) == s) return k;
  throw ConfigError("core", "unknown anomaly kind '" + std::string(s) + "'");
}

struct AnomalyLabel {
  std::uint64_t id = 0;
  AnomalyKind kind = AnomalyKind::Wandering;
  SimTime start;
  SimTime end;
  std::map<std::string, std::string> metadata;

  bool operator==(const AnomalyLabel&) const = default;
};

/// `{"k":"v",...}` rendering used in label exports.
inline std::string json_quote(std::string_view v) {
  std::string s = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') {
      s += '\\';
      s += c;
    } else if (static_cast<unsigned char>(c) < 0x20) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\u%04x", c);
      s += buf;
    } else {
      s += c;
    }
  }
  return s + "\"";
}

inline std::string metadata_string(const std::map<std::string, std::string>& md) {
  std::string s = "{";
  bool first = true;
  for (const auto& [k, v] : md) {
    if (!first) s += ",";
    first = false;
    s += json_quote(k) + ":" + json_quote(v);
  }
  return s + "}";
}

}  // namespace adlsim
