#pragma once

// Real activity logs: parsing, cleanup into gap-free daily sequences and
// fitting of catalog parameters.
//
// Every reader produces RawEvents (start, end, label) in absolute time; the
// preprocessors turn them into an ActivitySequence whose origin is midnight
// of the first day of the window.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "adlsim/catalog.hpp"
#include "adlsim/core.hpp"
#include "adlsim/text.hpp"

namespace adlsim {

// ---------------------------------------------------------------------------
// Calendar time
// ---------------------------------------------------------------------------

/// Days since 1970-01-01 of a proleptic Gregorian date.
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<int>(static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2));
}

/// Absolute time as ticks since 1970-01-01 00:00:00.
using Instant = std::int64_t;

namespace detail {
inline bool parse_clock(std::string_view s, Instant& ticks) {
  int h = 0, mi = 0;
  double sec = 0.0;
  std::string tmp(s);
  char extra = 0;
  if (std::sscanf(tmp.c_str(), "%d:%d:%lf%c", &h, &mi, &sec, &extra) != 3) return false;
  if (h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0.0 || sec >= 61.0) return false;
  ticks = h * kTicksPerHour + mi * kTicksPerMinute + static_cast<std::int64_t>(std::floor(sec * kTicksPerSecond + 1e-6));
  return true;
}

inline bool valid_date(int y, unsigned m, unsigned d) {
  if (m < 1 || m > 12 || d < 1) return false;
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  return d <= kDays[m - 1] + (m == 2 && leap ? 1U : 0U);
}
}  // namespace detail

/// `YYYY-MM-DD[ T]HH:MM:SS[.frac]`.
inline std::optional<Instant> parse_iso(std::string_view s) {
  s = text::trim(s);
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != ' ' && s[10] != 'T')) return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  std::string date(s.substr(0, 10));
  char extra = 0;
  if (std::sscanf(date.c_str(), "%d-%u-%u%c", &y, &m, &d, &extra) != 3 || !detail::valid_date(y, m, d))
    return std::nullopt;
  Instant clock = 0;
  if (!detail::parse_clock(s.substr(11), clock)) return std::nullopt;
  return days_from_civil(y, m, d) * kTicksPerDay + clock;
}

inline std::string format_iso(Instant t) {
  const std::int64_t day = t >= 0 ? t / kTicksPerDay : -((-t + kTicksPerDay - 1) / kTicksPerDay);
  int y = 0;
  unsigned m = 0, d = 0;
  civil_from_days(day, y, m, d);
  const SimTime tod(t - day * kTicksPerDay);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02d:%02d:%02d", y, m, d, tod.hour(), tod.minute(), tod.second());
  std::string out = buf;
  if (tod.decisecond() != 0) out += "." + std::to_string(tod.decisecond());
  return out;
}

/// Midnight of a `YYYY-MM-DD` date.
inline Instant parse_date(std::string_view s) {
  const auto t = parse_iso(std::string(text::trim(s)) + " 00:00:00");
  if (!t) throw ConfigError("ingest", "malformed date '" + std::string(s) + "'");
  return *t;
}

// ---------------------------------------------------------------------------
// Readers
// ---------------------------------------------------------------------------

struct RawEvent {
  Instant start = 0;
  Instant end = 0;
  std::string label;
  int line = 0;
  bool operator==(const RawEvent&) const = default;
};

class ParseError : public ConfigError {
public:
  ParseError(int line, const std::string& what)
      : ConfigError("ingest", "line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

/// Normal form: `start<TAB>end<TAB>label`, ISO timestamps, `#` comments.
inline std::vector<RawEvent> parse_events(std::string_view doc) {
  std::vector<RawEvent> out;
  int number = 0;
  for (const auto& raw : text::split(doc, '\n')) {
    ++number;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto f = text::split(line, '\t');
    if (f.size() != 3) throw ParseError(number, "expected start<TAB>end<TAB>label");
    const auto s = parse_iso(f[0]), e = parse_iso(f[1]);
    if (!s || !e) throw ParseError(number, "malformed timestamp");
    if (*e < *s) throw ParseError(number, "event ends before it starts");
    out.push_back({*s, *e, text::lower(text::trim(f[2])), number});
  }
  return out;
}

inline std::string write_events(const std::vector<RawEvent>& events) {
  std::string out;
  for (const auto& e : events) out += format_iso(e.start) + "\t" + format_iso(e.end) + "\t" + e.label + "\n";
  return out;
}

/// Kasteren activity ids.
inline std::string kasteren_label(int id) {
  switch (id) {
    case 1: return "leave house";
    case 4: return "use toilet";
    case 5: return "take shower";
    case 10: return "go to bed";
    case 13: return "prepare breakfast";
    case 15: return "prepare dinner";
    case 17: return "get drink";
  }
  return "";
}

/// Native Kasteren annotation file: `dd-Mon-yyyy HH:MM:SS` start and end and a
/// numeric activity id per line; lines not starting with a digit are headers.
inline std::vector<RawEvent> parse_kasteren(std::string_view doc) {
  static constexpr std::string_view kMonths[] = {"jan", "feb", "mar", "apr", "may", "jun",
                                                 "jul", "aug", "sep", "oct", "nov", "dec"};
  auto date = [&](const std::string& s) -> std::optional<std::int64_t> {
    const auto p = text::split(s, '-');
    if (p.size() != 3) return std::nullopt;
    unsigned m = 0;
    for (unsigned i = 0; i < 12; ++i)
      if (text::lower(p[1]) == kMonths[i]) m = i + 1;
    try {
      const int y = static_cast<int>(text::to_int(p[2]));
      const auto d = static_cast<unsigned>(text::to_int(p[0]));
      if (!detail::valid_date(y, m, d)) return std::nullopt;
      return days_from_civil(y, m, d);
    } catch (const ConfigError&) {
      return std::nullopt;
    }
  };
  std::vector<RawEvent> out;
  int number = 0;
  for (const auto& raw : text::split(doc, '\n')) {
    ++number;
    const auto line = text::trim(raw);
    if (line.empty() || !std::isdigit(static_cast<unsigned char>(line.front()))) continue;
    const auto t = text::split_ws(line);
    if (t.size() != 5) throw ParseError(number, "expected: start-date start-time end-date end-time id");
    const auto d0 = date(t[0]), d1 = date(t[2]);
    Instant c0 = 0, c1 = 0;
    if (!d0 || !d1 || !detail::parse_clock(t[1], c0) || !detail::parse_clock(t[3], c1))
      throw ParseError(number, "malformed timestamp");
    long long id = 0;
    try {
      id = text::to_int(t[4]);
    } catch (const ConfigError&) {
      throw ParseError(number, "activity id must be an integer");
    }
    const auto label = kasteren_label(static_cast<int>(id));
    if (label.empty()) throw ParseError(number, "unknown activity id " + t[4]);
    const Instant s = *d0 * kTicksPerDay + c0, e = *d1 * kTicksPerDay + c1;
    if (e < s) throw ParseError(number, "event ends before it starts");
    out.push_back({s, e, label, number});
  }
  return out;
}

/// Native Aruba event log: `date time sensor value [Label begin|end]`. Sensor
/// readings without an annotation are skipped; begins are paired with the
/// next end of the same label. Labels are lowercased with spaces.
inline std::vector<RawEvent> parse_aruba(std::string_view doc, std::vector<std::string>* notes = nullptr) {
  std::vector<RawEvent> out;
  std::map<std::string, std::pair<Instant, int>> open;
  int number = 0;
  for (const auto& raw : text::split(doc, '\n')) {
    ++number;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto t = text::split_ws(line);
    if (t.size() < 4) throw ParseError(number, "expected: date time sensor value [label begin|end]");
    const auto when = parse_iso(t[0] + " " + t[1]);
    if (!when) throw ParseError(number, "malformed timestamp");
    if (t.size() == 4) continue;
    if (t.size() != 6 || (t[5] != "begin" && t[5] != "end")) throw ParseError(number, "malformed annotation");
    std::string label = text::lower(t[4]);
    std::replace(label.begin(), label.end(), '_', ' ');
    if (t[5] == "begin") {
      if (open.count(label) && notes) notes->push_back("line " + std::to_string(open[label].second) + ": '" + label + "' begin without end");
      open[label] = {*when, number};
    } else {
      auto it = open.find(label);
      if (it == open.end()) {
        if (notes) notes->push_back("line " + std::to_string(number) + ": '" + label + "' end without begin");
        continue;
      }
      out.push_back({it->second.first, *when, label, it->second.second});
      open.erase(it);
    }
  }
  for (const auto& [label, o] : open)
    if (notes) notes->push_back("line " + std::to_string(o.second) + ": '" + label + "' begin without end");
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  return out;
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

inline constexpr std::string_view kOtherActivity = "other";

struct Cleaned {
  ActivitySequence sequence;  // relative to `origin`
  Instant origin = 0;
  std::vector<std::string> notes;

  /// Events in absolute time, the preprocessors' input format.
  std::vector<RawEvent> events() const {
    std::vector<RawEvent> out;
    for (const auto& a : sequence.items) out.push_back({origin + a.start.count(), origin + a.end().count(), a.name, 0});
    return out;
  }
};

namespace detail {

struct Seg {
  Instant start, end;
  std::string label;
};

inline std::vector<Seg> to_segs(const std::vector<RawEvent>& ev) {
  std::vector<Seg> v;
  for (const auto& e : ev) v.push_back({e.start, e.end, e.label});
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  return v;
}

/// Events starting in [from, to), cut at `to`.
inline std::vector<Seg> window(std::vector<Seg> v, Instant from, Instant to) {
  std::vector<Seg> out;
  for (auto& s : v)
    if (s.start >= from && s.start < to) {
      s.end = std::min(s.end, to);
      out.push_back(std::move(s));
    }
  return out;
}

/// Later-starting events win; an interrupted event resumes after the
/// interruption if it lasts longer.
inline std::vector<Seg> resolve_overlaps(const std::vector<Seg>& sorted) {
  std::vector<Seg> cur;
  for (const auto& e : sorted) {
    if (e.end <= e.start) continue;
    std::vector<Seg> next;
    for (const auto& s : cur) {
      if (s.end <= e.start || s.start >= e.end) {
        next.push_back(s);
        continue;
      }
      if (s.start < e.start) next.push_back({s.start, e.start, s.label});
      if (s.end > e.end) next.push_back({e.end, s.end, s.label});
    }
    next.push_back(e);
    std::stable_sort(next.begin(), next.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    cur = std::move(next);
  }
  return cur;
}

inline std::vector<Seg> merge_same(const std::vector<Seg>& v) {
  std::vector<Seg> out;
  for (const auto& s : v) {
    if (!out.empty() && out.back().label == s.label && out.back().end == s.start) out.back().end = s.end;
    else out.push_back(s);
  }
  return out;
}

/// Gaps become `other`; gaps shorter than `absorb` extend the predecessor.
inline std::vector<Seg> fill_gaps(const std::vector<Seg>& v, Instant from, Instant to, Instant absorb) {
  std::vector<Seg> out;
  Instant t = from;
  for (const auto& s : v) {
    if (s.start > t) {
      if (s.start - t < absorb && !out.empty()) out.back().end = s.start;
      else out.push_back({t, s.start, std::string(kOtherActivity)});
    }
    out.push_back(s);
    t = std::max(t, s.end);
  }
  if (t < to) {
    if (to - t < absorb && !out.empty()) out.back().end = to;
    else out.push_back({t, to, std::string(kOtherActivity)});
  }
  return out;
}

inline Cleaned finish(const std::vector<Seg>& v, Instant origin, int days) {
  Cleaned c;
  c.origin = origin;
  c.sequence.day_count = days;
  for (const auto& s : v)
    if (s.end > s.start)
      c.sequence.items.push_back({c.sequence.items.size(), s.label, Tier::Random, SimTime(s.start - origin),
                                  SimTime(s.end - s.start), {}});
  return c;
}

inline SimTime time_of_day(Instant t) { return SimTime(t).time_of_day(); }

}  // namespace detail

struct KasterenOptions {
  Instant window_start = days_from_civil(2008, 2, 26) * kTicksPerDay;
  int days = 24;
};

/// Window of `days` days (events starting inside it, cut at its end), outlier
/// removal (leave house over 23 h, go to bed under 6 h, get drink before
/// noon; events cut by the window end are kept), overlap resolution and
/// `other` in every gap.
inline Cleaned preprocess_kasteren(const std::vector<RawEvent>& events, const KasterenOptions& opt = {}) {
  using namespace detail;
  const Instant from = opt.window_start, to = from + opt.days * kTicksPerDay;
  auto v = window(to_segs(events), from, to);
  std::vector<std::string> notes;
  std::vector<Seg> kept;
  for (const auto& s : v) {
    const Instant len = s.end - s.start;
    const bool cut = s.end >= to;
    std::string why;
    if (s.label == "leave house" && len > 23 * kTicksPerHour && !cut) why = "leave house longer than 23 h";
    else if (s.label == "go to bed" && len < 6 * kTicksPerHour && !cut) why = "go to bed shorter than 6 h";
    else if (s.label == "get drink" && time_of_day(s.start) < SimTime(12 * kTicksPerHour)) why = "get drink before noon";
    if (why.empty()) kept.push_back(s);
    else notes.push_back("removed " + format_iso(s.start) + " " + s.label + ": " + why);
  }
  auto out = merge_same(fill_gaps(resolve_overlaps(kept), from, to, 0));
  auto c = finish(out, from, opt.days);
  c.notes = std::move(notes);
  return c;
}

struct ArubaOptions {
  Instant window_start = days_from_civil(2010, 11, 4) * kTicksPerDay;
  int days = 220;
  Instant absorb_gap = 5 * kTicksPerMinute;
};

/// Eating by clock time of its start: breakfast 4-11, lunch 11-16, dinner
/// 16-24 and 0-1. Starts between 1 and 4 also count as dinner.
inline std::string split_eating(SimTime tod) {
  const auto h = tod.hour();
  if (h >= 4 && h < 11) return "take breakfast";
  if (h >= 11 && h < 16) return "take lunch";
  return "take dinner";
}

/// Window, duplicate removal, overlap resolution, relabeling of bed-to-toilet
/// and respirate as their predecessor, go-out collapse, eating split, daytime
/// naps and `other` fill (vacancies under 5 minutes extend the predecessor).
inline Cleaned preprocess_aruba(const std::vector<RawEvent>& events, const ArubaOptions& opt = {}) {
  using namespace detail;
  const Instant from = opt.window_start, to = from + opt.days * kTicksPerDay;
  Cleaned c;
  auto v = window(to_segs(events), from, to);

  // Duplicates.
  {
    std::vector<Seg> u;
    std::set<std::tuple<Instant, Instant, std::string>> seen;
    for (const auto& s : v)
      if (seen.insert({s.start, s.end, s.label}).second) u.push_back(s);
      else c.notes.push_back("duplicate " + format_iso(s.start) + " " + s.label);
    v = std::move(u);
  }
  v = resolve_overlaps(v);

  // Short interruptions take their predecessor's label.
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i].label == "bed to toilet" || v[i].label == "respirate")
      v[i].label = i > 0 ? v[i - 1].label : std::string(kOtherActivity);
  v = merge_same(v);

  // Leaving and entering collapse into one outing.
  {
    std::vector<Seg> u;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].label == "enter home") {
        c.notes.push_back("enter home without leave home at " + format_iso(v[i].start));
        continue;
      }
      if (v[i].label != "leave home") {
        u.push_back(v[i]);
        continue;
      }
      std::size_t j = i + 1;
      while (j < v.size() && v[j].label != "enter home" && v[j].label != "leave home") ++j;
      if (j >= v.size() || v[j].label != "enter home") {
        c.notes.push_back("leave home without enter home at " + format_iso(v[i].start));
        continue;
      }
      u.push_back({v[i].start, v[j].end, "go out"});
      i = j;
    }
    v = std::move(u);
  }

  for (auto& s : v) {
    if (s.label == "eating") s.label = split_eating(time_of_day(s.start));
    else if (s.label == "sleeping") {
      const auto h = time_of_day(s.start).hour();
      if (h >= 6 && h < 17) s.label = std::string(kNapActivity);
    }
  }
  v = merge_same(fill_gaps(v, from, to, opt.absorb_gap));
  auto notes = std::move(c.notes);
  c = finish(v, from, opt.days);
  c.notes = std::move(notes);
  return c;
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

/// Circular mean of clock times in minutes, in [0, 1440), and the dispersion
/// sqrt(2 (1 - R)) mapped back to minutes.
struct CircularStats {
  double mean = 0.0;
  double sd = 0.0;
  double resultant = 0.0;
};

inline CircularStats circular_stats(const std::vector<double>& minutes) {
  if (minutes.empty()) throw Error("ingest", "circular mean of no samples");
  double c = 0.0, s = 0.0;
  for (double m : minutes) {
    double x = std::fmod(m, 1440.0);
    if (x < 0) x += 1440.0;
    if (x > 720.0) x -= 1440.0;  // symmetric range keeps opposite offsets exactly opposite
    const double th = 2.0 * std::numbers::pi * x / 1440.0;
    c += std::cos(th);
    s += std::sin(th);
  }
  const double n = static_cast<double>(minutes.size());
  c /= n;
  s /= n;
  CircularStats st;
  st.resultant = std::min(1.0, std::hypot(c, s));
  double mean = std::atan2(s, c) * 1440.0 / (2.0 * std::numbers::pi);
  if (mean < 0) mean += 1440.0;
  if (mean >= 1440.0) mean -= 1440.0;
  st.mean = mean;
  st.sd = std::sqrt(2.0 * (1.0 - st.resultant)) * 1440.0 / (2.0 * std::numbers::pi);
  return st;
}

struct TierConfig {
  std::map<std::string, Tier> tiers;
  std::map<std::string, double> shrink;  // multiplies start and duration sds
};

/// `[tiers]` with `activity = F|N|R` and `[shrink]` with `activity = factor`.
inline TierConfig parse_tier_config(std::string_view doc) {
  TierConfig cfg;
  for (const auto& line : text::parse_sections(doc)) {
    const std::string where = "tier config line " + std::to_string(line.number) + ": ";
    if (!line.is_assignment()) throw ConfigError("ingest", where + "expected activity = value");
    try {
      if (line.section == "tiers") cfg.tiers[text::lower(line.key())] = parse_tier(line.value());
      else if (line.section == "shrink") cfg.shrink[text::lower(line.key())] = text::to_double(line.value(), "factor");
      else throw ConfigError("ingest", "unknown section '" + line.section + "'");
    } catch (const ConfigError& e) {
      throw ConfigError("ingest", where + e.what());
    }
  }
  return cfg;
}

inline constexpr std::string_view kKasterenTiers = R"([tiers]
prepare breakfast = F
take shower = F
prepare dinner = F
go to bed = F
use toilet = N
get drink = R
leave house = R
other = R

[shrink]
go to bed = 1/3
)";

inline constexpr std::string_view kArubaTiers = R"([tiers]
take breakfast = F
take lunch = F
take dinner = F
sleeping = F
nap = N
wash dishes = N
meal preparation = N
housekeeping = N
go out = R
other = R
relax = R
work = R

[shrink]
sleeping = 1/2
)";

inline TierConfig tier_preset(std::string_view name) {
  if (name == "kasteren") return parse_tier_config(kKasterenTiers);
  if (name == "aruba") return parse_tier_config(kArubaTiers);
  throw ConfigError("ingest", "no tier preset named '" + std::string(name) + "'");
}

struct FitReport {
  Catalog catalog;
  std::map<std::string, std::size_t> samples;
  std::map<std::string, double> shrink_applied;
  std::vector<std::string> notes;

  std::string summary() const {
    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-20s %-4s %8s %8s %7s %8s %8s %6s %6s\n", "activity", "tier", "start", "sd", "rate",
                  "dur", "sd", "prob", "n");
    out += buf;
    for (const auto& a : catalog.activities()) {
      std::snprintf(buf, sizeof buf, "%-20s %-4s %8.2f %8.2f %7.2f %8.2f %8.2f %6.2f %6zu\n", a.name.c_str(),
                    std::string(to_string(a.tier)).c_str(), a.start_mean, a.start_sd, a.rate, a.duration_mean,
                    a.duration_sd, a.prob, samples.at(a.name));
      out += buf;
    }
    for (const auto& n : notes) out += "note: " + n + "\n";
    return out;
  }
};

/// Per-activity parameters from a cleaned sequence. Start times use the
/// circular mean, durations the sample mean and sd, necessary rates the
/// count per day and random probabilities the share of random occurrences.
inline FitReport fit_params(const ActivitySequence& seq, const TierConfig& cfg) {
  if (seq.day_count <= 0) throw ConfigError("ingest", "cannot fit an empty sequence");
  std::map<std::string, std::vector<double>> starts, durations;
  std::vector<std::string> order;
  for (const auto& a : seq.items) {
    if (!starts.count(a.name)) order.push_back(a.name);
    starts[a.name].push_back(a.start.time_of_day().to_minutes());
    durations[a.name].push_back(a.duration.to_minutes());
  }
  std::vector<std::string> unassigned, missing;
  for (const auto& n : order)
    if (!cfg.tiers.count(n)) unassigned.push_back(n);
  for (const auto& [n, t] : cfg.tiers) {
    const auto it = starts.find(n);
    const std::size_t need = t == Tier::Fundamental ? 2 : 1;
    if (it == starts.end() || it->second.size() < need) missing.push_back(n);
  }
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
  };
  if (!unassigned.empty()) throw ConfigError("ingest", "activities without a tier: " + join(unassigned));
  if (!missing.empty()) throw ConfigError("ingest", "insufficient samples for: " + join(missing));

  std::size_t random_total = 0;
  for (const auto& [n, t] : cfg.tiers)
    if (t == Tier::Random) random_total += starts[n].size();

  FitReport rep;
  std::vector<ActivityParams> params;
  for (const auto& [name, tier] : cfg.tiers) {
    const auto& st = starts[name];
    const auto& du = durations[name];
    ActivityParams p;
    p.name = name;
    p.tier = tier;
    double mean = 0.0;
    for (double d : du) mean += d;
    mean /= static_cast<double>(du.size());
    double ss = 0.0;
    for (double d : du) ss += (d - mean) * (d - mean);
    p.duration_mean = mean;
    p.duration_sd = du.size() > 1 ? std::sqrt(ss / static_cast<double>(du.size() - 1)) : 0.0;
    if (tier == Tier::Fundamental) {
      const auto cs = circular_stats(st);
      p.start_mean = cs.mean;
      p.start_sd = cs.sd;
    } else if (tier == Tier::Necessary) {
      p.rate = static_cast<double>(st.size()) / seq.day_count;
    } else {
      p.prob = static_cast<double>(st.size()) / static_cast<double>(random_total);
    }
    if (auto it = cfg.shrink.find(name); it != cfg.shrink.end()) {
      p.start_sd *= it->second;
      p.duration_sd *= it->second;
      rep.shrink_applied[name] = it->second;
    }
    rep.samples[name] = st.size();
    params.push_back(std::move(p));
  }
  std::stable_sort(params.begin(), params.end(), [](const auto& a, const auto& b) { return a.tier < b.tier; });
  rep.catalog = Catalog(std::move(params));
  rep.notes.push_back("start sd is the circular dispersion sqrt(2(1-R)) in minutes");
  return rep;
}

}  // namespace adlsim
