#pragma once

// Daily activity scheduling: fundamentals first, then necessary activities,
// then random activities filling every remaining gap.

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adlsim/catalog.hpp"
#include "adlsim/core.hpp"
#include "adlsim/floor_plan.hpp"
#include "adlsim/rng.hpp"

namespace adlsim {

class SchedulingError : public Error {
public:
  SchedulingError(std::int64_t day, const std::string& activity, const std::string& why)
      : Error("scheduler", "day " + std::to_string(day) + ", activity '" + activity + "': " + why),
        day_(day), activity_(activity) {}
  std::int64_t day() const { return day_; }
  const std::string& activity() const { return activity_; }

private:
  std::int64_t day_;
  std::string activity_;
};

struct SchedulerConfig {
  SimTime epsilon = SimTime::seconds(30);  // shortest admissible activity
  int max_retries = 100;
  std::uint64_t rng_seed = 0;
};

/// Free time of one day as sorted, disjoint half-open intervals.
class FreeTime {
public:
  struct Interval {
    SimTime begin, end;
    SimTime length() const { return end - begin; }
  };

  FreeTime() = default;
  FreeTime(SimTime begin, SimTime end) {
    if (begin < end) segs_.push_back({begin, end});
  }

  bool empty() const { return segs_.empty(); }
  const std::vector<Interval>& segments() const { return segs_; }

  SimTime total() const {
    SimTime t;
    for (const auto& s : segs_) t += s.length();
    return t;
  }

  const Interval* containing(SimTime t) const {
    auto it = std::upper_bound(segs_.begin(), segs_.end(), t, [](SimTime v, const Interval& s) { return v < s.end; });
    if (it == segs_.end() || t < it->begin) return nullptr;
    return &*it;
  }

  /// Uniformly random free tick, weighted by segment length.
  SimTime sample(Rng& rng) const {
    std::int64_t r = draw_index(rng, 0, total().count() - 1);
    for (const auto& s : segs_) {
      if (r < s.length().count()) return s.begin + SimTime(r);
      r -= s.length().count();
    }
    return segs_.back().end - SimTime(1);
  }

  void remove(SimTime begin, SimTime end) {
    std::vector<Interval> out;
    for (const auto& s : segs_) {
      if (end <= s.begin || begin >= s.end) {
        out.push_back(s);
        continue;
      }
      if (s.begin < begin) out.push_back({s.begin, begin});
      if (end < s.end) out.push_back({end, s.end});
    }
    segs_ = std::move(out);
  }

private:
  std::vector<Interval> segs_;
};

/// One committed placement, in the order placements happened.
struct PlacementRecord {
  Tier tier;
  std::string name;
  SimTime start;
  SimTime duration;
  int attempts = 0;
};

struct DaySchedule {
  std::int64_t day = 0;
  std::vector<ActivityInstance> items;  // sorted by start; the last may run past midnight
  std::vector<PlacementRecord> log;
  std::vector<FreeTime::Interval> residual_fragments;  // sub-epsilon gaps absorbed at day end
};

/// Runs the three-tier fill for one day.
///
/// `carry_in_end` is when an activity started on the previous day ends; the
/// day's free time begins there. Only fundamentals may run past midnight (the
/// overflow becomes the next day's carry-in). Fundamentals and necessary
/// activities must fit their free segment whole; random activities start at
/// the earliest free instant and are truncated to the segment. No placement
/// may leave a free fragment shorter than epsilon.
class DayScheduler {
public:
  DayScheduler(const Catalog& catalog, const SchedulerConfig& cfg, const ZoneMap* zones = nullptr)
      : catalog_(catalog), cfg_(cfg), zones_(zones) {
    if (cfg.epsilon.count() <= 0) throw ConfigError("scheduler", "epsilon must be positive");
    if (cfg.max_retries < 1) throw ConfigError("scheduler", "max_retries must be at least 1");
    if (catalog.of_tier(Tier::Random).empty())
      throw ConfigError("scheduler", "catalog needs at least one random activity to fill the day");
  }

  DaySchedule run(std::int64_t day, std::optional<SimTime> carry_in_end = std::nullopt,
                  const std::vector<ForcedInstance>& forced = {}) const {
    Rng rng = make_rng(cfg_.rng_seed, "scheduler", static_cast<std::uint64_t>(day));
    const SimTime day_start = SimTime::days(day), day_end = SimTime::days(day + 1);
    const SimTime free_from = std::clamp(carry_in_end.value_or(day_start), day_start, day_end);

    DaySchedule out;
    out.day = day;
    FreeTime free(free_from, day_end);
    const SimTime eps = cfg_.epsilon;

    auto leaves_fragment = [&](const FreeTime::Interval& seg, SimTime s, SimTime e) {
      const SimTime left = s - seg.begin;
      const SimTime right = seg.end - e;
      return (left.count() > 0 && left < eps) || (right.count() > 0 && right < eps);
    };
    auto commit = [&](const ActivityParams& a, SimTime s, SimTime d, int attempts) {
      free.remove(s, s + d);
      out.items.push_back({0, a.name, a.tier, s, d, locate(a, rng)});
      out.log.push_back({a.tier, a.name, s, d, attempts});
    };

    // Fundamentals, in chronological order.
    SimTime last_fundamental_start = day_start - SimTime(1);
    for (const auto* a : catalog_.fundamentals()) {
      int attempts = 0;
      while (true) {
        if (attempts++ >= cfg_.max_retries)
          throw SchedulingError(day, a->name, "no valid placement after " + std::to_string(cfg_.max_retries) + " draws");
        const SimTime s = day_start + SimTime::minutes(draw_normal(rng, a->start_mean, a->start_sd));
        const SimTime d = SimTime::minutes(draw_normal(rng, a->duration_mean, a->duration_sd));
        if (d < eps || s < day_start || s >= day_end || s <= last_fundamental_start) continue;
        const auto* seg = free.containing(s);
        if (!seg) continue;
        const bool runs_to_midnight = seg->end == day_end;
        if (s + d > seg->end && !(runs_to_midnight && s + d <= day_end + SimTime::days(1) - eps)) continue;
        if (leaves_fragment(*seg, s, std::min(s + d, seg->end))) continue;
        commit(*a, s, d, attempts);
        last_fundamental_start = s;
        break;
      }
    }

    // Necessary activities: Poisson counts placed uniformly over free time.
    auto place_necessary = [&](const ActivityParams& a, std::optional<SimTime> fixed_duration) {
      int attempts = 0;
      SimTime d;
      if (fixed_duration) {
        d = *fixed_duration;
      } else {
        do {
          if (attempts++ >= cfg_.max_retries) throw SchedulingError(day, a.name, "duration draws stay below epsilon");
          d = SimTime::minutes(draw_normal(rng, a.duration_mean, a.duration_sd));
        } while (d < eps);
      }
      if (d < eps) throw SchedulingError(day, a.name, "forced duration below epsilon");
      while (true) {
        if (attempts++ >= cfg_.max_retries || free.empty())
          throw SchedulingError(day, a.name, "no free segment fits " + format_time(d));
        const SimTime s = free.sample(rng);
        const auto* seg = free.containing(s);
        if (s + d > seg->end || leaves_fragment(*seg, s, s + d)) continue;
        commit(a, s, d, attempts);
        return;
      }
    };
    for (const auto* a : catalog_.of_tier(Tier::Necessary)) {
      const auto n = draw_poisson(rng, a->rate);
      for (std::int64_t i = 0; i < n; ++i) place_necessary(*a, std::nullopt);
    }
    for (const auto& f : forced) place_necessary(catalog_.at(f.name), f.duration);

    // Random activities fill the remaining time from the earliest free instant.
    const auto randoms = catalog_.of_tier(Tier::Random);
    const auto probs = catalog_.random_probabilities();
    std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
    while (!free.empty()) {
      const auto seg = free.segments().front();
      if (seg.length() < eps) {
        absorb_fragment(out, seg);
        free.remove(seg.begin, seg.end);
        continue;
      }
      int attempts = 0;
      while (true) {
        if (attempts++ >= cfg_.max_retries)
          throw SchedulingError(day, "random fill", "cannot fill free segment at " + format_time(seg.begin));
        const auto& a = *randoms[pick(rng)];
        const SimTime d = SimTime::minutes(draw_normal(rng, a.duration_mean, a.duration_sd));
        if (d < eps) continue;
        const SimTime dd = std::min(d, seg.length());
        const SimTime rest = seg.length() - dd;
        if (rest.count() > 0 && rest < eps) continue;
        commit(a, seg.begin, dd, attempts);
        break;
      }
    }

    std::sort(out.items.begin(), out.items.end(), [](const auto& x, const auto& y) { return x.start < y.start; });
    for (std::size_t k = 0; k < out.items.size(); ++k)
      out.items[k].id = (static_cast<std::uint64_t>(day) << 16) | static_cast<std::uint64_t>(k);
    return out;
  }

private:
  GridLocation locate(const ActivityParams& a, Rng& rng) const {
    if (!zones_) return {};
    const auto& cells = zones_->cells(a.place);
    return cells[static_cast<std::size_t>(draw_index(rng, 0, static_cast<std::int64_t>(cells.size()) - 1))];
  }

  // A fragment shorter than epsilon can only arise next to the carry-in; the
  // activity ending at its start is extended over it.
  static void absorb_fragment(DaySchedule& out, const FreeTime::Interval& seg) {
    out.residual_fragments.push_back(seg);
    for (auto& it : out.items)
      if (it.end() == seg.begin) {
        it.duration += seg.length();
        return;
      }
    for (auto& it : out.items)
      if (it.start == seg.end) {
        it.start = seg.begin;
        it.duration += seg.length();
        return;
      }
  }

  const Catalog& catalog_;
  SchedulerConfig cfg_;
  const ZoneMap* zones_;
};

/// One day of activities from `catalog`.
inline DaySchedule schedule_day(const Catalog& catalog, const SchedulerConfig& cfg, std::int64_t day_index,
                                const ZoneMap* zones = nullptr, std::optional<SimTime> carry_in_end = std::nullopt) {
  return DayScheduler(catalog, cfg, zones).run(day_index, carry_in_end);
}

using DayOverrides = std::function<CatalogDelta(std::int64_t day)>;

struct MultiDaySchedule {
  ActivitySequence sequence;
  std::vector<DaySchedule> days;
};

/// Consecutive days; each day's catalog is the base catalog with that day's
/// delta applied. A fundamental running past the horizon is cut there.
inline MultiDaySchedule schedule_days(const Catalog& catalog, const SchedulerConfig& cfg, int n_days,
                                      const DayOverrides& overrides = {}, const ZoneMap* zones = nullptr) {
  MultiDaySchedule out;
  out.sequence.day_count = n_days;
  std::optional<SimTime> carry;
  for (int d = 0; d < n_days; ++d) {
    const CatalogDelta delta = overrides ? overrides(d) : CatalogDelta{};
    const Catalog day_catalog = delta.empty() ? catalog : apply(catalog, delta);
    auto day = DayScheduler(day_catalog, cfg, zones).run(d, carry, delta.forced);
    carry = day.items.empty() ? std::nullopt : std::optional<SimTime>(day.items.back().end());
    for (const auto& it : day.items) out.sequence.items.push_back(it);
    out.days.push_back(std::move(day));
  }
  if (!out.sequence.items.empty()) {
    auto& last = out.sequence.items.back();
    if (last.end() > out.sequence.horizon()) last.duration = out.sequence.horizon() - last.start;
  }
  return out;
}

}  // namespace adlsim
