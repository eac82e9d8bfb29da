#pragma once

// Latent MMSE process and the six anomalies it drives.
//
// Monthly scores follow a linear drift plus Gaussian noise. Each anomaly has
// an affine frequency law and duration law in the month's score; sampled
// occurrences become per-day catalog overrides, forced wandering activities,
// forgetting events and fall events.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "adlsim/catalog.hpp"
#include "adlsim/core.hpp"
#include "adlsim/rng.hpp"
#include "adlsim/text.hpp"

namespace adlsim {

inline constexpr double kMmseMin = 0.0;
inline constexpr double kMmseMax = 30.0;

// ---------------------------------------------------------------------------
// MMSE process
// ---------------------------------------------------------------------------

/// M_{m+1} = M_m - c + e_m, e_m ~ N(0, sd^2), clamped to [0, 30].
///
/// Scores are evaluated as M_0 - c*m plus the accumulated noise, so with no
/// noise the series is the exact affine ramp rather than a drifting sum.
class MmseProcess {
public:
  MmseProcess(double initial = 29.0, double drift = 9.5 / 108.0, double noise_sd = 0.5)
      : initial_(initial), drift_(drift), noise_sd_(noise_sd) {
    if (!(initial >= kMmseMin && initial <= kMmseMax)) throw ConfigError("anomaly", "initial MMSE outside [0, 30]");
    if (noise_sd < 0.0) throw ConfigError("anomaly", "negative MMSE noise sd");
    series_.push_back(initial);
  }

  double step(Rng& rng) {
    const double base = initial_ - drift_ * static_cast<double>(series_.size());
    offset_ += draw_normal(rng, 0.0, noise_sd_);
    const double v = std::clamp(base + offset_, kMmseMin, kMmseMax);
    offset_ = v - base;
    series_.push_back(v);
    return v;
  }

  /// Extends the series to `months` entries (month 0 is the initial score).
  void run(Rng& rng, std::size_t months) {
    while (series_.size() < months) step(rng);
  }

  const std::vector<double>& series() const { return series_; }
  double initial() const { return initial_; }
  double drift() const { return drift_; }
  double noise_sd() const { return noise_sd_; }

private:
  double initial_, drift_, noise_sd_;
  double offset_ = 0.0;
  std::vector<double> series_;
};

// ---------------------------------------------------------------------------
// Laws and profile
// ---------------------------------------------------------------------------

/// max(0, slope_num * M / slope_den + intercept). The slope is kept as a
/// fraction so that laws like -M/15 + 2 vanish exactly at their root.
struct AffineLaw {
  double slope_num = 0.0;
  double slope_den = 1.0;
  double intercept = 0.0;

  double operator()(double m) const { return std::max(0.0, slope_num * m / slope_den + intercept); }
  bool constant() const { return slope_num == 0.0; }
  bool operator==(const AffineLaw&) const = default;
};

/// Units of `duration`: days for the state anomalies, minutes for wandering,
/// seconds for falls; unused for forgetting. `always` pins a state anomaly
/// active over the whole run.
struct AnomalyLaw {
  bool enabled = true;
  bool always = false;
  AffineLaw frequency;  // events per month
  AffineLaw duration;
  bool operator==(const AnomalyLaw&) const = default;
};

struct AnomalyProfile {
  double mmse_initial = 29.0;
  double mmse_drift = 9.5 / 108.0;
  double mmse_noise_sd = 0.5;
  std::array<AnomalyLaw, 6> laws{};

  AnomalyLaw& law(AnomalyKind k) { return laws[static_cast<std::size_t>(k)]; }
  const AnomalyLaw& law(AnomalyKind k) const { return laws[static_cast<std::size_t>(k)]; }
  bool operator==(const AnomalyProfile&) const = default;
};

inline constexpr std::string_view kDefaultProfile = R"(# MMSE drift: 29 to 19.5 over nine years
[mmse]
initial = 29
drift = 9.5/108
noise_sd = 0.5

# state anomalies: frequency per month, duration in days
[semi_bedridden]
frequency_intercept = 1/20
duration_intercept = 30

[housebound]
frequency_intercept = 1/10
duration_intercept = 14

# duration in minutes
[wandering]
frequency_slope = -1.86
frequency_intercept = 56
duration_slope = -0.31
duration_intercept = 9.8

[forgetting]
frequency_slope = -1
frequency_intercept = 30

# hold duration in seconds
[fall_while_walking]
frequency_slope = -1/15
frequency_intercept = 2
duration_intercept = 30

[fall_while_standing]
frequency_slope = -1/15
frequency_intercept = 2
duration_intercept = 30
)";

namespace detail {
inline void parse_slope(std::string_view v, AffineLaw& law, std::string_view what) {
  v = text::trim(v);
  if (const auto slash = v.find('/'); slash != std::string_view::npos) {
    law.slope_num = text::to_double(v.substr(0, slash), what);
    law.slope_den = text::to_double(v.substr(slash + 1), what);
    if (law.slope_den == 0.0) throw ConfigError("anomaly", "zero denominator in " + std::string(what));
  } else {
    law.slope_num = text::to_double(v, what);
    law.slope_den = 1.0;
  }
}
}  // namespace detail

/// Parses a profile document. Sections absent from the document keep their
/// default laws; `enabled = false` switches an anomaly off.
inline AnomalyProfile parse_profile(std::string_view doc, const AnomalyProfile& base);

inline AnomalyProfile default_profile() {
  AnomalyProfile p;
  return parse_profile(kDefaultProfile, p);
}

inline AnomalyProfile parse_profile(std::string_view doc, const AnomalyProfile& base) {
  AnomalyProfile p = base;
  for (const auto& line : text::parse_sections(doc)) {
    const std::string where = "profile line " + std::to_string(line.number) + ": ";
    if (!line.is_assignment()) throw ConfigError("anomaly", where + "expected key = value");
    const auto key = text::lower(line.key());
    const auto val = line.value();
    try {
      if (line.section == "mmse") {
        if (key == "initial") p.mmse_initial = text::to_double(val, key);
        else if (key == "drift") p.mmse_drift = text::to_double(val, key);
        else if (key == "noise_sd") p.mmse_noise_sd = text::to_double(val, key);
        else throw ConfigError("anomaly", "unknown key '" + key + "'");
        continue;
      }
      AnomalyLaw& law = p.law(parse_anomaly_kind(line.section));
      if (key == "enabled") law.enabled = text::to_bool(val);
      else if (key == "always") law.always = text::to_bool(val);
      else if (key == "frequency_slope") detail::parse_slope(val, law.frequency, key);
      else if (key == "frequency_intercept") law.frequency.intercept = text::to_double(val, key);
      else if (key == "duration_slope") detail::parse_slope(val, law.duration, key);
      else if (key == "duration_intercept") law.duration.intercept = text::to_double(val, key);
      else throw ConfigError("anomaly", "unknown key '" + key + "'");
    } catch (const ConfigError& e) {
      throw ConfigError("anomaly", where + "[" + line.section + "] " + e.what());
    }
  }
  if (!(p.mmse_initial >= kMmseMin && p.mmse_initial <= kMmseMax))
    throw ConfigError("anomaly", "initial MMSE outside [0, 30]");
  if (p.mmse_noise_sd < 0.0) throw ConfigError("anomaly", "negative MMSE noise sd");
  for (auto k : {AnomalyKind::Wandering, AnomalyKind::Forgetting, AnomalyKind::FallWhileWalking,
                 AnomalyKind::FallWhileStanding})
    if (p.law(k).always) throw ConfigError("anomaly", std::string(to_string(k)) + ": 'always' applies to state anomalies only");
  return p;
}

inline AnomalyProfile parse_profile(std::string_view doc) { return parse_profile(doc, default_profile()); }

/// Overlay switching every anomaly off.
inline constexpr std::string_view kQuietProfile = R"([semi_bedridden]
enabled = false
[housebound]
enabled = false
[wandering]
enabled = false
[forgetting]
enabled = false
[fall_while_walking]
enabled = false
[fall_while_standing]
enabled = false
)";

inline AnomalyProfile quiet_profile() { return parse_profile(kQuietProfile); }

struct AnomalyRate {
  double frequency = 0.0;  // per month
  double duration = 0.0;   // unit as in AnomalyLaw
};

/// Laws evaluated at score `m`; disabled anomalies have zero rates.
inline std::array<AnomalyRate, 6> anomaly_rates(const AnomalyProfile& profile, double m) {
  if (!(m >= kMmseMin && m <= kMmseMax)) throw Error("anomaly", "MMSE score " + std::to_string(m) + " outside [0, 30]");
  std::array<AnomalyRate, 6> out{};
  for (auto k : kAllAnomalies) {
    const auto& law = profile.law(k);
    if (law.enabled) out[static_cast<std::size_t>(k)] = {law.frequency(m), law.duration(m)};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Calendar
// ---------------------------------------------------------------------------

/// A month is a twelfth of a 365-day year.
inline std::int64_t month_of_day(std::int64_t day) { return day * 12 / 365; }
inline std::int64_t first_day_of_month(std::int64_t month) { return (month * 365 + 11) / 12; }
inline std::int64_t months_for_days(std::int64_t days) { return days <= 0 ? 0 : month_of_day(days - 1) + 1; }

struct StateInterval {
  AnomalyKind kind;
  std::int64_t first_day;  // inclusive
  std::int64_t end_day;    // exclusive
  bool operator==(const StateInterval&) const = default;
};

struct WanderingEvent {
  std::int64_t day;
  SimTime duration;
  bool operator==(const WanderingEvent&) const = default;
};

struct DayEvent {
  AnomalyKind kind;  // Forgetting, FallWhileWalking or FallWhileStanding
  std::int64_t day;
  SimTime hold;  // falls only
  bool operator==(const DayEvent&) const = default;
};

struct AnomalyCalendar {
  std::int64_t days = 0;
  std::vector<double> mmse;  // per month
  std::vector<StateInterval> states;
  std::vector<WanderingEvent> wandering;
  std::vector<DayEvent> events;

  bool active(AnomalyKind kind, std::int64_t day) const {
    for (const auto& s : states)
      if (s.kind == kind && day >= s.first_day && day < s.end_day) return true;
    return false;
  }
  double mmse_on(std::int64_t day) const { return mmse.at(static_cast<std::size_t>(month_of_day(day))); }
  bool empty() const { return states.empty() && wandering.empty() && events.empty(); }
};

inline constexpr std::string_view kWanderingActivity = "wandering";
inline constexpr std::string_view kWanderingPlace = "Walking";

/// Samples all anomaly occurrences for `n_days`. Each anomaly draws from its
/// own named stream so switching one off leaves the others unchanged.
inline AnomalyCalendar build_calendar(const AnomalyProfile& profile, std::int64_t n_days, std::uint64_t seed,
                                      SimTime epsilon = SimTime::seconds(30)) {
  AnomalyCalendar cal;
  cal.days = std::max<std::int64_t>(n_days, 0);
  const auto n_months = months_for_days(cal.days);

  MmseProcess proc(profile.mmse_initial, profile.mmse_drift, profile.mmse_noise_sd);
  Rng mmse_rng = make_rng(seed, "mmse");
  proc.run(mmse_rng, static_cast<std::size_t>(std::max<std::int64_t>(n_months, 1)));
  cal.mmse = proc.series();
  cal.mmse.resize(static_cast<std::size_t>(n_months));

  // State anomalies: Poisson onsets per month, N(D, (D/5)^2) durations in days.
  for (auto kind : {AnomalyKind::SemiBedridden, AnomalyKind::Housebound}) {
    const auto& law = profile.law(kind);
    if (!law.enabled) continue;
    if (law.always) {
      if (cal.days > 0) cal.states.push_back({kind, 0, cal.days});
      continue;
    }
    Rng rng = make_rng(seed, to_string(kind));
    std::vector<StateInterval> raw;
    for (std::int64_t m = 0; m < n_months; ++m) {
      const double mm = cal.mmse[static_cast<std::size_t>(m)];
      const auto n = draw_poisson(rng, law.frequency(mm));
      const double d_mean = law.duration(mm);
      for (std::int64_t i = 0; i < n; ++i) {
        const auto onset = draw_index(rng, first_day_of_month(m), first_day_of_month(m + 1) - 1);
        const auto len = std::max<std::int64_t>(1, std::llround(draw_normal(rng, d_mean, d_mean / 5.0)));
        if (onset < cal.days) raw.push_back({kind, onset, std::min(onset + len, cal.days)});
      }
    }
    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.first_day < b.first_day; });
    for (const auto& s : raw) {
      if (!cal.states.empty() && cal.states.back().kind == kind && s.first_day <= cal.states.back().end_day)
        cal.states.back().end_day = std::max(cal.states.back().end_day, s.end_day);
      else
        cal.states.push_back(s);
    }
  }

  // Daily events at a rate of F/30 per day.
  if (const auto& law = profile.law(AnomalyKind::Wandering); law.enabled) {
    for (std::int64_t d = 0; d < cal.days; ++d) {
      Rng rng = make_rng(seed, "wandering", static_cast<std::uint64_t>(d));
      const double mm = cal.mmse_on(d);
      const auto n = draw_poisson(rng, law.frequency(mm) / 30.0);
      const double dur = law.duration(mm);
      for (std::int64_t i = 0; i < n; ++i) {
        SimTime t;
        for (int attempt = 0; attempt < 100 && t < epsilon; ++attempt) t = SimTime::minutes(draw_normal(rng, dur, dur / 5.0));
        cal.wandering.push_back({d, std::max(t, epsilon)});
      }
    }
  }
  for (auto kind : {AnomalyKind::Forgetting, AnomalyKind::FallWhileWalking, AnomalyKind::FallWhileStanding}) {
    const auto& law = profile.law(kind);
    if (!law.enabled) continue;
    const std::string stream = kind == AnomalyKind::Forgetting          ? "forgetting"
                               : kind == AnomalyKind::FallWhileWalking ? "fall_walking"
                                                                        : "fall_standing";
    for (std::int64_t d = 0; d < cal.days; ++d) {
      Rng rng = make_rng(seed, stream, static_cast<std::uint64_t>(d));
      const double mm = cal.mmse_on(d);
      const auto n = draw_poisson(rng, law.frequency(mm) / 30.0);
      const SimTime hold = kind == AnomalyKind::Forgetting ? SimTime() : SimTime::seconds(law.duration(mm));
      for (std::int64_t i = 0; i < n; ++i) cal.events.push_back({kind, d, hold});
    }
  }
  std::stable_sort(cal.events.begin(), cal.events.end(), [](const auto& a, const auto& b) { return a.day < b.day; });
  return cal;
}

/// Catalog entries the anomalies may introduce, for activities the base
/// catalog lacks.
inline ActivityParams wandering_params() {
  ActivityParams p;
  p.name = std::string(kWanderingActivity);
  p.tier = Tier::Necessary;
  p.duration_mean = 1.0;
  p.place = std::string(kWanderingPlace);
  return p;
}

inline ActivityParams nap_params(const Catalog& base) {
  ActivityParams p;
  if (const auto* a = base.find(kNapActivity)) p = *a;
  p.name = std::string(kNapActivity);
  p.tier = Tier::Random;
  p.duration_mean = 40.0;
  p.duration_sd = 8.0;
  p.prob = 1.0;
  if (p.place.empty()) {
    if (const auto* s = base.find("sleep")) p.place = s->place;
  }
  return p;
}

/// Catalog changes for `day`: housebound and semi-bedridden overrides and the
/// wandering instances scheduled that day. Overrides of activities missing
/// from `base` are skipped.
inline CatalogDelta apply_state_overrides(const AnomalyCalendar& cal, std::int64_t day, const Catalog& base) {
  CatalogDelta delta;
  const bool hb = cal.active(AnomalyKind::Housebound, day);
  const bool sb = cal.active(AnomalyKind::SemiBedridden, day);
  auto necessary = [&](const std::string& name, double rate, double mean, double sd) {
    const auto* a = base.find(name);
    if (!a) return;
    ActivityParams p = *a;
    p.tier = Tier::Necessary;
    p.rate = rate;
    p.duration_mean = mean;
    p.duration_sd = sd;
    p.prob = 0.0;
    delta.upserts.push_back(std::move(p));
  };
  if (sb) {
    necessary("go out", 1.0 / 7.0, 20.0, 4.0);
    if (const auto* r = base.find("rest")) {
      ActivityParams p = *r;
      p.duration_mean = 60.0;
      p.duration_sd = 10.0;
      delta.upserts.push_back(std::move(p));
    }
    delta.upserts.push_back(nap_params(base));
  } else if (hb) {
    necessary("go out", 1.0 / 14.0, 20.0, 4.0);
  }
  if (hb) necessary("use the phone", 1.0 / 3.0, 10.0, 2.0);

  bool any_wandering = false;
  for (const auto& w : cal.wandering)
    if (w.day == day) {
      delta.forced.push_back({std::string(kWanderingActivity), w.duration});
      any_wandering = true;
    }
  if (any_wandering && !base.find(kWanderingActivity)) delta.upserts.push_back(wandering_params());
  return delta;
}

/// Base catalog plus the entries anomalies can add, for place and appliance
/// lookups on generated sequences.
inline Catalog lookup_catalog(const Catalog& base) {
  Catalog c = base;
  if (!c.find(kWanderingActivity)) c.upsert(wandering_params());
  if (!c.find(kNapActivity)) c.upsert(nap_params(base));
  return c;
}

// ---------------------------------------------------------------------------
// Forgetting
// ---------------------------------------------------------------------------

struct ForgettingPlan {
  std::size_t instance = 0;  // index into the sequence
  std::string appliance;
  SimTime start;  // end of the instance
  SimTime end;    // next start of an activity at the same place, or the horizon
};

/// Picks one appliance-using instance starting on `day` uniformly at random
/// and one of its appliances; the appliance stays on until the resident next
/// starts an activity at the same place. Returns nothing when the day has no
/// appliance use or the next activity is at the same place already.
inline std::optional<ForgettingPlan> plan_forgetting(std::int64_t day, const ActivitySequence& seq,
                                                     const Catalog& lookup, Rng& rng, std::string* note = nullptr) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < seq.items.size(); ++i) {
    const auto& a = seq.items[i];
    if (a.start.day() != day) continue;
    if (const auto* p = lookup.find(a.name); p && !p->appliances.empty()) candidates.push_back(i);
  }
  if (candidates.empty()) {
    if (note) *note = "day " + std::to_string(day) + ": forgetting dropped, no appliance use";
    return std::nullopt;
  }
  const std::size_t idx = candidates[static_cast<std::size_t>(draw_index(rng, 0, static_cast<std::int64_t>(candidates.size()) - 1))];
  const auto& act = seq.items[idx];
  const auto& params = lookup.at(act.name);
  ForgettingPlan plan;
  plan.instance = idx;
  plan.appliance = params.appliances[static_cast<std::size_t>(draw_index(rng, 0, static_cast<std::int64_t>(params.appliances.size()) - 1))];
  plan.start = act.end();
  plan.end = seq.horizon();
  for (std::size_t j = idx + 1; j < seq.items.size(); ++j) {
    const auto* p = lookup.find(seq.items[j].name);
    if (p && p->place == params.place) {
      plan.end = seq.items[j].start;
      break;
    }
  }
  if (plan.end <= plan.start) {
    if (note) *note = "day " + std::to_string(day) + ": forgetting dropped, '" + act.name + "' is followed at the same place";
    return std::nullopt;
  }
  return plan;
}

}  // namespace adlsim
