#pragma once

// End-to-end runs: schedule, anomalies, walks, sensors and the exported bundle.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "adlsim/anomaly.hpp"
#include "adlsim/catalog.hpp"
#include "adlsim/core.hpp"
#include "adlsim/floor_plan.hpp"
#include "adlsim/ingest.hpp"
#include "adlsim/metrics.hpp"
#include "adlsim/scheduler.hpp"
#include "adlsim/sensing.hpp"
#include "adlsim/trajectory.hpp"
#include "json.hpp"

namespace adlsim {

// ---------------------------------------------------------------------------
// Realization
// ---------------------------------------------------------------------------

/// The schedule as lived: walks inserted between activities, falls and
/// wandering applied, forgetting intervals resolved.
struct Realization {
  ActivitySequence activities;
  std::vector<Trajectory> trajectories;
  std::vector<AnomalyLabel> labels;  // ids are 1-based and ordered by start
  std::map<std::string, std::vector<std::pair<SimTime, SimTime>>> appliance_on;
  std::vector<std::string> notes;
};

struct RealizeOptions {
  std::uint64_t seed = 0;
  SimTime epsilon = SimTime::seconds(30);
};

inline bool is_wandering(const ActivityInstance& a) { return a.name == kWanderingActivity; }

/// Turns a schedule into a realized timeline.
///
/// A normal walk occupies the tail of the activity it leaves and ends exactly
/// when the next activity starts. If the walk (plus any fall holds) does not
/// fit, the next activity starts late instead, keeping at least epsilon of the
/// previous one. A wandering activity is itself a walk from the current
/// location through staging points to the next activity's location; the next
/// activity starts when it ends.
inline Realization realize(const ActivitySequence& sched, const AnomalyCalendar& cal, const Catalog& lookup,
                           Planner& planner, const RealizeOptions& opt) {
  Realization out;
  const auto& S = sched.items;
  const std::size_t n = S.size();
  const SimTime horizon = sched.horizon();
  const AgentModel& agent = planner.agent();

  struct PendingFall {
    FallKind kind;
    SimTime hold;
    std::uint64_t seed;
    std::int64_t day;
  };
  std::map<std::size_t, std::vector<PendingFall>> falls_on;  // keyed by destination index
  {
    // Walks that can host a fall, by day.
    std::map<std::int64_t, std::vector<std::size_t>> walks;
    for (std::size_t k = 0; k < n; ++k) {
      if (is_wandering(S[k])) {
        walks[S[k].start.day()].push_back(k + 1);
      } else if (k > 0 && !is_wandering(S[k - 1]) && !(S[k - 1].location == S[k].location)) {
        walks[S[k].start.day()].push_back(k);
      }
    }
    for (auto& [d, v] : walks) std::sort(v.begin(), v.end());
    std::map<std::pair<int, std::int64_t>, Rng> pickers;
    for (const auto& ev : cal.events) {
      if (ev.kind == AnomalyKind::Forgetting) continue;
      const bool walking = ev.kind == AnomalyKind::FallWhileWalking;
      auto key = std::make_pair(walking ? 0 : 1, ev.day);
      auto it = pickers.find(key);
      if (it == pickers.end())
        it = pickers.emplace(key, make_rng(opt.seed, walking ? "fall_walking_pick" : "fall_standing_pick",
                                           static_cast<std::uint64_t>(ev.day))).first;
      Rng& rng = it->second;
      const auto& cands = walks[ev.day];
      const std::uint64_t sub = rng();
      if (cands.empty()) {
        out.notes.push_back("day " + std::to_string(ev.day) + ": " + std::string(to_string(ev.kind)) +
                            " dropped, no walk that day");
        continue;
      }
      const auto w = cands[static_cast<std::size_t>(draw_index(rng, 0, static_cast<std::int64_t>(cands.size()) - 1))];
      falls_on[w].push_back({walking ? FallKind::WhileWalking : FallKind::WhileStanding, ev.hold, sub, ev.day});
    }
  }

  std::uint64_t next_label = 1;
  auto apply_falls = [&](Trajectory& tr, std::size_t walk) {
    auto it = falls_on.find(walk);
    if (it == falls_on.end()) return;
    const std::size_t first = out.labels.size();
    for (const auto& f : it->second) {
      Rng rng(f.seed);
      const auto res = inject_fall(tr, f.kind, rng, agent, &planner, f.hold);
      // A hold inserted earlier on the walk delays the ones already placed.
      for (std::size_t i = first; i < out.labels.size(); ++i)
        if (out.labels[i].start > res.hold_start) {
          out.labels[i].start += f.hold;
          out.labels[i].end += f.hold;
        }
      AnomalyLabel lab;
      lab.id = next_label++;
      lab.kind = res.kind == FallKind::WhileWalking ? AnomalyKind::FallWhileWalking : AnomalyKind::FallWhileStanding;
      lab.start = res.hold_start;
      lab.end = res.hold_end;
      lab.metadata["x"] = std::to_string(res.location.x);
      lab.metadata["y"] = std::to_string(res.location.y);
      if (res.note) {
        lab.metadata["note"] = *res.note;
        out.notes.push_back("day " + std::to_string(f.day) + ": " + *res.note);
      }
      tr.label_ids.push_back(lab.id);
      out.labels.push_back(std::move(lab));
    }
  };

  std::vector<SimTime> rs(n);
  GridLocation here = n ? S[0].location : GridLocation{};
  SimTime wander_end;
  bool wandered = false;  // the next activity is reached by a wandering walk
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0) {
      rs[0] = S[0].start;
    } else if (wandered) {
      rs[k] = wander_end;
      wandered = false;
    } else if (is_wandering(S[k]) || here == S[k].location) {
      rs[k] = std::max(S[k].start, rs[k - 1] + opt.epsilon);
    } else {
      const auto path = planner.plan_path(here, S[k].location);
      SimTime holds;
      if (auto it = falls_on.find(k); it != falls_on.end())
        for (const auto& f : it->second) holds += f.hold;
      const SimTime arrival = std::max(S[k].start, rs[k - 1] + opt.epsilon + walk_time(path, agent) + holds);
      Trajectory tr = timestamp_path(path, agent, arrival - holds);
      tr.transition = static_cast<std::int64_t>(k);
      apply_falls(tr, k);
      out.trajectories.push_back(std::move(tr));
      rs[k] = arrival;
    }
    if (!is_wandering(S[k])) {
      here = S[k].location;
      continue;
    }
    const GridLocation target = k + 1 < n ? S[k + 1].location : S[k].location;
    Rng rng = make_rng(opt.seed, "wandering_path", S[k].id);
    Trajectory tr = plan_wandering(planner, here, target, S[k].duration, rs[k], rng);
    tr.transition = static_cast<std::int64_t>(k + 1);
    const SimTime walked = tr.end() - tr.start();
    apply_falls(tr, k + 1);
    AnomalyLabel lab;
    lab.id = next_label++;
    lab.kind = AnomalyKind::Wandering;
    lab.start = rs[k];
    lab.end = tr.end();
    lab.metadata["sampled_seconds"] = text::fixed(S[k].duration.to_seconds(), 1);
    lab.metadata["walk_seconds"] = text::fixed(walked.to_seconds(), 1);
    tr.label_ids.insert(tr.label_ids.begin(), lab.id);
    out.labels.push_back(std::move(lab));
    wander_end = tr.end();
    wandered = true;
    here = target;
    out.trajectories.push_back(std::move(tr));
  }

  // Realized activities.
  out.activities.day_count = sched.day_count;
  for (std::size_t k = 0; k < n; ++k) {
    if (rs[k] >= horizon) {
      out.notes.push_back(S[k].name + " pushed past the horizon and dropped");
      break;
    }
    ActivityInstance a = S[k];
    const SimTime end = k + 1 < n ? std::min(rs[k + 1], horizon) : horizon;
    a.start = rs[k];
    a.duration = end - rs[k];
    out.activities.items.push_back(std::move(a));
  }

  // State anomalies.
  for (const auto& s : cal.states) {
    AnomalyLabel lab;
    lab.id = next_label++;
    lab.kind = s.kind;
    lab.start = SimTime::days(s.first_day);
    lab.end = SimTime::days(s.end_day);
    lab.metadata["days"] = std::to_string(s.end_day - s.first_day);
    out.labels.push_back(std::move(lab));
  }

  // Appliances: on for the whole realized slot, and on after a forgotten use.
  std::map<std::string, std::vector<std::pair<SimTime, SimTime>>> on;
  for (const auto& a : out.activities.items)
    if (const auto* p = lookup.find(a.name))
      for (const auto& ap : p->appliances) on[ap].push_back({a.start, a.end()});
  {
    std::map<std::int64_t, Rng> pickers;
    for (const auto& ev : cal.events) {
      if (ev.kind != AnomalyKind::Forgetting) continue;
      auto it = pickers.find(ev.day);
      if (it == pickers.end())
        it = pickers.emplace(ev.day, make_rng(opt.seed, "forgetting_pick", static_cast<std::uint64_t>(ev.day))).first;
      std::string note;
      const auto plan = plan_forgetting(ev.day, out.activities, lookup, it->second, &note);
      if (!plan) {
        out.notes.push_back(note);
        continue;
      }
      on[plan->appliance].push_back({plan->start, plan->end});
      AnomalyLabel lab;
      lab.id = next_label++;
      lab.kind = AnomalyKind::Forgetting;
      lab.start = plan->start;
      lab.end = plan->end;
      lab.metadata["appliance"] = plan->appliance;
      lab.metadata["activity"] = out.activities.items[plan->instance].name;
      out.labels.push_back(std::move(lab));
    }
  }
  for (auto& [ap, v] : on) out.appliance_on[ap] = merge_intervals(std::move(v));

  // Stable chronological label ids.
  std::stable_sort(out.labels.begin(), out.labels.end(), [](const auto& a, const auto& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.kind < b.kind;
  });
  std::map<std::uint64_t, std::uint64_t> remap;
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    remap[out.labels[i].id] = i + 1;
    out.labels[i].id = i + 1;
  }
  for (auto& tr : out.trajectories)
    for (auto& id : tr.label_ids) id = remap.at(id);
  return out;
}

inline SensorTimeline make_timeline(const ActivitySequence& activities, const Realization& r) {
  SensorTimeline tl;
  tl.initial = activities.items.empty() ? GridLocation{} : activities.items.front().location;
  tl.trajectories = r.trajectories;
  tl.appliance_on = r.appliance_on;
  tl.horizon = activities.horizon();
  return tl;
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct RunConfig {
  std::uint64_t seed = 1;
  int days = 7;
  std::string layout_text = std::string(kStudioLayout);
  std::string catalog_text = std::string(kElderlyCatalog);
  std::string profile_text = std::string(kDefaultProfile);
  std::string layout_source = "bundled:studio";
  std::string catalog_source = "bundled:elderly";
  std::string profile_source = "bundled:default";
  SchedulerConfig scheduler;
  AgentModel agent;
  PathWeights weights;
  bool write_sensors = true;
};

struct SimulationResult {
  Layout layout;
  Catalog catalog;
  AnomalyProfile profile;
  AnomalyCalendar calendar;
  ActivitySequence schedule;
  Realization realization;
};

/// Everything except the sensor pass, in memory.
inline SimulationResult simulate(const RunConfig& cfg) {
  if (cfg.days <= 0) throw ConfigError("cli", "horizon must be at least one day");
  SimulationResult r;
  r.catalog = parse_catalog(cfg.catalog_text);
  r.layout = load_plan(cfg.layout_text);
  r.profile = parse_profile(cfg.profile_text);
  const Catalog lookup = lookup_catalog(r.catalog);
  check_zones(r.layout, lookup);

  SchedulerConfig sc = cfg.scheduler;
  sc.rng_seed = cfg.seed;
  r.calendar = build_calendar(r.profile, cfg.days, cfg.seed, sc.epsilon);
  const auto& cal = r.calendar;
  const auto& base = r.catalog;
  r.schedule = schedule_days(base, sc, cfg.days, [&](std::int64_t d) { return apply_state_overrides(cal, d, base); },
                             &r.layout.zones)
                   .sequence;
  Planner planner(r.layout.plan, cfg.agent, cfg.weights);
  r.realization = realize(r.schedule, r.calendar, lookup, planner, {cfg.seed, sc.epsilon});
  return r;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

inline void write_activities(std::ostream& os, const ActivitySequence& seq) {
  os << "day,name,start,duration,x,y,id\n";
  for (const auto& a : seq.items)
    os << a.start.day() << "," << text::csv_quote(a.name) << "," << format_time(a.start) << ","
       << text::fixed(a.duration.to_seconds(), 1) << "," << a.location.x << "," << a.location.y << "," << a.id << "\n";
}

inline void write_trajectories(std::ostream& os, const std::vector<Trajectory>& trs) {
  os << "t,x,y,body_radius,purpose,label_id,transition\n";
  for (const auto& tr : trs) {
    std::string ids;
    for (auto id : tr.label_ids) ids += (ids.empty() ? "" : ";") + std::to_string(id);
    for (const auto& p : tr.points)
      os << format_time(p.t) << "," << p.location.x << "," << p.location.y << "," << p.radius << ","
         << to_string(tr.purpose) << "," << ids << "," << tr.transition << "\n";
  }
}

inline void write_labels(std::ostream& os, const std::vector<AnomalyLabel>& labels) {
  os << "id,kind,start,end,metadata\n";
  for (const auto& l : labels)
    os << l.id << "," << to_string(l.kind) << "," << format_time(l.start) << "," << format_time(l.end) << ","
       << text::csv_quote(metadata_string(l.metadata)) << "\n";
}

inline void write_mmse(std::ostream& os, const std::vector<double>& series) {
  os << "month,score\n";
  for (std::size_t m = 0; m < series.size(); ++m) os << m << "," << text::fixed(series[m], 6) << "\n";
}

inline std::string to_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = fnv1a(cfg.layout_text);
  h = fnv1a(cfg.catalog_text, h);
  h = fnv1a(cfg.profile_text, h);
  h = fnv1a(std::to_string(cfg.seed) + "/" + std::to_string(cfg.days), h);
  return h;
}

inline nlohmann::json manifest_json(const RunConfig& cfg, const SimulationResult& r, std::int64_t frames) {
  nlohmann::json j;
  j["generator"] = "adlsim";
  j["seed"] = cfg.seed;
  j["days"] = cfg.days;
  j["config_hash"] = to_hex(config_hash(cfg));
  j["scheduler"] = {{"epsilon_seconds", cfg.scheduler.epsilon.to_seconds()}, {"max_retries", cfg.scheduler.max_retries}};
  j["agent"] = {{"speed", cfg.agent.speed}, {"stride", cfg.agent.stride}};
  j["inputs"] = {{"layout", {{"source", cfg.layout_source}, {"text", cfg.layout_text}}},
                 {"catalog", {{"source", cfg.catalog_source}, {"text", cfg.catalog_text}}},
                 {"profile", {{"source", cfg.profile_source}, {"text", cfg.profile_text}}}};
  j["counts"] = {{"activities", r.realization.activities.items.size()},
                 {"trajectories", r.realization.trajectories.size()},
                 {"labels", r.realization.labels.size()},
                 {"sensor_changes", frames},
                 {"sensor_samples", r.realization.activities.horizon().count()}};
  j["notes"] = r.realization.notes;
  return j;
}

/// Rebuilds the run configuration recorded in a manifest.
inline RunConfig config_from_manifest(const std::string& json_text) {
  RunConfig cfg;
  try {
    const auto j = nlohmann::json::parse(json_text);
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.days = j.at("days").get<int>();
    const auto& in = j.at("inputs");
    cfg.layout_text = in.at("layout").at("text").get<std::string>();
    cfg.layout_source = in.at("layout").at("source").get<std::string>();
    cfg.catalog_text = in.at("catalog").at("text").get<std::string>();
    cfg.catalog_source = in.at("catalog").at("source").get<std::string>();
    cfg.profile_text = in.at("profile").at("text").get<std::string>();
    cfg.profile_source = in.at("profile").at("source").get<std::string>();
    if (j.contains("scheduler")) {
      cfg.scheduler.epsilon = SimTime::seconds(j["scheduler"].at("epsilon_seconds").get<double>());
      cfg.scheduler.max_retries = j["scheduler"].at("max_retries").get<int>();
    }
    if (j.contains("agent")) {
      cfg.agent.speed = j["agent"].at("speed").get<double>();
      cfg.agent.stride = j["agent"].at("stride").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cli", std::string("malformed manifest: ") + e.what());
  }
  return cfg;
}

struct RunSummary {
  std::filesystem::path out_dir;
  std::size_t activities = 0;
  std::size_t labels = 0;
  std::int64_t sensor_changes = 0;
  double seconds = 0.0;
};

namespace detail {
inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cli", "cannot write '" + p.string() + "'");
  return os;
}

// Replaces `dst` with `src`. An existing `dst` is only removed if it is empty
// or holds a previous bundle.
inline void publish(const std::filesystem::path& src, const std::filesystem::path& dst) {
  namespace fs = std::filesystem;
  if (fs::exists(dst)) {
    const bool bundle = fs::is_directory(dst) && (fs::is_empty(dst) || fs::exists(dst / "manifest.json"));
    if (!bundle) throw ConfigError("cli", "output directory '" + dst.string() + "' exists and is not a bundle");
    fs::remove_all(dst);
  }
  fs::rename(src, dst);
}
}  // namespace detail

/// Writes the bundle into `out_dir`. Files are assembled in a sibling
/// staging directory that only replaces `out_dir` on success.
inline RunSummary run_simulation(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path target = fs::absolute(out_dir);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path stage = target.parent_path() / ("." + target.filename().string() + ".partial");
  fs::remove_all(stage);
  fs::create_directories(stage);
  RunSummary sum;
  try {
    const auto r = simulate(cfg);
    const auto& real = r.realization;
    {
      auto os = detail::open_out(stage / "activities.csv");
      write_activities(os, real.activities);
    }
    {
      auto os = detail::open_out(stage / "trajectories.csv");
      write_trajectories(os, real.trajectories);
    }
    {
      auto os = detail::open_out(stage / "labels.csv");
      write_labels(os, real.labels);
    }
    {
      auto os = detail::open_out(stage / "mmse.csv");
      write_mmse(os, r.calendar.mmse);
    }
    std::int64_t changes = 0;
    {
      auto os = detail::open_out(stage / "sensors.csv");
      const auto tl = make_timeline(real.activities, real);
      write_sensor_header(os, r.layout.sensors, tl.horizon.count());
      if (cfg.write_sensors)
        SensorSampler(r.layout.sensors, tl).run([&](std::int64_t i, const BitVector& b) {
          write_frame(os, i, b);
          ++changes;
        });
      if (!os) throw Error("cli", "failed writing sensors.csv");
    }
    {
      auto os = detail::open_out(stage / "manifest.json");
      os << manifest_json(cfg, r, changes).dump(2) << "\n";
    }
    detail::publish(stage, target);
    sum.activities = real.activities.items.size();
    sum.labels = real.labels.size();
    sum.sensor_changes = changes;
  } catch (...) {
    std::error_code ec;
    fs::remove_all(stage, ec);
    throw;
  }
  sum.out_dir = target;
  sum.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sum;
}

// ---------------------------------------------------------------------------
// Readers
// ---------------------------------------------------------------------------

inline std::vector<std::vector<std::string>> read_csv_rows(std::string_view doc, std::string_view header) {
  std::vector<std::vector<std::string>> rows;
  bool first = true;
  for (const auto& raw : text::split(doc, '\n')) {
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (first) {
      first = false;
      if (line != header) throw ConfigError("io", "expected header '" + std::string(header) + "'");
      continue;
    }
    rows.push_back(text::csv_fields(line));
  }
  return rows;
}

/// activities.csv back into a sequence; `days` defaults to the last full day covered.
inline ActivitySequence read_activities(std::string_view doc, std::optional<int> days = std::nullopt) {
  ActivitySequence seq;
  for (const auto& f : read_csv_rows(doc, "day,name,start,duration,x,y,id")) {
    if (f.size() != 7) throw ConfigError("io", "activities.csv: expected 7 fields");
    ActivityInstance a;
    a.name = f[1];
    a.start = parse_time(f[2]);
    a.duration = SimTime::seconds(text::to_double(f[3], "duration"));
    a.location = {static_cast<int>(text::to_int(f[4])), static_cast<int>(text::to_int(f[5]))};
    a.id = static_cast<std::uint64_t>(text::to_int(f[6]));
    seq.items.push_back(std::move(a));
  }
  if (days) seq.day_count = *days;
  else if (!seq.items.empty()) seq.day_count = static_cast<int>(seq.items.back().end().count() / kTicksPerDay);
  return seq;
}

inline std::vector<AnomalyLabel> read_labels(std::string_view doc) {
  std::vector<AnomalyLabel> out;
  for (const auto& f : read_csv_rows(doc, "id,kind,start,end,metadata")) {
    if (f.size() != 5) throw ConfigError("io", "labels.csv: expected 5 fields");
    AnomalyLabel l;
    l.id = static_cast<std::uint64_t>(text::to_int(f[0]));
    l.kind = parse_anomaly_kind(f[1]);
    l.start = parse_time(f[2]);
    l.end = parse_time(f[3]);
    try {
      const auto md = nlohmann::json::parse(f[4]);
      for (const auto& [k, v] : md.items()) l.metadata[k] = v.get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("io", "labels.csv: malformed metadata");
    }
    out.push_back(std::move(l));
  }
  return out;
}

/// Normal-form events as whole days from the midnight before the first event;
/// uncovered time becomes `other` and a trailing partial day is dropped.
inline ActivitySequence sequence_from_events(const std::vector<RawEvent>& events) {
  if (events.empty()) throw ConfigError("io", "no events");
  Instant first = events.front().start, last = events.front().end;
  for (const auto& e : events) {
    first = std::min(first, e.start);
    last = std::max(last, e.end);
  }
  const Instant origin = first - (((first % kTicksPerDay) + kTicksPerDay) % kTicksPerDay);
  const int days = static_cast<int>((last - origin) / kTicksPerDay);
  if (days <= 0) throw ConfigError("io", "events cover less than one full day");
  using namespace detail;
  const Instant to = origin + days * kTicksPerDay;
  auto v = merge_same(fill_gaps(resolve_overlaps(window(to_segs(events), origin, to)), origin, to, 0));
  return finish(v, origin, days).sequence;
}

/// Reads a sequence from activities.csv or a normal-form event file.
inline ActivitySequence read_sequence(const std::string& path) {
  const auto doc = text::read_file(path);
  const auto lines = text::split(doc, '\n');
  const auto first_line = text::trim(lines.front());
  if (first_line == "day,name,start,duration,x,y,id") return read_activities(doc);
  return sequence_from_events(parse_events(doc));
}

// ---------------------------------------------------------------------------
// Plot data
// ---------------------------------------------------------------------------

/// Per-figure tables from a finished bundle: monthly anomaly counts and mean
/// durations, weekly outing frequency with nap and sleep minutes, and the
/// sensor activity around every anomalous walk.
inline void export_plotdata(const std::filesystem::path& bundle, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  for (const char* f : {"manifest.json", "activities.csv", "labels.csv", "mmse.csv", "sensors.csv", "trajectories.csv"})
    if (!fs::exists(bundle / f)) throw ConfigError("cli", "incomplete bundle: missing " + std::string(f));
  const auto manifest = nlohmann::json::parse(text::read_file((bundle / "manifest.json").string()));
  const int days = manifest.at("days").get<int>();
  const auto acts = read_activities(text::read_file((bundle / "activities.csv").string()), days);
  const auto labels = read_labels(text::read_file((bundle / "labels.csv").string()));
  std::vector<double> mmse;
  for (const auto& f : read_csv_rows(text::read_file((bundle / "mmse.csv").string()), "month,score"))
    mmse.push_back(text::to_double(f.at(1)));
  const Catalog catalog = parse_catalog(manifest.at("inputs").at("catalog").at("text").get<std::string>());
  fs::create_directories(out_dir);

  {
    const auto months = months_for_days(days);
    std::vector<std::array<int, 6>> count(static_cast<std::size_t>(months), std::array<int, 6>{});
    std::vector<std::array<double, 6>> minutes(static_cast<std::size_t>(months), std::array<double, 6>{});
    for (const auto& l : labels) {
      const auto m = static_cast<std::size_t>(month_of_day(l.start.day()));
      if (m >= count.size()) continue;
      count[m][static_cast<std::size_t>(l.kind)]++;
      minutes[m][static_cast<std::size_t>(l.kind)] += (l.end - l.start).to_minutes();
    }
    auto os = detail::open_out(out_dir / "monthly_anomalies.csv");
    os << "month,mmse";
    for (auto k : kAllAnomalies) os << "," << to_string(k) << "_count";
    for (auto k : kAllAnomalies) os << "," << to_string(k) << "_mean_minutes";
    os << "\n";
    for (std::size_t m = 0; m < count.size(); ++m) {
      os << m << "," << (m < mmse.size() ? text::fixed(mmse[m], 4) : "");
      for (std::size_t k = 0; k < 6; ++k) os << "," << count[m][k];
      for (std::size_t k = 0; k < 6; ++k) os << "," << (count[m][k] ? text::fixed(minutes[m][k] / count[m][k], 3) : "0");
      os << "\n";
    }
  }
  {
    std::string sleep;
    try {
      sleep = default_sleep_activity(catalog);
    } catch (const ConfigError&) {
    }
    const int weeks = (days + 6) / 7;
    std::vector<int> outings(static_cast<std::size_t>(weeks), 0);
    std::vector<double> nap(static_cast<std::size_t>(weeks), 0.0), sleep_min(static_cast<std::size_t>(weeks), 0.0);
    std::vector<int> hb(static_cast<std::size_t>(weeks), 0), sb(static_cast<std::size_t>(weeks), 0);
    for (const auto& a : acts.items) {
      const auto w = static_cast<std::size_t>(a.start.day() / 7);
      if (w >= outings.size()) continue;
      if (a.name == "go out") outings[w]++;
      if (a.name == kNapActivity) nap[w] += a.duration.to_minutes();
      if (a.name == sleep) sleep_min[w] += a.duration.to_minutes();
    }
    for (const auto& l : labels) {
      if (l.kind != AnomalyKind::Housebound && l.kind != AnomalyKind::SemiBedridden) continue;
      for (auto d = l.start.day(); d < l.end.day() && d < days; ++d)
        (l.kind == AnomalyKind::Housebound ? hb : sb)[static_cast<std::size_t>(d / 7)]++;
    }
    auto os = detail::open_out(out_dir / "weekly_activity.csv");
    os << "week,days,go_out_per_day,nap_minutes_per_day,sleep_minutes_per_day,housebound_days,semi_bedridden_days\n";
    for (int w = 0; w < weeks; ++w) {
      const int n = std::min(7, days - 7 * w);
      const auto i = static_cast<std::size_t>(w);
      os << w << "," << n << "," << text::fixed(outings[i] / static_cast<double>(n), 4) << ","
         << text::fixed(nap[i] / n, 2) << "," << text::fixed(sleep_min[i] / n, 2) << "," << hb[i] << "," << sb[i] << "\n";
    }
  }
  {
    // Walks carrying a label, with the sensors active around them.
    struct Span {
      std::int64_t transition;
      std::string purpose, ids;
      SimTime begin, end;
    };
    std::vector<Span> spans;
    std::string cur_key;
    for (const auto& f : read_csv_rows(text::read_file((bundle / "trajectories.csv").string()),
                                       "t,x,y,body_radius,purpose,label_id,transition")) {
      if (f.size() != 7 || f[5].empty()) continue;
      const SimTime t = parse_time(f[0]);
      const std::string key = f[6] + "/" + f[5];
      if (key != cur_key) {
        spans.push_back({text::to_int(f[6]), f[4], f[5], t, t});
        cur_key = key;
      }
      spans.back().end = t;
    }
    const auto log = read_sensor_log(text::read_file((bundle / "sensors.csv").string()));
    auto os = detail::open_out(out_dir / "transition_traces.csv");
    os << "transition,purpose,label_ids,index,t,active_sensors\n";
    const SimTime margin = SimTime::seconds(10);
    std::size_t k = 0;
    for (const auto& sp : spans) {
      const SimTime lo = sp.begin - std::min(sp.begin, margin), hi = sp.end + margin;
      while (k > 0 && log.frames[k].index > lo.count()) --k;
      while (k + 1 < log.frames.size() && log.frames[k + 1].index <= lo.count()) ++k;
      for (std::size_t i = k; i < log.frames.size() && log.frames[i].index <= hi.count(); ++i) {
        std::string active;
        for (std::size_t b = 0; b < log.frames[i].bits.size(); ++b)
          if (log.frames[i].bits.get(b)) active += (active.empty() ? "" : " ") + std::to_string(b + 1);
        const std::int64_t idx = std::max(log.frames[i].index, lo.count());
        os << sp.transition << "," << sp.purpose << "," << sp.ids << "," << idx << "," << format_time(SimTime(idx))
           << "," << active << "\n";
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Metrics report
// ---------------------------------------------------------------------------

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

inline MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return r;
}

struct MetricsRow {
  std::string name;
  int trials = 0;
  MeanSd rho_self, rho_cross, intra, inter;
};

struct MetricsConfig {
  double freq = 1.0 / 60.0;
  int trials = 10;
  std::uint64_t seed = 1;
  std::string sleep;  // empty: the longest fundamental
  SchedulerConfig scheduler;
};

/// Rows for the reference itself and each candidate. With a catalog, also
/// sequences generated per trial by the scheduler and the RanD and RanS
/// baselines. Candidate activities must all occur in the reference or the
/// catalog.
inline std::vector<MetricsRow> run_metrics(const ActivitySequence& reference, const Catalog* catalog,
                                           const std::vector<std::pair<std::string, ActivitySequence>>& candidates,
                                           const MetricsConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("metrics", "trials must be at least 1");
  if (reference.items.empty()) throw ConfigError("metrics", "empty reference");
  std::set<std::string> known;
  for (const auto& a : reference.items) known.insert(a.name);
  if (catalog)
    for (const auto& a : catalog->activities()) known.insert(a.name);
  for (const auto& [n, s] : candidates)
    for (const auto& a : s.items)
      if (!known.count(a.name)) throw ConfigError("metrics", n + ": activity '" + a.name + "' has no counterpart in the reference");
  Alphabet al;
  for (const auto& n : known) al.add(n);

  const auto ref = to_day_strings(reference, cfg.freq, al);
  std::vector<MetricsRow> rows;
  rows.push_back({"reference", 1, {rho_self(ref), 0}, {}, {}, {}});

  auto row_of = [&](const std::string& name, const std::vector<ActivitySequence>& seqs) {
    std::vector<double> s, c, i, e;
    for (const auto& q : seqs) {
      const auto d = deltas(to_day_strings(q, cfg.freq, al), ref);
      s.push_back(d.rho_self);
      c.push_back(d.rho_cross);
      i.push_back(d.intra);
      e.push_back(d.inter);
    }
    rows.push_back({name, static_cast<int>(seqs.size()), mean_sd(s), mean_sd(c), mean_sd(i), mean_sd(e)});
  };
  for (const auto& [n, s] : candidates) row_of(n, {s});
  if (!catalog) return rows;

  const int days = reference.day_count;
  const std::string sleep = cfg.sleep.empty() ? default_sleep_activity(*catalog) : cfg.sleep;
  std::vector<ActivitySequence> proposed, rand_d, rand_s;
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = derive_seed(cfg.seed, "metrics_trial", static_cast<std::uint64_t>(t));
    SchedulerConfig sc = cfg.scheduler;
    sc.rng_seed = seed;
    proposed.push_back(schedule_days(*catalog, sc, days).sequence);
    rand_d.push_back(generate_rand(*catalog, days, seed, sc.epsilon));
    rand_s.push_back(generate_rans(*catalog, reference, sleep, days, seed, sc.epsilon));
  }
  row_of("proposed", proposed);
  row_of("RanD", rand_d);
  row_of("RanS", rand_s);
  return rows;
}

inline std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "data,trials,rho_self_mean,rho_self_sd,rho_cross_mean,rho_cross_sd,delta_intra_mean,delta_intra_sd,"
                    "delta_inter_mean,delta_inter_sd\n";
  for (const auto& r : rows) {
    out += text::csv_quote(r.name) + "," + std::to_string(r.trials);
    for (const auto* m : {&r.rho_self, &r.rho_cross, &r.intra, &r.inter})
      out += "," + text::fixed(m->mean, 2) + "," + text::fixed(m->sd, 2);
    out += "\n";
  }
  return out;
}

inline std::string metrics_table(const std::vector<MetricsRow>& rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %20s %20s %20s %20s\n", "data", "rho(A,A)", "rho(A,A*)", "delta_intra",
                "delta_inter");
  out += buf;
  auto cell = [](const MeanSd& m) {
    char c[64];
    std::snprintf(c, sizeof c, "%.2f (%.2f)", m.mean, m.sd);
    return std::string(c);
  };
  for (const auto& r : rows) {
    const bool ref = r.name == "reference";
    std::snprintf(buf, sizeof buf, "%-12s %20s %20s %20s %20s\n", r.name.c_str(), cell(r.rho_self).c_str(),
                  ref ? "-" : cell(r.rho_cross).c_str(), ref ? "0" : cell(r.intra).c_str(),
                  ref ? "-" : cell(r.inter).c_str());
    out += buf;
  }
  return out;
}

}  // namespace adlsim
