#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>
#include <tuple>

#include <sys/wait.h>
#include <unistd.h>

#include "adlsim/pipeline.hpp"

namespace fs = std::filesystem;
using namespace adlsim;

namespace {

const char* const kBundleFiles[] = {"manifest.json", "activities.csv", "trajectories.csv",
                                    "labels.csv",    "mmse.csv",       "sensors.csv"};

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("adlsim_pipeline_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) { return text::read_file(p.string()); }

// Every anomaly about once a day, from month zero.
constexpr std::string_view kBusyProfile = R"([wandering]
frequency_slope = 0
frequency_intercept = 30
[forgetting]
frequency_slope = 0
frequency_intercept = 30
[fall_while_walking]
frequency_slope = 0
frequency_intercept = 30
[fall_while_standing]
frequency_slope = 0
frequency_intercept = 30
)";

RunConfig busy(int days, std::uint64_t seed) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.days = days;
  cfg.profile_text = std::string(kBusyProfile);
  cfg.profile_source = "test:busy";
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ADLSIM_CLI) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Bundle, SameSeedGivesIdenticalBytes) {
  const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  run_simulation(busy(3, 5), a);
  run_simulation(busy(3, 5), b);
  run_simulation(busy(3, 6), c);
  for (const char* f : kBundleFiles) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_NE(slurp(a / "activities.csv"), slurp(c / "activities.csv"));
  EXPECT_FALSE(fs::exists(a.parent_path() / ".det_a.partial"));
}

TEST(Bundle, ManifestReplaysTheRun) {
  const auto a = scratch("replay_a"), b = scratch("replay_b");
  run_simulation(busy(2, 17), a);
  const auto cfg = config_from_manifest(slurp(a / "manifest.json"));
  EXPECT_EQ(cfg.profile_text, kBusyProfile);
  run_simulation(cfg, b);
  for (const char* f : kBundleFiles) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_THROW(config_from_manifest("{\"seed\": 1}"), ConfigError);
}

TEST(Bundle, QuietProfileHasNoLabels) {
  RunConfig cfg;
  cfg.days = 40;
  cfg.profile_text = std::string(kQuietProfile);
  const auto r = simulate(cfg);
  EXPECT_TRUE(r.realization.labels.empty());
  for (const auto& tr : r.realization.trajectories) {
    EXPECT_EQ(tr.purpose, TrajectoryPurpose::Normal);
    EXPECT_TRUE(tr.label_ids.empty());
  }
}

TEST(Bundle, SensorLogCoversTheHorizonAtTenHertz) {
  const auto a = scratch("frames");
  const auto sum = run_simulation(busy(1, 3), a);
  const auto log = read_sensor_log(slurp(a / "sensors.csv"));
  EXPECT_EQ(log.n_samples, 864000);
  EXPECT_EQ(static_cast<std::int64_t>(log.frames.size()), sum.sensor_changes);
  EXPECT_EQ(decompress(log).size(), 864000u);
  const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(m["counts"]["sensor_samples"].get<std::int64_t>(), 864000);
}

TEST(Bundle, PublishRefusesForeignDirectories) {
  const auto dst = scratch("foreign");
  fs::create_directories(dst);
  { std::ofstream(dst / "keep.txt") << "mine"; }
  EXPECT_THROW(run_simulation(busy(1, 1), dst), ConfigError);
  EXPECT_EQ(slurp(dst / "keep.txt"), "mine");
  EXPECT_FALSE(fs::exists(dst.parent_path() / ".foreign.partial"));
  // An earlier bundle is replaced.
  const auto prev = scratch("previous");
  run_simulation(busy(1, 1), prev);
  { std::ofstream(prev / "stale.txt") << "x"; }
  run_simulation(busy(1, 2), prev);
  EXPECT_FALSE(fs::exists(prev / "stale.txt"));
}

TEST(Plotdata, OneDayRunGivesOnePartialWeek) {
  const auto a = scratch("plot_bundle"), out = scratch("plot_out");
  run_simulation(busy(1, 9), a);
  export_plotdata(a, out);
  const auto weekly = read_csv_rows(slurp(out / "weekly_activity.csv"),
                                    "week,days,go_out_per_day,nap_minutes_per_day,sleep_minutes_per_day,"
                                    "housebound_days,semi_bedridden_days");
  ASSERT_EQ(weekly.size(), 1u);
  EXPECT_EQ(weekly[0][1], "1");
  const auto monthly = text::split(text::trim(slurp(out / "monthly_anomalies.csv")), '\n');
  EXPECT_EQ(monthly.size(), 2u);
  EXPECT_TRUE(fs::exists(out / "transition_traces.csv"));
  fs::remove(a / "sensors.csv");
  EXPECT_THROW(export_plotdata(a, out), ConfigError);
}

TEST(Metrics, CandidateEqualToReference) {
  SchedulerConfig sc;
  sc.rng_seed = 4;
  const auto cat = bundled_catalog("elderly");
  const auto ref = schedule_days(cat, sc, 6).sequence;
  MetricsConfig mc;
  mc.trials = 2;
  const auto rows = run_metrics(ref, &cat, {{"self", ref}}, mc);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0].name, "reference");
  EXPECT_EQ(rows[1].name, "self");
  EXPECT_EQ(rows[1].intra.mean, 0);
  EXPECT_NEAR(rows[1].rho_cross.mean, 5.0 / 6.0 * rows[0].rho_self.mean, 1e-9);
  EXPECT_EQ(rows[2].name, "proposed");
  EXPECT_EQ(rows[2].trials, 2);

  auto alien = ref;
  alien.items[0].name = "juggle";
  EXPECT_THROW(run_metrics(ref, &cat, {{"alien", alien}}, mc), ConfigError);
  EXPECT_NE(metrics_table(rows).find("RanS"), std::string::npos);
}

// Properties of a realized timeline with frequent anomalies.
class Realized : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { run_ = new SimulationResult(simulate(busy(21, 11))); }
  static void TearDownTestSuite() { delete run_; }
  static const Realization& real() { return run_->realization; }
  static SimulationResult* run_;
};
SimulationResult* Realized::run_ = nullptr;

TEST_F(Realized, ActivitiesTileTheHorizon) {
  const auto& acts = real().activities;
  EXPECT_TRUE(validate_sequence(acts).empty());
  EXPECT_EQ(acts.items.front().start, SimTime());
  EXPECT_EQ(acts.items.back().end(), SimTime::days(21));
}

TEST_F(Realized, LabelsAreNumberedChronologically) {
  const auto& labels = real().labels;
  std::set<AnomalyKind> kinds;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    EXPECT_EQ(labels[i].id, i + 1);
    EXPECT_LE(labels[i].start, labels[i].end);
    if (i) {
      EXPECT_LE(labels[i - 1].start, labels[i].start);
    }
    kinds.insert(labels[i].kind);
  }
  for (auto k : {AnomalyKind::Wandering, AnomalyKind::Forgetting, AnomalyKind::FallWhileWalking,
                 AnomalyKind::FallWhileStanding})
    EXPECT_TRUE(kinds.count(k)) << to_string(k);
}

TEST_F(Realized, CsvRoundTrip) {
  std::ostringstream l, a;
  write_labels(l, real().labels);
  write_activities(a, real().activities);
  EXPECT_EQ(read_labels(l.str()), real().labels);
  const auto back = read_activities(a.str());
  ASSERT_EQ(back.items.size(), real().activities.items.size());
  EXPECT_EQ(back.day_count, 21);
  for (std::size_t i = 0; i < back.items.size(); ++i) {
    const auto& x = back.items[i];
    const auto& y = real().activities.items[i];
    EXPECT_EQ(std::tie(x.id, x.name, x.start, x.duration, x.location), std::tie(y.id, y.name, y.start, y.duration, y.location));
  }
}

TEST_F(Realized, NormalWalksArriveOnTime) {
  const auto& items = real().activities.items;
  int checked = 0;
  for (const auto& tr : real().trajectories) {
    ASSERT_GT(tr.transition, 0);
    const auto k = static_cast<std::size_t>(tr.transition);
    if (k >= items.size()) continue;
    EXPECT_EQ(tr.end(), items[k].start);
    EXPECT_EQ(tr.points.back().location, items[k].location);
    // A wandering walk is the previous activity; a normal one leaves at least
    // epsilon of it.
    if (tr.purpose == TrajectoryPurpose::Wandering)
      EXPECT_EQ(tr.start(), items[k - 1].start);
    else
      EXPECT_GE(tr.start(), items[k - 1].start + SimTime::seconds(30)) << k;
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

// Each fall label matches exactly one stationary hold on its walk, and holds
// are the only points where a walk stands still.
TEST_F(Realized, FallLabelsMatchHolds) {
  std::map<std::uint64_t, const AnomalyLabel*> by_id;
  for (const auto& l : real().labels) by_id[l.id] = &l;
  int falls = 0;
  for (const auto& tr : real().trajectories) {
    std::set<std::pair<SimTime, SimTime>> holds;
    for (std::size_t i = 0; i + 1 < tr.points.size(); ++i) {
      const auto& p = tr.points[i];
      const auto& q = tr.points[i + 1];
      if (p.hold) {
        EXPECT_EQ(p.location, q.location);
        EXPECT_EQ(q.t - p.t, SimTime::seconds(30));
        holds.insert({p.t, q.t});
      } else if (p.location == q.location) {
        ADD_FAILURE() << "stationary step without a hold at " << format_time(p.t);
      }
    }
    std::size_t fall_labels = 0;
    for (auto id : tr.label_ids) {
      const auto* l = by_id.at(id);
      if (l->kind == AnomalyKind::Wandering) {
        EXPECT_EQ(l->end, tr.end());
        EXPECT_EQ(tr.purpose, TrajectoryPurpose::Wandering);
        continue;
      }
      ASSERT_TRUE(l->kind == AnomalyKind::FallWhileWalking || l->kind == AnomalyKind::FallWhileStanding);
      ++fall_labels;
      ++falls;
      EXPECT_TRUE(holds.count({l->start, l->end})) << "label " << id;
      const GridLocation at{std::stoi(l->metadata.at("x")), std::stoi(l->metadata.at("y"))};
      bool found = false;
      for (const auto& p : tr.points) found |= p.hold && p.t == l->start && p.location == at;
      EXPECT_TRUE(found) << "label " << id;
    }
    EXPECT_EQ(fall_labels, holds.size());
  }
  EXPECT_GT(falls, 20);
}

// Every sampled power reading that is on is explained by an activity using
// the appliance or by a forgetting label for it.
TEST_F(Realized, PowerReadingsAreExplained) {
  const auto& r = *run_;
  const Catalog lookup = lookup_catalog(r.catalog);
  std::map<std::string, std::vector<std::pair<SimTime, SimTime>>> why;
  for (const auto& a : real().activities.items)
    if (const auto* p = lookup.find(a.name))
      for (const auto& ap : p->appliances) why[ap].push_back({a.start, a.end()});
  for (const auto& l : real().labels)
    if (l.kind == AnomalyKind::Forgetting) why[l.metadata.at("appliance")].push_back({l.start, l.end});
  for (auto& [ap, v] : why) v = merge_intervals(std::move(v));
  auto explained = [&](const std::string& ap, SimTime t) {
    for (const auto& [s, e] : why[ap])
      if (s <= t && t < e) return true;
    return false;
  };

  const auto tl = make_timeline(real().activities, real());
  const auto log = simulate_sensors(r.layout.sensors, tl);
  std::int64_t on_samples = 0;
  for (std::size_t b = 0; b < r.layout.sensors.size(); ++b) {
    const auto& s = r.layout.sensors[b];
    if (s.kind != SensorKind::COST) continue;
    for (std::size_t k = 0; k < log.frames.size(); ++k) {
      if (!log.frames[k].bits.get(b)) continue;
      const std::int64_t lo = log.frames[k].index;
      const std::int64_t hi = k + 1 < log.frames.size() ? log.frames[k + 1].index : log.n_samples;
      for (std::int64_t t = lo - lo % 10; t < hi; t += 10, ++on_samples)
        ASSERT_TRUE(explained(s.appliance, SimTime(t))) << s.appliance << " at " << format_time(SimTime(t));
    }
  }
  EXPECT_GT(on_samples, 0);
}

// The editable copies under data/ stay in step with the built-in documents.
TEST(DataFiles, MatchBuiltIns) {
  const fs::path data = fs::path(ADLSIM_TEST_DATA) / ".." / ".." / "data";
  for (const char* name : {"elderly", "kasteren", "aruba"})
    EXPECT_EQ(parse_catalog(slurp(data / "catalogs" / (std::string(name) + ".csv"))), bundled_catalog(name)) << name;
  EXPECT_EQ(parse_profile(slurp(data / "profiles" / "default.ini")), default_profile());
  EXPECT_EQ(parse_profile(slurp(data / "profiles" / "quiet.ini")), quiet_profile());
  const auto a = load_plan(slurp(data / "layouts" / "studio.layout")), b = load_plan(kStudioLayout);
  EXPECT_EQ(a.sensors, b.sensors);
  EXPECT_EQ(a.zones.all(), b.zones.all());
  EXPECT_EQ(a.plan.furniture, b.plan.furniture);
  EXPECT_EQ(a.plan.walls, b.plan.walls);
  for (const char* name : {"kasteren", "aruba"}) {
    const auto t = parse_tier_config(slurp(data / "tiers" / (std::string(name) + ".ini"))), u = tier_preset(name);
    EXPECT_EQ(t.tiers, u.tiers) << name;
    EXPECT_EQ(t.shrink, u.shrink) << name;
  }
}

TEST(Cli, ExitCodes) {
  const auto out = scratch("cli");
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("simulate --days 1 --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  EXPECT_EQ(run_cli("plotdata " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "plotdata" / "weekly_activity.csv"));
  EXPECT_EQ(run_cli("simulate --manifest " + (out / "manifest.json").string() + " --no-sensors --out " +
                    (out.string() + "_again")),
            0);
  EXPECT_EQ(slurp(out / "activities.csv"), slurp(out.string() + "_again/activities.csv"));

  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("simulate --days -3"), 1);
  EXPECT_EQ(run_cli("simulate --bogus"), 1);
  EXPECT_EQ(run_cli("simulate --days 1 --catalog bundled:nope --out " + out.string()), 2);
  EXPECT_EQ(run_cli("simulate --days 1 --catalog /nonexistent/catalog.csv --out " + out.string()), 2);
  EXPECT_EQ(run_cli("fit " + std::string(ADLSIM_TEST_DATA) + "/kasteren_3day.txt --tiers nope.cfg --out " +
                    (out / "fit.csv").string()),
            2);

  // A regular file where a directory is needed.
  const auto blocker = scratch("blocker");
  fs::create_directories(blocker.parent_path());
  { std::ofstream(blocker) << "x"; }
  EXPECT_EQ(run_cli("simulate --days 1 --out " + (blocker / "sub").string()), 3);
}

TEST(Cli, FitWritesACatalog) {
  const auto out = scratch("fit");
  fs::create_directories(out);
  const std::string data = ADLSIM_TEST_DATA;
  // Three days leave some fundamentals with a single sample.
  EXPECT_EQ(run_cli("fit " + data + "/kasteren_3day.txt --start 2008-02-26 --days 3 --out " + (out / "c.csv").string()),
            2);
  EXPECT_EQ(run_cli("fit " + data + "/kasteren_fit_3day.tsv --format events --out " + (out / "c.csv").string() +
                    " --cleaned " + (out / "clean.tsv").string()),
            0);
  const auto c = parse_catalog(slurp(out / "c.csv"));
  EXPECT_TRUE(c.find("go to bed"));
  EXPECT_FALSE(parse_events(slurp(out / "clean.tsv")).empty());
}

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  const int rc = RUN_ALL_TESTS();
  std::error_code ec;
  fs::remove_all(fs::temp_directory_path() / ("adlsim_pipeline_test_" + std::to_string(::getpid())), ec);
  return rc;
}
