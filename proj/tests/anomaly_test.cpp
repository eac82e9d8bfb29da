#include <gtest/gtest.h>

#include <map>

#include "adlsim/anomaly.hpp"
#include "adlsim/floor_plan.hpp"

using namespace adlsim;

namespace {

AnomalyProfile fixed_mmse(double m) {
  auto p = default_profile();
  p.mmse_initial = m;
  p.mmse_drift = 0;
  p.mmse_noise_sd = 0;
  return p;
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * 3.14159265358979323846); }
double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

int count_kind(const AnomalyCalendar& c, AnomalyKind k) {
  int n = 0;
  for (const auto& e : c.events) n += e.kind == k;
  return n;
}

}  // namespace

TEST(Mmse, NoiselessRampIsExact) {
  MmseProcess p(29.0, 9.5 / 108.0, 0.0);
  auto rng = make_rng(1, "mmse");
  p.run(rng, 109);
  EXPECT_EQ(p.series()[108], 19.5);
  for (std::size_t m = 0; m < 109; ++m) EXPECT_DOUBLE_EQ(p.series()[m], 29.0 - 9.5 / 108.0 * static_cast<double>(m));
}

TEST(Mmse, ZeroDriftZeroNoiseIsConstant) {
  MmseProcess p(24.0, 0.0, 0.0);
  auto rng = make_rng(1, "mmse");
  p.run(rng, 50);
  for (double v : p.series()) EXPECT_EQ(v, 24.0);
}

TEST(Mmse, ClampedToScoreRange) {
  MmseProcess p(1.0, 0.5, 3.0);
  auto rng = make_rng(2, "mmse");
  p.run(rng, 500);
  for (double v : p.series()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 30.0);
  }
  EXPECT_THROW(MmseProcess(31.0, 0.1, 0.0), ConfigError);
  EXPECT_THROW(MmseProcess(20.0, 0.1, -1.0), ConfigError);
}

// One noisy step from 29: the clamp at 30 cuts the upper tail, so the oracle
// is the mean of min(X, 30) with X ~ N(29 - c, 1).
TEST(Mmse, OneStepMeanFromTwentyNine) {
  const double c = 9.5 / 108.0, mu = 29.0 - c;
  const double z = (30.0 - mu) / 1.0;
  const double expect = mu - (normal_pdf(z) - z * normal_sf(z));
  auto rng = make_rng(3, "mmse");
  const int n = 10000;
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    MmseProcess p(29.0, c, 1.0);
    sum += p.step(rng);
  }
  EXPECT_NEAR(sum / n, expect, 4.0 / 100.0);
}

TEST(Mmse, OneStepMeanAwayFromBounds) {
  const double c = 9.5 / 108.0;
  auto rng = make_rng(4, "mmse");
  const int n = 10000;
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    MmseProcess p(20.0, c, 1.0);
    sum += p.step(rng);
  }
  EXPECT_NEAR(sum / n, 20.0 - c, 4.0 / 100.0);
}

// The noise accumulates: at month m the spread is sd * sqrt(m).
TEST(Mmse, EnsembleMeanTracksRampBeforeClamping) {
  const double c = 0.2, sd = 0.5;
  const int trials = 2000, months = 12;
  auto rng = make_rng(5, "mmse");
  double sum = 0;
  for (int t = 0; t < trials; ++t) {
    MmseProcess p(15.0, c, sd);
    p.run(rng, months + 1);
    sum += p.series()[months];
  }
  EXPECT_NEAR(sum / trials, 15.0 - c * months, 4 * sd * std::sqrt(months) / std::sqrt(trials));
}

TEST(Rates, AffineLawsAtReferenceScores) {
  const auto p = default_profile();
  // Independent evaluation of the laws.
  auto wf = [](double m) { return std::max(0.0, -1.86 * m + 56); };
  auto wd = [](double m) { return std::max(0.0, -0.31 * m + 9.8); };
  auto ff = [](double m) { return std::max(0.0, -m + 30); };
  auto fa = [](double m) { return std::max(0.0, -m / 15 + 2); };
  for (double m : {29.0, 19.5, 24.0, 0.0}) {
    const auto r = anomaly_rates(p, m);
    EXPECT_NEAR(r[static_cast<int>(AnomalyKind::Wandering)].frequency, wf(m), 1e-12);
    EXPECT_NEAR(r[static_cast<int>(AnomalyKind::Wandering)].duration, wd(m), 1e-12);
    EXPECT_NEAR(r[static_cast<int>(AnomalyKind::Forgetting)].frequency, ff(m), 1e-12);
    EXPECT_NEAR(r[static_cast<int>(AnomalyKind::FallWhileWalking)].frequency, fa(m), 1e-12);
    EXPECT_NEAR(r[static_cast<int>(AnomalyKind::FallWhileStanding)].frequency, fa(m), 1e-12);
    EXPECT_DOUBLE_EQ(r[static_cast<int>(AnomalyKind::FallWhileWalking)].duration, 30);
    EXPECT_DOUBLE_EQ(r[static_cast<int>(AnomalyKind::Housebound)].frequency, 0.1);
    EXPECT_DOUBLE_EQ(r[static_cast<int>(AnomalyKind::Housebound)].duration, 14);
    EXPECT_DOUBLE_EQ(r[static_cast<int>(AnomalyKind::SemiBedridden)].frequency, 0.05);
    EXPECT_DOUBLE_EQ(r[static_cast<int>(AnomalyKind::SemiBedridden)].duration, 30);
  }
  const auto r29 = anomaly_rates(p, 29);
  EXPECT_NEAR(r29[static_cast<int>(AnomalyKind::Wandering)].frequency, 2.06, 1e-9);
  EXPECT_NEAR(r29[static_cast<int>(AnomalyKind::Wandering)].duration, 0.81, 1e-9);
  EXPECT_NEAR(r29[static_cast<int>(AnomalyKind::FallWhileWalking)].frequency, 0.0667, 1e-4);
  const auto r195 = anomaly_rates(p, 19.5);
  EXPECT_NEAR(r195[static_cast<int>(AnomalyKind::Wandering)].frequency, 19.73, 1e-9);
  EXPECT_NEAR(r195[static_cast<int>(AnomalyKind::Forgetting)].frequency, 10.5, 1e-9);
  EXPECT_NEAR(r195[static_cast<int>(AnomalyKind::FallWhileStanding)].frequency, 0.7, 1e-12);
  // Root of -M/15 + 2 is exact.
  EXPECT_EQ(anomaly_rates(p, 30)[static_cast<int>(AnomalyKind::FallWhileWalking)].frequency, 0.0);
  EXPECT_THROW(anomaly_rates(p, 30.5), Error);
  EXPECT_THROW(anomaly_rates(p, -0.1), Error);
}

TEST(Rates, DisabledAnomalyHasZeroRate) {
  const auto q = quiet_profile();
  for (const auto& r : anomaly_rates(q, 22)) {
    EXPECT_EQ(r.frequency, 0.0);
    EXPECT_EQ(r.duration, 0.0);
  }
}

TEST(Profile, ParsesOverlaysAndRejectsJunk) {
  const auto p = parse_profile("[mmse]\nnoise_sd = 0\n[forgetting]\nfrequency_slope = -2\nfrequency_intercept = 40\n");
  EXPECT_EQ(p.mmse_noise_sd, 0.0);
  EXPECT_DOUBLE_EQ(p.law(AnomalyKind::Forgetting).frequency(10), 20);
  EXPECT_EQ(p.law(AnomalyKind::Wandering), default_profile().law(AnomalyKind::Wandering));
  EXPECT_THROW(parse_profile("[forgetting]\nfrequency = 3\n"), ConfigError);
  EXPECT_THROW(parse_profile("[dancing]\nenabled = true\n"), ConfigError);
  EXPECT_THROW(parse_profile("[wandering]\nalways = true\n"), ConfigError);
  EXPECT_THROW(parse_profile("[mmse]\ninitial = 40\n"), ConfigError);
}

TEST(Calendar, MonthMapping) {
  EXPECT_EQ(month_of_day(0), 0);
  EXPECT_EQ(month_of_day(364), 11);
  EXPECT_EQ(month_of_day(365), 12);
  for (std::int64_t m = 0; m < 120; ++m) {
    EXPECT_EQ(month_of_day(first_day_of_month(m)), m);
    if (m > 0) {
      EXPECT_EQ(month_of_day(first_day_of_month(m) - 1), m - 1);
    }
  }
  EXPECT_EQ(months_for_days(1), 1);
  EXPECT_EQ(months_for_days(365 * 9), 108);
}

TEST(Calendar, AllZeroFrequenciesGiveEmptyCalendar) {
  auto p = default_profile();
  for (auto& l : p.laws) l.frequency = AffineLaw{};
  const auto c = build_calendar(p, 400, 1);
  EXPECT_TRUE(c.empty());
  EXPECT_EQ(c.mmse.size(), 14u);
}

TEST(Calendar, FixedScoreWanderingRate) {
  const int days = first_day_of_month(120);
  const auto c = build_calendar(fixed_mmse(24), days, 77);
  const double f = -1.86 * 24 + 56;
  EXPECT_NEAR(c.wandering.size() / 120.0, f, 4 * std::sqrt(f / 120));
  // Durations: N(D, D/5) minutes with D = -0.31 M + 9.8.
  const double d = -0.31 * 24 + 9.8;
  double sum = 0;
  for (const auto& w : c.wandering) sum += w.duration.to_minutes();
  EXPECT_NEAR(sum / static_cast<double>(c.wandering.size()), d, 4 * (d / 5) / std::sqrt(c.wandering.size()));
}

TEST(Calendar, NineYearTrendRises) {
  const auto c = build_calendar(default_profile(), 365 * 9, 2022);
  std::array<int, 9> wander{}, forget{};
  for (const auto& w : c.wandering) wander[static_cast<std::size_t>(w.day / 365)]++;
  for (const auto& e : c.events)
    if (e.kind == AnomalyKind::Forgetting) forget[static_cast<std::size_t>(e.day / 365)]++;
  EXPECT_LT(wander[0], wander[4]);
  EXPECT_LT(wander[4], wander[8]);
  EXPECT_LT(forget[0], forget[4]);
  EXPECT_LT(forget[4], forget[8]);
}

TEST(Calendar, AnomalyStreamsAreIndependent) {
  auto p = default_profile();
  const auto a = build_calendar(p, 500, 9);
  p.law(AnomalyKind::Forgetting).enabled = false;
  p.law(AnomalyKind::Housebound).enabled = false;
  const auto b = build_calendar(p, 500, 9);
  EXPECT_EQ(a.wandering, b.wandering);
  EXPECT_EQ(count_kind(b, AnomalyKind::Forgetting), 0);
  EXPECT_EQ(count_kind(a, AnomalyKind::FallWhileWalking), count_kind(b, AnomalyKind::FallWhileWalking));
  for (const auto& s : b.states) EXPECT_EQ(s.kind, AnomalyKind::SemiBedridden);
  std::vector<StateInterval> sa;
  for (const auto& s : a.states)
    if (s.kind == AnomalyKind::SemiBedridden) sa.push_back(s);
  EXPECT_EQ(sa, b.states);
}

TEST(Calendar, StateIntervalsMergedAndClipped) {
  auto p = default_profile();
  p.law(AnomalyKind::Housebound).frequency.intercept = 3;  // frequent, so onsets collide
  const auto c = build_calendar(p, 2000, 4);
  for (std::size_t i = 0; i < c.states.size(); ++i) {
    EXPECT_LT(c.states[i].first_day, c.states[i].end_day);
    EXPECT_LE(c.states[i].end_day, 2000);
    for (std::size_t j = i + 1; j < c.states.size(); ++j)
      if (c.states[i].kind == c.states[j].kind) {
        EXPECT_GT(c.states[j].first_day, c.states[i].end_day);
      }
  }
}

// Renewal oracle: fraction of housebound days ~ rate * mean duration, with a
// standard error from the compound-Poisson variance of covered days.
TEST(Calendar, HouseboundCoverageOverACentury) {
  auto p = quiet_profile();
  p.law(AnomalyKind::Housebound) = default_profile().law(AnomalyKind::Housebound);
  const std::int64_t days = 365 * 100;
  const auto c = build_calendar(p, days, 31);
  std::int64_t covered = 0;
  for (const auto& s : c.states) covered += s.end_day - s.first_day;
  const double lambda = 0.1 / (365.0 / 12.0), d = 14.0;
  const double expect = lambda * d;
  const double se = std::sqrt(lambda * days * (d * d + (d / 5) * (d / 5))) / days;
  EXPECT_NEAR(covered / static_cast<double>(days), expect, 4 * se);
}

TEST(Calendar, AlwaysCoversTheRun) {
  auto p = quiet_profile();
  p.law(AnomalyKind::Housebound).enabled = true;
  p.law(AnomalyKind::Housebound).always = true;
  const auto c = build_calendar(p, 140, 1);
  ASSERT_EQ(c.states.size(), 1u);
  EXPECT_EQ(c.states[0], (StateInterval{AnomalyKind::Housebound, 0, 140}));
  for (int d = 0; d < 140; ++d) EXPECT_TRUE(c.active(AnomalyKind::Housebound, d));
}

TEST(Overrides, NoActiveStateIsEmpty) {
  AnomalyCalendar cal;
  cal.days = 10;
  EXPECT_TRUE(apply_state_overrides(cal, 3, bundled_catalog("elderly")).empty());
}

TEST(Overrides, HouseboundOnly) {
  AnomalyCalendar cal;
  cal.days = 10;
  cal.states.push_back({AnomalyKind::Housebound, 2, 5});
  const auto base = bundled_catalog("elderly");
  const auto d = apply_state_overrides(cal, 3, base);
  ASSERT_EQ(d.upserts.size(), 2u);
  std::map<std::string, ActivityParams> by;
  for (const auto& u : d.upserts) by[u.name] = u;
  EXPECT_EQ(by.at("go out").tier, Tier::Necessary);
  EXPECT_DOUBLE_EQ(by.at("go out").rate, 1.0 / 14);
  EXPECT_DOUBLE_EQ(by.at("go out").duration_mean, 20);
  EXPECT_DOUBLE_EQ(by.at("go out").duration_sd, 4);
  EXPECT_EQ(by.at("use the phone").tier, Tier::Necessary);
  EXPECT_DOUBLE_EQ(by.at("use the phone").rate, 1.0 / 3);
  EXPECT_DOUBLE_EQ(by.at("use the phone").duration_mean, 10);
  EXPECT_DOUBLE_EQ(by.at("use the phone").duration_sd, 2);
  EXPECT_TRUE(d.forced.empty());
  EXPECT_TRUE(apply_state_overrides(cal, 5, base).empty());
}

TEST(Overrides, OverlapUsesSemiBedriddenOuting) {
  AnomalyCalendar cal;
  cal.days = 10;
  cal.states.push_back({AnomalyKind::Housebound, 0, 10});
  cal.states.push_back({AnomalyKind::SemiBedridden, 0, 10});
  const auto base = bundled_catalog("elderly");
  const auto d = apply_state_overrides(cal, 1, base);
  std::map<std::string, ActivityParams> by;
  for (const auto& u : d.upserts) by[u.name] = u;
  EXPECT_DOUBLE_EQ(by.at("go out").rate, 1.0 / 7);
  EXPECT_DOUBLE_EQ(by.at("rest").duration_mean, 60);
  EXPECT_DOUBLE_EQ(by.at("rest").duration_sd, 10);
  EXPECT_EQ(by.at("nap").tier, Tier::Random);
  EXPECT_DOUBLE_EQ(by.at("nap").duration_mean, 40);
  EXPECT_EQ(by.at("nap").place, "Bed");
  EXPECT_DOUBLE_EQ(by.at("use the phone").rate, 1.0 / 3);
  // The resulting catalog schedules.
  EXPECT_NO_THROW(apply(base, d).validate());
}

TEST(Overrides, WanderingBecomesForcedInstances) {
  AnomalyCalendar cal;
  cal.days = 3;
  cal.wandering = {{1, SimTime::minutes(2)}, {1, SimTime::seconds(40)}, {2, SimTime::minutes(1)}};
  const auto d = apply_state_overrides(cal, 1, bundled_catalog("elderly"));
  ASSERT_EQ(d.forced.size(), 2u);
  EXPECT_EQ(d.forced[0].duration, SimTime::minutes(2));
  ASSERT_EQ(d.upserts.size(), 1u);
  EXPECT_EQ(d.upserts[0].name, "wandering");
  EXPECT_EQ(d.upserts[0].place, "Walking");
}

namespace {

ActivitySequence seq_of(std::vector<std::pair<std::string, double>> acts) {
  ActivitySequence s;
  s.day_count = 1;
  double t = 0;
  for (auto& [n, m] : acts) {
    s.items.push_back({s.items.size(), n, Tier::Random, SimTime::minutes(t), SimTime::minutes(m), {}});
    t += m;
  }
  return s;
}

}  // namespace

TEST(Forgetting, TvStaysOnUntilNextSofaVisit) {
  const auto cat = lookup_catalog(bundled_catalog("elderly"));
  const auto s = seq_of({{"read a book", 300}, {"watch TV", 40}, {"clean", 30}, {"take a snack", 10}, {"rest", 60},
                         {"read a book", 1000}});
  auto rng = make_rng(1, "f");
  const auto plan = plan_forgetting(0, s, cat, rng);
  ASSERT_TRUE(plan);
  EXPECT_EQ(plan->appliance, "tv");
  // Next-visit scan: first later activity whose place is the sofa.
  SimTime expect_end = s.horizon();
  for (std::size_t j = 2; j < s.items.size(); ++j)
    if (cat.at(s.items[j].name).place == "Sofa") {
      expect_end = s.items[j].start;
      break;
    }
  EXPECT_EQ(plan->start, SimTime::minutes(340));
  EXPECT_EQ(plan->end, expect_end);
  EXPECT_EQ(plan->end, SimTime::minutes(380));
}

TEST(Forgetting, CookingLeavesExactlyOneOfItsAppliances) {
  const auto cat = lookup_catalog(bundled_catalog("elderly"));
  const auto s = seq_of({{"read a book", 300}, {"cooking", 30}, {"rest", 1110}});
  std::map<std::string, int> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto rng = make_rng(seed, "f");
    const auto plan = plan_forgetting(0, s, cat, rng);
    ASSERT_TRUE(plan);
    seen[plan->appliance]++;
    EXPECT_EQ(plan->end, s.horizon());  // never back in the kitchen
  }
  EXPECT_EQ(seen.size(), 2u);
  EXPECT_GT(seen["stove"], 0);
  EXPECT_GT(seen["kitchen_faucet"], 0);
}

TEST(Forgetting, NoApplianceUseDropsTheEvent) {
  const auto cat = lookup_catalog(bundled_catalog("elderly"));
  const auto s = seq_of({{"read a book", 700}, {"rest", 740}});
  auto rng = make_rng(1, "f");
  std::string note;
  EXPECT_FALSE(plan_forgetting(0, s, cat, rng, &note));
  EXPECT_NE(note.find("no appliance"), std::string::npos);
}

TEST(Forgetting, NextActivityAtSamePlaceDropsTheEvent) {
  const auto cat = lookup_catalog(bundled_catalog("elderly"));
  const auto s = seq_of({{"read a book", 300}, {"watch TV", 40}, {"rest", 1100}});
  auto rng = make_rng(1, "f");
  std::string note;
  EXPECT_FALSE(plan_forgetting(0, s, cat, rng, &note));
  EXPECT_NE(note.find("same place"), std::string::npos);
}
