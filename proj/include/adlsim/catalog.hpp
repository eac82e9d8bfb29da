#pragma once

// Activity parameter catalog: per-activity tier, timing laws, place and
// appliances, plus the CSV file format shared by the simulator and the fitter.

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "adlsim/core.hpp"
#include "adlsim/text.hpp"

namespace adlsim {

// Rest during the day; state anomalies and the Aruba cleanup both produce it.
inline constexpr std::string_view kNapActivity = "nap";

/// Timing law of one activity. All times are minutes.
///
/// Fundamental activities use the start and duration laws, Necessary ones the
/// daily rate and duration law, Random ones the duration law and `prob`.
struct ActivityParams {
  std::string name;
  Tier tier = Tier::Random;
  double start_mean = 0.0;
  double start_sd = 0.0;
  double rate = 0.0;
  double duration_mean = 0.0;
  double duration_sd = 0.0;
  double prob = 0.0;
  std::string place;
  std::vector<std::string> appliances;

  bool operator==(const ActivityParams&) const = default;
};

class Catalog {
public:
  Catalog() = default;
  explicit Catalog(std::vector<ActivityParams> activities) : activities_(std::move(activities)) { validate(); }

  const std::vector<ActivityParams>& activities() const { return activities_; }

  const ActivityParams* find(std::string_view name) const {
    for (const auto& a : activities_)
      if (a.name == name) return &a;
    return nullptr;
  }

  const ActivityParams& at(std::string_view name) const {
    if (const auto* a = find(name)) return *a;
    throw ConfigError("catalog", "unknown activity '" + std::string(name) + "'");
  }

  /// Fundamentals in chronological order of their mean start.
  std::vector<const ActivityParams*> fundamentals() const {
    auto v = of_tier(Tier::Fundamental);
    std::stable_sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->start_mean < b->start_mean; });
    return v;
  }

  std::vector<const ActivityParams*> of_tier(Tier t) const {
    std::vector<const ActivityParams*> v;
    for (const auto& a : activities_)
      if (a.tier == t) v.push_back(&a);
    return v;
  }

  /// Random-tier selection probabilities, normalized to sum to one.
  std::vector<double> random_probabilities() const {
    std::vector<double> p;
    double sum = 0.0;
    for (const auto& a : activities_)
      if (a.tier == Tier::Random) {
        p.push_back(a.prob);
        sum += a.prob;
      }
    for (auto& x : p) x /= sum;
    return p;
  }

  /// Replaces the entry with the same name, or appends a new one.
  void upsert(ActivityParams p) {
    for (auto& a : activities_)
      if (a.name == p.name) {
        a = std::move(p);
        validate();
        return;
      }
    activities_.push_back(std::move(p));
    validate();
  }

  void validate() const {
    std::set<std::string> names;
    double random_mass = 0.0;
    int randoms = 0;
    for (const auto& a : activities_) {
      const std::string where = "activity '" + a.name + "': ";
      if (a.name.empty()) throw ConfigError("catalog", "empty activity name");
      if (!names.insert(a.name).second) throw ConfigError("catalog", where + "duplicate name");
      if (!(a.duration_mean > 0.0) || a.duration_sd < 0.0)
        throw ConfigError("catalog", where + "duration law needs mean > 0 and sd >= 0");
      switch (a.tier) {
        case Tier::Fundamental:
          if (a.start_sd < 0.0 || a.start_mean < 0.0 || a.start_mean >= 1440.0)
            throw ConfigError("catalog", where + "start law must lie within the day");
          break;
        case Tier::Necessary:
          if (a.rate < 0.0) throw ConfigError("catalog", where + "negative daily rate");
          break;
        case Tier::Random:
          if (a.prob < 0.0) throw ConfigError("catalog", where + "negative probability");
          random_mass += a.prob;
          ++randoms;
          break;
      }
    }
    if (randoms > 0 && !(random_mass > 0.0))
      throw ConfigError("catalog", "random-tier probabilities sum to zero");
  }

  bool operator==(const Catalog&) const = default;

private:
  std::vector<ActivityParams> activities_;
};

/// An instance the scheduler must place on a given day with a fixed duration.
struct ForcedInstance {
  std::string name;
  SimTime duration;
  bool operator==(const ForcedInstance&) const = default;
};

/// Per-day modification of the catalog.
struct CatalogDelta {
  std::vector<ActivityParams> upserts;
  std::vector<ForcedInstance> forced;

  bool empty() const { return upserts.empty() && forced.empty(); }
  bool operator==(const CatalogDelta&) const = default;
};

inline Catalog apply(Catalog base, const CatalogDelta& delta) {
  for (const auto& p : delta.upserts) base.upsert(p);
  for (const auto& f : delta.forced) (void)base.at(f.name);
  return base;
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCatalogHeader =
    "type,activity,start_mean,start_sd,rate,duration_mean,duration_sd,prob,place,appliance";

namespace detail {
inline double opt_number(const std::string& s, std::string_view what) {
  const auto t = text::trim(s);
  if (t.empty() || t == "-") return 0.0;
  return text::to_double(t, what);
}
inline std::string fmt_number(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}
}  // namespace detail

/// Parses the CSV catalog format (`kCatalogHeader` columns, minutes, `-` for
/// not applicable, appliances separated by `;`). Lines starting with `#` are
/// comments.
inline Catalog parse_catalog(std::string_view doc) {
  std::vector<ActivityParams> out;
  int number = 0;
  bool header_seen = false;
  for (const auto& raw : text::split(doc, '\n')) {
    ++number;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (line.substr(0, 5) == "type,") continue;
    }
    const auto f = text::csv_fields(line);
    const std::string where = "catalog line " + std::to_string(number) + ": ";
    if (f.size() != 10) throw ConfigError("catalog", where + "expected 10 fields, got " + std::to_string(f.size()));
    try {
      ActivityParams p;
      p.tier = parse_tier(text::trim(f[0]));
      p.name = std::string(text::trim(f[1]));
      p.start_mean = detail::opt_number(f[2], "start_mean");
      p.start_sd = detail::opt_number(f[3], "start_sd");
      p.rate = detail::opt_number(f[4], "rate");
      p.duration_mean = detail::opt_number(f[5], "duration_mean");
      p.duration_sd = detail::opt_number(f[6], "duration_sd");
      p.prob = detail::opt_number(f[7], "prob");
      const auto place = text::trim(f[8]);
      p.place = place == "-" ? "" : std::string(place);
      const auto appl = text::trim(f[9]);
      if (!appl.empty() && appl != "-")
        for (const auto& a : text::split(appl, ';'))
          if (auto t = text::trim(a); !t.empty()) p.appliances.emplace_back(t);
      out.push_back(std::move(p));
    } catch (const ConfigError& e) {
      throw ConfigError("catalog", where + e.what());
    }
  }
  return Catalog(std::move(out));
}

inline std::string write_catalog(const Catalog& c) {
  using detail::fmt_number;
  std::string out(kCatalogHeader);
  out += "\n";
  for (const auto& a : c.activities()) {
    const bool f = a.tier == Tier::Fundamental, n = a.tier == Tier::Necessary, r = a.tier == Tier::Random;
    std::string appl;
    for (const auto& x : a.appliances) appl += (appl.empty() ? "" : ";") + x;
    out += std::string(to_string(a.tier)) + "," + text::csv_quote(a.name) + "," +
           (f ? fmt_number(a.start_mean) : "-") + "," + (f ? fmt_number(a.start_sd) : "-") + "," +
           (n ? fmt_number(a.rate) : "-") + "," + fmt_number(a.duration_mean) + "," + fmt_number(a.duration_sd) +
           "," + (r ? fmt_number(a.prob) : "-") + "," + (a.place.empty() ? "-" : text::csv_quote(a.place)) + "," +
           (appl.empty() ? "-" : appl) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bundled catalogs
// ---------------------------------------------------------------------------

/// Twenty-activity elderly profile from national time-use statistics. Random
/// activities are equally likely.
inline constexpr std::string_view kElderlyCatalog = R"(type,activity,start_mean,start_sd,rate,duration_mean,duration_sd,prob,place,appliance
F,have breakfast,437,30,-,34,10,-,Table,-
F,have lunch,720,30,-,42,10,-,Table,-
F,have dinner,1098,30,-,45,10,-,Table,-
F,sleep,1289,40,-,482,30,-,Bed,-
N,brush teeth,-,-,2,1.5,0.5,-,Bathroom,bathroom_faucet
N,change clothes,-,-,2,5,1,-,Wardrobe,-
N,defecation,-,-,1,10,3,-,Toilet,-
N,take a bath,-,-,1,30,10,-,Bathroom,bathroom_faucet
N,urination,-,-,5,3,0.5,-,Toilet,-
R,clean,-,-,-,30,10,1,Trash box,-
R,cooking,-,-,-,30,10,1,Kitchen,stove;kitchen_faucet
R,go out,-,-,-,40,20,1,Entrance,-
R,read a book,-,-,-,40,20,1,Desk,-
R,rest,-,-,-,30,10,1,Sofa,-
R,take a snack,-,-,-,10,3,1,Table,-
R,use the phone,-,-,-,10,3,1,Desk,-
R,wash clothes,-,-,-,5,1,1,Washer,-
R,watch TV,-,-,-,40,20,1,Sofa,tv
)";

/// Parameters fitted on the Kasteren house; `go to bed` sds already scaled by 1/3.
inline constexpr std::string_view kKasterenCatalog = R"(type,activity,start_mean,start_sd,rate,duration_mean,duration_sd,prob,place,appliance
F,prepare breakfast,562.74,38.43,-,3.34,2.55,-,-,-
F,take shower,619.02,123.10,-,9.65,2.64,-,-,-
F,prepare dinner,1159.78,51.46,-,33.31,19.54,-,-,-
F,go to bed,1416.14,24.5433333,-,556.07,25.9533333,-,-,-
N,use toilet,-,-,4.33,1.80,1.74,-,-,-
R,get drink,-,-,-,0.95,1.32,0.06,-,-
R,leave house,-,-,-,436.60,213.00,0.13,-,-
R,other,-,-,-,22.20,35.23,0.82,-,-
)";

/// Parameters fitted on the Aruba house; `sleeping` sds already halved.
inline constexpr std::string_view kArubaCatalog = R"(type,activity,start_mean,start_sd,rate,duration_mean,duration_sd,prob,place,appliance
F,take breakfast,582.11,58.27,-,10.04,9.56,-,-,-
F,take lunch,805.98,86.38,-,14.47,12.00,-,-,-
F,take dinner,1119.39,92.23,-,14.40,11.71,-,-,-
F,sleeping,4.83,33.325,-,427.16,55.385,-,-,-
N,housekeeping,-,-,0.23,24.67,22.57,-,-,-
N,meal preparation,-,-,4.86,13.40,11.96,-,-,-
N,nap,-,-,0.14,85.75,68.87,-,-,-
N,wash dishes,-,-,0.39,8.52,8.50,-,-,-
R,go out,-,-,-,144.13,93.04,0.08,-,-
R,other,-,-,-,32.55,35.88,0.42,-,-
R,relax,-,-,-,66.15,74.55,0.46,-,-
R,work,-,-,-,26.53,29.31,0.04,-,-
)";

inline Catalog bundled_catalog(std::string_view name) {
  if (name == "elderly" || name == "default") return parse_catalog(kElderlyCatalog);
  if (name == "kasteren") return parse_catalog(kKasterenCatalog);
  if (name == "aruba") return parse_catalog(kArubaCatalog);
  throw ConfigError("catalog", "no bundled catalog named '" + std::string(name) + "'");
}

}  // namespace adlsim
