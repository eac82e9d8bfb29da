#pragma once

// Day-to-day similarity of activity sequences: each day becomes a string of
// one character per sampling slot, compared by Levenshtein distance.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "adlsim/catalog.hpp"
#include "adlsim/core.hpp"
#include "adlsim/rng.hpp"

namespace adlsim {

/// Activity name to character.
class Alphabet {
public:
  Alphabet() = default;

  /// Assigns A-Z, a-z, 0-9 in the order names are first added.
  void add(const std::string& name) {
    if (map_.count(name)) return;
    static constexpr std::string_view kChars = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
    if (map_.size() >= kChars.size()) throw ConfigError("metrics", "alphabet supports at most 62 activities");
    map_.emplace(name, kChars[map_.size()]);
  }
  char at(const std::string& name) const {
    auto it = map_.find(name);
    if (it == map_.end()) throw ConfigError("metrics", "activity '" + name + "' has no character");
    return it->second;
  }
  void set(const std::string& name, char c) { map_[name] = c; }
  bool has(const std::string& name) const { return map_.count(name) != 0; }
  const std::map<std::string, char>& entries() const { return map_; }

  /// Characters for every name used by the given sequences, in sorted name order.
  static Alphabet of(std::initializer_list<const ActivitySequence*> seqs) {
    std::vector<std::string> names;
    for (const auto* s : seqs)
      for (const auto& a : s->items) names.push_back(a.name);
    std::sort(names.begin(), names.end());
    Alphabet al;
    for (const auto& n : names) al.add(n);
    return al;
  }

private:
  std::map<std::string, char> map_;
};

/// Slots per day at sampling rate `f` Hz; must be a whole number.
inline std::int64_t slots_per_day(double f) {
  const double slots = f * 86400.0;
  const auto n = std::llround(slots);
  if (!(f > 0.0) || std::abs(slots - static_cast<double>(n)) > 1e-6 || n <= 0)
    throw ConfigError("metrics", "sampling rate must give a whole number of slots per day");
  return n;
}

/// One string per day; slot k holds the activity active at the slot's start.
inline std::vector<std::string> to_day_strings(const ActivitySequence& seq, double f, const Alphabet& alphabet) {
  const std::int64_t n = slots_per_day(f);
  auto days = split_by_day(seq);
  std::vector<std::string> out;
  for (std::size_t d = 0; d < days.size(); ++d) {
    auto& pieces = days[d];
    std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    std::string s(static_cast<std::size_t>(n), '\0');
    std::size_t p = 0;
    const SimTime day_start = SimTime::days(static_cast<std::int64_t>(d));
    for (std::int64_t k = 0; k < n; ++k) {
      const SimTime t = day_start + SimTime(std::llround(static_cast<double>(k) * kTicksPerDay / static_cast<double>(n)));
      while (p < pieces.size() && pieces[p].end() <= t) ++p;
      if (p >= pieces.size() || pieces[p].start > t)
        throw Error("metrics", "sequence does not cover " + format_time(t));
      s[static_cast<std::size_t>(k)] = alphabet.at(pieces[p].name);
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Edit distance
// ---------------------------------------------------------------------------

/// Reference Levenshtein distance, two-row dynamic programming.
inline std::int64_t levenshtein_dp(std::string_view a, std::string_view b) {
  std::vector<std::int64_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<std::int64_t>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<std::int64_t>(i);
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Bit-parallel Levenshtein distance (Myers' algorithm, multi-word blocks)
/// with the pattern's match masks prepared once for many texts.
class MyersPattern {
public:
  explicit MyersPattern(std::string_view pattern) : m_(pattern.size()), blocks_((pattern.size() + 63) / 64) {
    peq_.assign(256 * std::max<std::size_t>(blocks_, 1), 0);
    for (std::size_t i = 0; i < m_; ++i)
      peq_[static_cast<unsigned char>(pattern[i]) * blocks_ + i / 64] |= std::uint64_t{1} << (i % 64);
  }

  std::int64_t distance(std::string_view text) const {
    if (m_ == 0) return static_cast<std::int64_t>(text.size());
    std::vector<std::uint64_t> pv(blocks_, ~std::uint64_t{0}), mv(blocks_, 0);
    const std::size_t last = blocks_ - 1;
    const unsigned last_bit = static_cast<unsigned>((m_ - 1) % 64);
    auto score = static_cast<std::int64_t>(m_);
    for (char c : text) {
      const std::uint64_t* eq_row = &peq_[static_cast<unsigned char>(c) * blocks_];
      int hin = 1;  // the top boundary row increases by one per column
      for (std::size_t b = 0; b < blocks_; ++b) {
        std::uint64_t eq = eq_row[b];
        const std::uint64_t pvb = pv[b], mvb = mv[b];
        const std::uint64_t hin_neg = hin < 0 ? 1 : 0;
        const std::uint64_t xv = eq | mvb;
        eq |= hin_neg;
        const std::uint64_t xh = (((eq & pvb) + pvb) ^ pvb) | eq;
        std::uint64_t ph = mvb | ~(xh | pvb);
        std::uint64_t mh = pvb & xh;
        if (b == last) {
          score += static_cast<std::int64_t>((ph >> last_bit) & 1U) - static_cast<std::int64_t>((mh >> last_bit) & 1U);
        }
        const int hout = static_cast<int>(ph >> 63) - static_cast<int>(mh >> 63);
        ph <<= 1;
        mh <<= 1;
        mh |= hin_neg;
        ph |= hin > 0 ? 1 : 0;
        pv[b] = mh | ~(xv | ph);
        mv[b] = ph & xv;
        hin = hout;
      }
    }
    return score;
  }

private:
  std::size_t m_;
  std::size_t blocks_;
  std::vector<std::uint64_t> peq_;
};

inline std::int64_t sim(std::string_view a, std::string_view b) { return MyersPattern(a).distance(b); }

/// Mean distance over all |A|*|B| pairs.
inline double rho_cross(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) throw Error("metrics", "rho_cross needs two non-empty sets");
  double sum = 0.0;
  for (const auto& x : a) {
    const MyersPattern p(x);
    for (const auto& y : b) sum += static_cast<double>(p.distance(y));
  }
  return sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

/// Mean distance over unordered pairs of distinct days.
inline double rho_self(const std::vector<std::string>& a) {
  if (a.size() < 2) throw Error("metrics", "rho_self needs at least two days");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const MyersPattern p(a[i]);
    for (std::size_t j = i + 1; j < a.size(); ++j) sum += static_cast<double>(p.distance(a[j]));
  }
  const double pairs = static_cast<double>(a.size()) * static_cast<double>(a.size() - 1) / 2.0;
  return sum / pairs;
}

struct Deltas {
  double rho_self = 0.0;   // rho(A, A)
  double rho_cross = 0.0;  // rho(A, A*)
  double intra = 0.0;      // |rho(A, A) - rho(A*, A*)|
  double inter = 0.0;      // |rho(A, A*) - rho(A*, A*)|
};

inline Deltas deltas(const std::vector<std::string>& a, const std::vector<std::string>& ref) {
  Deltas d;
  const double ref_self = rho_self(ref);
  d.rho_self = rho_self(a);
  d.rho_cross = rho_cross(a, ref);
  d.intra = std::abs(d.rho_self - ref_self);
  d.inter = std::abs(d.rho_cross - ref_self);
  return d;
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

/// The fundamental with the longest mean duration.
inline std::string default_sleep_activity(const Catalog& c) {
  const ActivityParams* best = nullptr;
  for (const auto* a : c.of_tier(Tier::Fundamental))
    if (!best || a->duration_mean > best->duration_mean) best = a;
  if (!best) throw ConfigError("metrics", "catalog has no fundamental activity to treat as sleep");
  return best->name;
}

namespace detail {
inline SimTime draw_duration(Rng& rng, const ActivityParams& a, SimTime epsilon) {
  for (int i = 0; i < 100; ++i) {
    const SimTime d = SimTime::minutes(draw_normal(rng, a.duration_mean, a.duration_sd));
    if (d >= epsilon) return d;
  }
  return epsilon;
}

inline void fill_random(ActivitySequence& out, SimTime from, SimTime to, const std::vector<const ActivityParams*>& pool,
                        Rng& rng, SimTime epsilon) {
  SimTime t = from;
  while (t < to) {
    const auto& a = *pool[static_cast<std::size_t>(draw_index(rng, 0, static_cast<std::int64_t>(pool.size()) - 1))];
    const SimTime d = std::min(draw_duration(rng, a, epsilon), to - t);
    out.items.push_back({out.items.size(), a.name, a.tier, t, d, {}});
    t += d;
  }
}
}  // namespace detail

/// Chronological sequence whose next activity is uniform over the catalog and
/// whose durations follow the catalog's duration laws.
inline ActivitySequence generate_rand(const Catalog& c, int days, std::uint64_t seed,
                                      SimTime epsilon = SimTime::seconds(30)) {
  Rng rng = make_rng(seed, "baseline_rand");
  std::vector<const ActivityParams*> pool;
  for (const auto& a : c.activities()) pool.push_back(&a);
  if (pool.empty()) throw ConfigError("metrics", "empty catalog");
  ActivitySequence out;
  out.day_count = days;
  detail::fill_random(out, SimTime(), out.horizon(), pool, rng, epsilon);
  return out;
}

/// Like `generate_rand`, but every instance of `sleep` is copied from the
/// reference (day d uses reference day d modulo its length) and the rest of
/// the time is filled around it without sleep.
inline ActivitySequence generate_rans(const Catalog& c, const ActivitySequence& reference, const std::string& sleep,
                                      int days, std::uint64_t seed, SimTime epsilon = SimTime::seconds(30)) {
  if (reference.day_count <= 0) throw ConfigError("metrics", "reference sequence is empty");
  Rng rng = make_rng(seed, "baseline_rans");
  std::vector<const ActivityParams*> pool;
  for (const auto& a : c.activities())
    if (a.name != sleep) pool.push_back(&a);
  if (pool.empty()) throw ConfigError("metrics", "catalog has nothing besides sleep");

  std::vector<std::pair<SimTime, SimTime>> sleeps;
  for (int d = 0; d < days; ++d) {
    const auto src = d % reference.day_count;
    const SimTime shift = SimTime::days(d - src);
    for (const auto& a : reference.items)
      if (a.name == sleep && a.start.day() == src) sleeps.push_back({a.start + shift, a.end() + shift});
  }
  std::sort(sleeps.begin(), sleeps.end());

  ActivitySequence out;
  out.day_count = days;
  const SimTime horizon = out.horizon();
  SimTime t;
  for (auto [s, e] : sleeps) {
    s = std::max(s, t);
    e = std::min(e, horizon);
    if (e <= s) continue;
    detail::fill_random(out, t, s, pool, rng, epsilon);
    out.items.push_back({out.items.size(), sleep, Tier::Fundamental, s, e - s, {}});
    t = e;
  }
  detail::fill_random(out, t, horizon, pool, rng, epsilon);
  return out;
}

}  // namespace adlsim
