#pragma once

// House geometry, furniture obstacles, activity zones and sensor placements.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adlsim/catalog.hpp"
#include "adlsim/core.hpp"
#include "adlsim/text.hpp"

namespace adlsim {

inline constexpr double kMinFurnitureClearance = 60.0;  // cm
inline constexpr double kBodyRadius = 10.0;             // cm
inline constexpr double kFallBodyRadius = 40.0;         // cm

/// Axis-aligned rectangle, lower-left corner plus extent, in cm.
struct Rect {
  double x = 0, y = 0, w = 0, h = 0;

  double distance_to(Point2 p) const {
    const double dx = std::max({x - p.x, 0.0, p.x - (x + w)});
    const double dy = std::max({y - p.y, 0.0, p.y - (y + h)});
    return std::hypot(dx, dy);
  }
  double distance_to(const Rect& o) const {
    const double dx = std::max({o.x - (x + w), 0.0, x - (o.x + o.w)});
    const double dy = std::max({o.y - (y + h), 0.0, y - (o.y + o.h)});
    return std::hypot(dx, dy);
  }
  bool operator==(const Rect&) const = default;
};

struct Furniture {
  std::string label;
  Rect rect;
  bool operator==(const Furniture&) const = default;
};

struct WallSegment {
  Point2 a, b;

  double distance_to(Point2 p) const {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return distance(p, {a.x + t * vx, a.y + t * vy});
  }
  bool operator==(const WallSegment&) const = default;
};

struct FloorPlan {
  double width = 0;
  double height = 0;
  int pitch = 10;
  std::vector<Furniture> furniture;
  std::vector<WallSegment> walls;

  bool contains(Point2 p) const { return p.x >= 0 && p.y >= 0 && p.x <= width && p.y <= height; }

  /// Distance from `p` to the nearest obstacle: furniture, wall or the house boundary.
  double clearance(Point2 p) const {
    double d = std::min({p.x, p.y, width - p.x, height - p.y});
    for (const auto& f : furniture) d = std::min(d, f.rect.distance_to(p));
    for (const auto& w : walls) d = std::min(d, w.distance_to(p));
    return d;
  }
};

/// True iff a body disc of `body_radius` centered at `p` touches no furniture,
/// wall or outer boundary. Tangent contact counts as free.
inline bool walkable(const FloorPlan& plan, Point2 p, double body_radius) {
  if (!plan.contains(p))
    throw Error("floor_plan", "point (" + text::fixed(p.x, 1) + ", " + text::fixed(p.y, 1) + ") outside the house");
  return plan.clearance(p) >= body_radius;
}

inline bool walkable(const FloorPlan& plan, GridLocation g, double body_radius) {
  return walkable(plan, to_point(g), body_radius);
}

enum class SensorKind { PIR, PR, COST };

inline std::string_view to_string(SensorKind k) {
  switch (k) {
    case SensorKind::PIR: return "PIR";
    case SensorKind::PR: return "PR";
    case SensorKind::COST: return "COST";
  }
  return "?";
}

struct SensorSpec {
  int id = 0;  // 1-based, dense
  SensorKind kind = SensorKind::PIR;
  GridLocation position;  // unused for COST
  double radius = 50.0;   // PIR detection disc or PR mat disc
  std::string appliance;  // COST only

  double sample_rate_hz() const { return kind == SensorKind::COST ? 1.0 : 10.0; }
  bool operator==(const SensorSpec&) const = default;
};

/// Candidate locations per place name (the `place` column of the catalog).
class ZoneMap {
public:
  void add(std::string place, std::vector<GridLocation> cells) { zones_[std::move(place)] = std::move(cells); }

  bool has(const std::string& place) const { return zones_.count(place) != 0; }

  /// Cells for an activity's place; an empty place falls back to the `default` zone.
  const std::vector<GridLocation>& cells(const std::string& place) const {
    const std::string key = place.empty() ? "default" : place;
    const auto it = zones_.find(key);
    if (it == zones_.end()) throw ConfigError("floor_plan", "no zone for place '" + key + "'");
    return it->second;
  }

  const std::map<std::string, std::vector<GridLocation>>& all() const { return zones_; }

private:
  std::map<std::string, std::vector<GridLocation>> zones_;
};

struct Layout {
  FloorPlan plan;
  ZoneMap zones;
  std::vector<SensorSpec> sensors;
};

/// Rejects furniture pieces closer than 60 cm to each other and zone cells that
/// a body of radius 10 cm cannot occupy.
inline void validate_layout(const Layout& layout) {
  const auto& plan = layout.plan;
  if (!(plan.width > 0) || !(plan.height > 0) || plan.pitch <= 0)
    throw ConfigError("floor_plan", "bounds and pitch must be positive");
  for (std::size_t i = 0; i < plan.furniture.size(); ++i) {
    const auto& a = plan.furniture[i];
    if (a.rect.x < 0 || a.rect.y < 0 || a.rect.x + a.rect.w > plan.width || a.rect.y + a.rect.h > plan.height)
      throw ConfigError("floor_plan", "furniture '" + a.label + "' lies outside the house");
    for (std::size_t j = i + 1; j < plan.furniture.size(); ++j) {
      const auto& b = plan.furniture[j];
      const double gap = a.rect.distance_to(b.rect);
      if (gap < kMinFurnitureClearance)
        throw ConfigError("floor_plan", "clearance violation: '" + a.label + "' and '" + b.label + "' are " +
                                            text::fixed(gap, 1) + " cm apart (minimum 60)");
    }
  }
  for (const auto& [place, cells] : layout.zones.all()) {
    if (cells.empty()) throw ConfigError("floor_plan", "zone '" + place + "' has no cells");
    for (const auto& c : cells) {
      if (!plan.contains(to_point(c)) || !walkable(plan, c, kBodyRadius)) {
        std::string blocker = "boundary or wall";
        for (const auto& f : plan.furniture)
          if (f.rect.distance_to(to_point(c)) < kBodyRadius) blocker = "furniture '" + f.label + "'";
        throw ConfigError("floor_plan", "zone '" + place + "' cell (" + std::to_string(c.x) + ", " +
                                            std::to_string(c.y) + ") is not walkable (" + blocker + ")");
      }
    }
  }
  int expected = 1;
  for (const auto& s : layout.sensors) {
    if (s.id != expected++) throw ConfigError("floor_plan", "sensor ids must be dense starting at 1");
    if (s.kind == SensorKind::COST && s.appliance.empty())
      throw ConfigError("floor_plan", "COST sensor " + std::to_string(s.id) + " has no appliance");
  }
}

/// Checks that every catalog activity can be located in this layout.
inline void check_zones(const Layout& layout, const Catalog& catalog) {
  for (const auto& a : catalog.activities()) (void)layout.zones.cells(a.place);
}

/// Parses the sectioned layout format:
///
///     [bounds]    width = 1000 / height = 500 / pitch = 10
///     [furniture] <label> <x> <y> <w> <h>
///     [walls]     <x1> <y1> <x2> <y2>
///     [zones]     <place> = <x> <y> <w> <h>   (grid cells inside, edges inclusive)
///     [sensors]   PIR <x> <y> [radius] | PR <x> <y> [radius] | COST <appliance>
///
/// When `catalog` is given, every activity's place must have a zone.
inline Layout load_plan(std::string_view doc, const Catalog* catalog = nullptr) {
  Layout layout;
  auto& plan = layout.plan;
  auto num = [](const std::string& s) { return text::to_double(s, "length"); };
  for (const auto& line : text::parse_sections(doc)) {
    const std::string where = "layout line " + std::to_string(line.number) + ": ";
    try {
      if (line.section == "bounds") {
        if (!line.is_assignment()) throw ConfigError("floor_plan", "expected key = value");
        const auto k = text::lower(line.key());
        if (k == "width") plan.width = num(line.value());
        else if (k == "height") plan.height = num(line.value());
        else if (k == "pitch") plan.pitch = static_cast<int>(text::to_int(line.value(), "pitch"));
        else throw ConfigError("floor_plan", "unknown bounds key '" + k + "'");
      } else if (line.section == "furniture") {
        const auto t = text::split_ws(line.text);
        if (t.size() != 5) throw ConfigError("floor_plan", "expected: label x y w h");
        plan.furniture.push_back({t[0], {num(t[1]), num(t[2]), num(t[3]), num(t[4])}});
      } else if (line.section == "walls") {
        const auto t = text::split_ws(line.text);
        if (t.size() != 4) throw ConfigError("floor_plan", "expected: x1 y1 x2 y2");
        plan.walls.push_back({{num(t[0]), num(t[1])}, {num(t[2]), num(t[3])}});
      } else if (line.section == "zones") {
        if (!line.is_assignment()) throw ConfigError("floor_plan", "expected: place = x y w h");
        const auto t = text::split_ws(line.value());
        if (t.size() != 4) throw ConfigError("floor_plan", "expected: place = x y w h");
        const int pitch = plan.pitch;
        const double x0 = num(t[0]), y0 = num(t[1]), x1 = x0 + num(t[2]), y1 = y0 + num(t[3]);
        std::vector<GridLocation> cells;
        for (int y = static_cast<int>(std::ceil(y0 / pitch)) * pitch; y <= y1; y += pitch)
          for (int x = static_cast<int>(std::ceil(x0 / pitch)) * pitch; x <= x1; x += pitch) cells.push_back({x, y});
        layout.zones.add(line.key(), std::move(cells));
      } else if (line.section == "sensors") {
        const auto t = text::split_ws(line.text);
        SensorSpec s;
        s.id = static_cast<int>(layout.sensors.size()) + 1;
        const auto kind = text::lower(t.at(0));
        if (kind == "pir" || kind == "pr") {
          if (t.size() < 3 || t.size() > 4) throw ConfigError("floor_plan", "expected: PIR|PR x y [radius]");
          s.kind = kind == "pir" ? SensorKind::PIR : SensorKind::PR;
          s.position = {static_cast<int>(num(t[1])), static_cast<int>(num(t[2]))};
          s.radius = t.size() == 4 ? num(t[3]) : (s.kind == SensorKind::PIR ? 50.0 : 25.0);
        } else if (kind == "cost") {
          if (t.size() != 2) throw ConfigError("floor_plan", "expected: COST appliance");
          s.kind = SensorKind::COST;
          s.appliance = t[1];
          s.radius = 0;
        } else {
          throw ConfigError("floor_plan", "unknown sensor kind '" + t[0] + "'");
        }
        layout.sensors.push_back(std::move(s));
      } else {
        throw ConfigError("floor_plan", "line outside a known section");
      }
    } catch (const ConfigError& e) {
      throw ConfigError("floor_plan", where + e.what());
    }
  }
  validate_layout(layout);
  if (catalog) check_zones(layout, *catalog);
  return layout;
}

/// Studio apartment, 10 m x 5 m. Sensors 1-21 are PIR, 22-23 pressure mats at
/// the foot of the bed, 24-27 power/flow sensors.
inline constexpr std::string_view kStudioLayout = R"([bounds]
width = 1000
height = 500
pitch = 10

[furniture]
water_closet      20  20  50  60
washing_machine  170  20  60  60
trash_box        300  20  30  30
cupboard         540  20  50  40
kitchen_stove    650  20  60  60
refrigerator     770  20  60  60
wardrobe         890  20  90  60
chair            330 190  50  50
dining_table     450 180 120  80
desk             300 420 120  60
sofa             600 420 160  60
bed              870 280 110 200

[walls]
250   0 250 200
250 300 250 500

[zones]
Toilet    =  90  40  20  20
Washer    = 180 100  40  10
Bathroom  =  80 380 100  60
Trash box = 350  30  20  10
Kitchen   = 660 100  40  10
Wardrobe  = 910 100  50  10
Table     = 460 150 100  10
Desk      = 330 390  60  10
Sofa      = 620 390 120  10
Entrance  = 460 460  60  20
Bed       = 890 250  70  10
Walking   = 300 300 500  50
default   = 300 300 500  50

[sensors]
PIR 100  60
PIR 130 420
PIR 200 150
PIR 250 250
PIR 330 130
PIR 430 130
PIR 530 130
PIR 630 130
PIR 730 130
PIR 830 130
PIR 930 130
PIR 330 320
PIR 430 320
PIR 530 320
PIR 630 320
PIR 730 320
PIR 830 320
PIR 360 380
PIR 680 380
PIR 490 430
PIR 930 190
PR  905 255 25
PR  945 255 25
COST tv
COST stove
COST kitchen_faucet
COST bathroom_faucet
)";

}  // namespace adlsim
