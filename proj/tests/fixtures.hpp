#pragma once

// Fixture files under tests/data and the exact sequences cleaning must produce.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "adlsim/ingest.hpp"

namespace fixtures {

using namespace adlsim;

inline std::string slurp(const std::string& name) {
  std::ifstream in(std::string(ADLSIM_TEST_DATA) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Piece {
  std::string label;
  double start, end;  // minutes from the window start
};

// d/h/m to minutes.
constexpr double at(int d, int h, int m) { return d * 1440.0 + h * 60.0 + m; }

inline bool pieces_match(const ActivitySequence& s, const std::vector<Piece>& want) {
  if (s.items.size() != want.size()) return false;
  for (std::size_t i = 0; i < want.size(); ++i)
    if (s.items[i].name != want[i].label || s.items[i].start != SimTime::minutes(want[i].start) ||
        s.items[i].end() != SimTime::minutes(want[i].end))
      return false;
  return true;
}

inline KasterenOptions kasteren_window() {
  KasterenOptions o;
  o.window_start = parse_date("2008-02-26");
  o.days = 3;
  return o;
}

inline ArubaOptions aruba_window() {
  ArubaOptions o;
  o.window_start = parse_date("2010-11-04");
  o.days = 3;
  return o;
}

inline const std::vector<Piece> kKasterenExpected = {
    {"other", at(0, 0, 0), at(0, 0, 30)},
    {"go to bed", at(0, 0, 30), at(0, 7, 30)},
    {"other", at(0, 7, 30), at(0, 7, 35)},
    {"use toilet", at(0, 7, 35), at(0, 7, 37)},
    {"other", at(0, 7, 37), at(0, 8, 0)},
    {"prepare breakfast", at(0, 8, 0), at(0, 8, 10)},
    {"other", at(0, 8, 10), at(0, 13, 0)},
    {"get drink", at(0, 13, 0), at(0, 13, 3)},
    {"other", at(0, 13, 3), at(0, 18, 0)},
    {"prepare dinner", at(0, 18, 0), at(0, 18, 20)},
    {"use toilet", at(0, 18, 20), at(0, 18, 22)},
    {"prepare dinner", at(0, 18, 22), at(0, 18, 40)},
    {"other", at(0, 18, 40), at(1, 10, 0)},
    {"take shower", at(1, 10, 0), at(1, 10, 15)},
    {"other", at(1, 10, 15), at(1, 10, 20)},
    {"leave house", at(1, 10, 20), at(1, 12, 0)},
    {"other", at(1, 12, 0), at(2, 22, 0)},
    {"go to bed", at(2, 22, 0), at(3, 0, 0)},
};

inline const std::vector<Piece> kArubaExpected = {
    {"other", at(0, 0, 0), at(0, 0, 30)},
    {"take dinner", at(0, 0, 30), at(0, 0, 50)},
    {"sleeping", at(0, 0, 50), at(0, 7, 0)},
    {"other", at(0, 7, 0), at(0, 7, 30)},
    {"take breakfast", at(0, 7, 30), at(0, 7, 53)},
    {"wash dishes", at(0, 7, 53), at(0, 8, 20)},
    {"other", at(0, 8, 20), at(0, 10, 0)},
    {"relax", at(0, 10, 0), at(0, 10, 30)},
    {"work", at(0, 10, 30), at(0, 10, 45)},
    {"relax", at(0, 10, 45), at(0, 11, 4)},
    {"other", at(0, 11, 4), at(0, 12, 0)},
    {"go out", at(0, 12, 0), at(0, 13, 31)},
    {"other", at(0, 13, 31), at(0, 13, 40)},
    {"take lunch", at(0, 13, 40), at(0, 14, 0)},
    {"nap", at(0, 14, 0), at(0, 15, 0)},
    {"other", at(0, 15, 0), at(0, 18, 30)},
    {"take dinner", at(0, 18, 30), at(0, 19, 0)},
    {"other", at(0, 19, 0), at(0, 22, 0)},
    {"sleeping", at(0, 22, 0), at(1, 6, 30)},
    {"other", at(1, 6, 30), at(1, 11, 0)},
    {"meal preparation", at(1, 11, 0), at(1, 11, 30)},
    {"other", at(1, 11, 30), at(1, 16, 59)},
    {"nap", at(1, 16, 59), at(1, 17, 45)},  // adjacent records merge before the nap rule
    {"other", at(1, 17, 45), at(1, 17, 50)},  // a 5-minute vacancy is not absorbed
    {"sleeping", at(1, 17, 50), at(1, 18, 0)},
    {"other", at(1, 18, 0), at(2, 23, 0)},
    {"sleeping", at(2, 23, 0), at(3, 0, 0)},
};

}  // namespace fixtures
