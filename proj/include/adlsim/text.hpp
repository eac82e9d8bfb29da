#pragma once

// Small text helpers shared by the config and CSV readers.

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "adlsim/core.hpp"

namespace adlsim::text {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.emplace_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream is{std::string(s)};
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

/// Parses a double; accepts a `p/q` fraction as well.
inline double to_double(std::string_view s, std::string_view what = "number") {
  s = trim(s);
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const double den = to_double(s.substr(slash + 1), what);
    if (den == 0.0) throw ConfigError("config", "zero denominator in " + std::string(what));
    return to_double(s.substr(0, slash), what) / den;
  }
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty())
    throw ConfigError("config", "expected " + std::string(what) + ", got '" + std::string(s) + "'");
  return v;
}

inline long long to_int(std::string_view s, std::string_view what = "integer") {
  s = trim(s);
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty())
    throw ConfigError("config", "expected " + std::string(what) + ", got '" + std::string(s) + "'");
  return v;
}

inline bool to_bool(std::string_view s) {
  const auto l = lower(trim(s));
  if (l == "true" || l == "yes" || l == "1" || l == "on") return true;
  if (l == "false" || l == "no" || l == "0" || l == "off") return false;
  throw ConfigError("config", "expected boolean, got '" + std::string(s) + "'");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("io", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// One non-blank line of a sectioned document.
struct Line {
  int number = 0;
  std::string section;
  std::string text;  // trimmed, comment stripped

  bool is_assignment() const { return text.find('=') != std::string::npos; }
  std::string key() const { return std::string(trim(std::string_view(text).substr(0, text.find('=')))); }
  std::string value() const { return std::string(trim(std::string_view(text).substr(text.find('=') + 1))); }
};

/// Splits a `[section]`-structured document into lines; `#` starts a comment.
inline std::vector<Line> parse_sections(std::string_view doc) {
  std::vector<Line> out;
  std::string section;
  int number = 0;
  for (const auto& raw : split(doc, '\n')) {
    ++number;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config", "line " + std::to_string(number) + ": bad section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    out.push_back({number, section, std::string(line)});
  }
  return out;
}

/// CSV field quoting for values that may contain commas or quotes.
inline std::string csv_quote(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Splits one CSV record, honoring double-quoted fields.
inline std::vector<std::string> csv_fields(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace adlsim::text
