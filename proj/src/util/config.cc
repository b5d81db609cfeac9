#include "util/config.h"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "util/errors.h"

namespace demist {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& s, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw DataError(what + ": not a number: '" + s + "'");
  return v;
}

int64_t parse_int(const std::string& s, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw DataError(what + ": not an integer: '" + s + "'");
  return v;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3)
        throw DataError(origin + ":" + std::to_string(lineno) + ": malformed section header: " + t);
      section = trim(t.substr(1, t.size() - 2));
      bool seen = false;
      for (const auto& s : cfg.section_order_) seen = seen || s == section;
      if (!seen) cfg.section_order_.push_back(section);
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw DataError(origin + ":" + std::to_string(lineno) + ": expected 'key = value': " + t);
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw DataError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw DataError(origin + ":" + std::to_string(lineno) + ": key outside any [section]: " + key);
    cfg.entries_.push_back({section, key, value});
  }
  return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) return true;
  return false;
}

bool Config::has_section(const std::string& section) const {
  for (const auto& s : section_order_)
    if (s == section) return true;
  return false;
}

std::string Config::get(const std::string& section, const std::string& key) const {
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) return e.value;
  throw DataError(origin_ + ": missing [" + section + "] " + key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  return parse_double(get(section, key), origin_ + ": [" + section + "] " + key);
}

double Config::get_double_or(const std::string& section, const std::string& key,
                             double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

int64_t Config::get_int(const std::string& section, const std::string& key) const {
  return parse_int(get(section, key), origin_ + ": [" + section + "] " + key);
}

int64_t Config::get_int_or(const std::string& section, const std::string& key,
                           int64_t fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

uint64_t Config::get_u64_or(const std::string& section, const std::string& key,
                            uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  return static_cast<uint64_t>(get_int(section, key));
}

std::vector<std::string> Config::get_all(const std::string& section,
                                         const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) out.push_back(e.value);
  return out;
}

std::vector<double> Config::get_doubles(const std::string& section,
                                        const std::string& key) const {
  std::vector<double> out;
  for (const auto& tok : split_ws(get(section, key)))
    out.push_back(parse_double(tok, origin_ + ": [" + section + "] " + key));
  return out;
}

std::vector<std::string> Config::sections() const { return section_order_; }

}  // namespace demist
