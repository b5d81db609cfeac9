// util/config.h
//
// Sectioned key/value text format used for dataset manifests and experiment
// configurations:
//
//   # comment
//   [section]
//   key = value
//   key = another value     (repeated keys accumulate, order preserved)
//
// Keys and section names are case-sensitive.  Values keep internal spaces;
// surrounding whitespace is trimmed.  Lines starting with '#' or ';' are
// comments.

#ifndef DEMIST_UTIL_CONFIG_H_
#define DEMIST_UTIL_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

namespace demist {

class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;

  // Throws DataError when the key is absent (or a value fails to parse).
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key, double fallback) const;
  int64_t get_int(const std::string& section, const std::string& key) const;
  int64_t get_int_or(const std::string& section, const std::string& key, int64_t fallback) const;
  uint64_t get_u64_or(const std::string& section, const std::string& key,
                      uint64_t fallback) const;

  // All values recorded for a repeated key, in file order.
  std::vector<std::string> get_all(const std::string& section, const std::string& key) const;

  // Whitespace-separated list of numbers in one value.
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;

  std::vector<std::string> sections() const;

  const std::string& origin() const { return origin_; }

 private:
  struct Entry {
    std::string section, key, value;
  };
  std::vector<Entry> entries_;
  std::vector<std::string> section_order_;
  std::string origin_;
};

// Helpers shared with other line-oriented readers.
std::string trim(const std::string& s);
std::vector<std::string> split_ws(const std::string& s);
double parse_double(const std::string& s, const std::string& what);
int64_t parse_int(const std::string& s, const std::string& what);

}  // namespace demist

#endif  // DEMIST_UTIL_CONFIG_H_
