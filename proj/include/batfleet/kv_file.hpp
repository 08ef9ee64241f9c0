#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace batfleet {

/// Flat `key = value` configuration. `#` starts a comment; blank lines are
/// ignored; later assignments of the same key win.
class KeyValues
{
public:
  static KeyValues parse(std::istream& in, const std::string& source = "<stream>");
  static KeyValues load(const std::string& path);

  /// Parses a single `key=value` token (command-line override).
  void assign(const std::string& token);
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  void merge(const KeyValues& other);

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::int64_t> get_ints(const std::string& key, std::vector<std::int64_t> fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

private:
  std::map<std::string, std::string> entries_;
};

double parse_double(const std::string& text, const std::string& what);
std::int64_t parse_int(const std::string& text, const std::string& what);

} // namespace batfleet
