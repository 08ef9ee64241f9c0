#include "batfleet/kv_file.hpp"

#include "batfleet/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace batfleet {

namespace {

std::string trim(const std::string& s)
{
  auto first = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
  auto last = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
  return first < last ? std::string(first, last) : std::string();
}

std::vector<std::string> split_list(const std::string& text)
{
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
  {
    item = trim(item);
    if (!item.empty())
      out.push_back(item);
  }
  return out;
}

} // namespace

double parse_double(const std::string& text, const std::string& what)
{
  const std::string t = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw InputError(what + ": not a number: '" + text + "'");
  return value;
}

std::int64_t parse_int(const std::string& text, const std::string& what)
{
  const std::string t = trim(text);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw InputError(what + ": not an integer: '" + text + "'");
  return value;
}

KeyValues KeyValues::parse(std::istream& in, const std::string& source)
{
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line))
  {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError(source + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw InputError(source + ":" + std::to_string(lineno) + ": empty key");
    kv.entries_[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

KeyValues KeyValues::load(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open " + path);
  return parse(in, path);
}

void KeyValues::assign(const std::string& token)
{
  auto eq = token.find('=');
  if (eq == std::string::npos || trim(token.substr(0, eq)).empty())
    throw InputError("override must look like key=value: '" + token + "'");
  entries_[trim(token.substr(0, eq))] = trim(token.substr(eq + 1));
}

void KeyValues::merge(const KeyValues& other)
{
  for (const auto& [k, v] : other.entries_)
    entries_[k] = v;
}

std::optional<std::string> KeyValues::get(const std::string& key) const
{
  auto it = entries_.find(key);
  if (it == entries_.end())
    return std::nullopt;
  return it->second;
}

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const
{
  return get(key).value_or(fallback);
}

double KeyValues::get_double(const std::string& key, double fallback) const
{
  auto v = get(key);
  return v ? parse_double(*v, key) : fallback;
}

std::int64_t KeyValues::get_int(const std::string& key, std::int64_t fallback) const
{
  auto v = get(key);
  return v ? parse_int(*v, key) : fallback;
}

bool KeyValues::get_bool(const std::string& key, bool fallback) const
{
  auto v = get(key);
  if (!v)
    return fallback;
  std::string s = *v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "true" || s == "yes" || s == "on")
    return true;
  if (s == "0" || s == "false" || s == "no" || s == "off")
    return false;
  throw InputError(key + ": not a boolean: '" + *v + "'");
}

std::vector<double> KeyValues::get_doubles(const std::string& key, std::vector<double> fallback) const
{
  auto v = get(key);
  if (!v)
    return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(*v))
    out.push_back(parse_double(item, key));
  return out;
}

std::vector<std::int64_t> KeyValues::get_ints(const std::string& key,
                                              std::vector<std::int64_t> fallback) const
{
  auto v = get(key);
  if (!v)
    return fallback;
  std::vector<std::int64_t> out;
  for (const auto& item : split_list(*v))
    out.push_back(parse_int(item, key));
  return out;
}

} // namespace batfleet
