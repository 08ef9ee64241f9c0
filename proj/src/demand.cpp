#include "batfleet/demand.hpp"

#include "batfleet/errors.hpp"
#include "batfleet/kv_file.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

namespace batfleet::demand {

namespace {

struct Label
{
  int year = 0;
  int sub = 0; // month 1..12 or quarter 1..4
  Granularity granularity = Granularity::monthly;
};

std::string trim(std::string s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_label(const std::string& text, Label& out)
{
  if (text.size() < 6 || text[4] != '-')
    return false;
  for (int k = 0; k < 4; ++k)
    if (!std::isdigit(static_cast<unsigned char>(text[static_cast<std::size_t>(k)])))
      return false;
  out.year = std::stoi(text.substr(0, 4));
  if (text.size() == 7 && text[5] == 'Q' && text[6] >= '1' && text[6] <= '4')
  {
    out.granularity = Granularity::quarterly;
    out.sub = text[6] - '0';
    return true;
  }
  if (text.size() == 7 && std::isdigit(static_cast<unsigned char>(text[5])) &&
      std::isdigit(static_cast<unsigned char>(text[6])))
  {
    out.granularity = Granularity::monthly;
    out.sub = std::stoi(text.substr(5, 2));
    return out.sub >= 1 && out.sub <= 12;
  }
  return false;
}

int ordinal(const Label& l) { return l.year * (l.granularity == Granularity::monthly ? 12 : 4) + l.sub - 1; }

} // namespace

double DemandSeries::mean() const
{
  if (values.empty())
    return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

DemandSeries DemandSeries::to_quarterly() const
{
  if (granularity == Granularity::quarterly)
    return *this;
  DemandSeries q;
  q.granularity = Granularity::quarterly;
  q.scale_factor = scale_factor;
  for (std::size_t k = 0; k < values.size(); ++k)
  {
    Label l;
    parse_label(labels[k], l);
    if ((l.sub - 1) % 3 != 0)
      throw InputError(fmt::format("demand: {} does not start a calendar quarter", labels[k]));
    if (k + 2 >= values.size())
      throw InputError(fmt::format("demand: quarter starting {} is incomplete", labels[k]));
    q.labels.push_back(fmt::format("{:04d}-Q{}", l.year, (l.sub - 1) / 3 + 1));
    q.values.push_back(values[k] + values[k + 1] + values[k + 2]);
    k += 2;
  }
  return q;
}

DemandSeries DemandSeries::window(std::size_t first, std::size_t count) const
{
  if (first + count > values.size())
    throw InputError(fmt::format("demand: window [{}, {}) exceeds the {} available periods", first,
                                 first + count, values.size()));
  DemandSeries w = *this;
  w.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(first),
                  labels.begin() + static_cast<std::ptrdiff_t>(first + count));
  w.values.assign(values.begin() + static_cast<std::ptrdiff_t>(first),
                  values.begin() + static_cast<std::ptrdiff_t>(first + count));
  return w;
}

std::size_t DemandSeries::index_of(const std::string& label) const
{
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (labels[k] == label)
      return k;
  throw InputError(fmt::format("demand: no period labelled {}", label));
}

DemandSeries load_demand(std::istream& in, const std::string& source, double scale, bool quarterly)
{
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw InputError(fmt::format("{}: scale must be positive", source));
  DemandSeries s;
  s.scale_factor = scale;
  std::string line;
  int line_no = 0;
  bool header = false;
  int previous = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    line = trim(line);
    if (line.empty())
      continue;
    if (!header)
    {
      std::string compact;
      for (char c : line)
        if (c != ' ' && c != '\t')
          compact += c;
      if (compact != "period,demand_kwh")
        throw InputError(fmt::format("{}:{}: expected header 'period,demand_kwh'", source, line_no));
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw InputError(fmt::format("{}:{}: expected two comma-separated fields", source, line_no));
    const std::string label = trim(line.substr(0, comma));
    const std::string number = trim(line.substr(comma + 1));
    Label l;
    if (!parse_label(label, l))
      throw InputError(fmt::format("{}:{}: bad period label '{}'", source, line_no, label));
    double value = 0.0;
    try
    {
      value = parse_double(number, "demand_kwh");
    }
    catch (const InputError&)
    {
      throw InputError(fmt::format("{}:{}: demand '{}' is not a number", source, line_no, number));
    }
    if (!std::isfinite(value) || value < 0.0)
      throw InputError(fmt::format("{}:{}: demand must be a finite non-negative value", source, line_no));
    if (s.values.empty())
      s.granularity = l.granularity;
    else
    {
      if (l.granularity != s.granularity)
        throw InputError(fmt::format("{}:{}: mixed monthly and quarterly labels", source, line_no));
      if (ordinal(l) != previous + 1)
        throw InputError(fmt::format("{}:{}: period {} does not follow the previous row", source, line_no, label));
    }
    previous = ordinal(l);
    s.labels.push_back(label);
    s.values.push_back(value * scale);
  }
  if (!header)
    throw InputError(fmt::format("{}: empty demand file", source));
  return quarterly ? s.to_quarterly() : s;
}

DemandSeries load_demand(const std::string& path, double scale, bool quarterly)
{
  std::ifstream in(path);
  if (!in)
    throw InputError(fmt::format("cannot open demand file {}", path));
  return load_demand(in, path, scale, quarterly);
}

void write_demand_csv(std::ostream& out, const DemandSeries& series)
{
  out << "period,demand_kwh\n";
  for (std::size_t k = 0; k < series.size(); ++k)
    out << series.labels[k] << ',' << fmt::format("{:.15g}", series.values[k]) << '\n';
}

DemandSeries synthetic_monthly_series()
{
  constexpr int first_year = 1969;
  constexpr int years = 50;
  constexpr int months = years * 12;
  constexpr double two_pi = 2.0 * std::numbers::pi;

  // strictly increasing trend whose growth rate creeps up over the decades,
  // with a summer peak and a smaller winter peak
  std::vector<double> shape(months);
  for (int t = 0; t < months; ++t)
  {
    const double year = t / 12.0;
    const int month = t % 12; // 0 = January
    const double trend = std::exp(0.004 * year + 0.0003 * year * year);
    const double season = 1.0 + 0.09 * std::cos(two_pi * (month - 6.5) / 12.0) +
                          0.04 * std::cos(2.0 * two_pi * (month - 0.5) / 12.0);
    shape[static_cast<std::size_t>(t)] = trend * season;
  }
  // calibrate so the last 60 months sum to 20 reference quarters (raw units)
  const double target_raw = reference_quarterly_mean / raw_sales_scale * 20.0;
  double tail = 0.0;
  for (int t = months - 60; t < months; ++t)
    tail += shape[static_cast<std::size_t>(t)];
  const double factor = target_raw / tail;

  DemandSeries s;
  s.granularity = Granularity::monthly;
  s.scale_factor = 1.0;
  double tail_rounded = 0.0;
  for (int t = 0; t < months; ++t)
  {
    s.labels.push_back(fmt::format("{:04d}-{:02d}", first_year + t / 12, t % 12 + 1));
    s.values.push_back(std::round(shape[static_cast<std::size_t>(t)] * factor));
    if (t >= months - 60)
      tail_rounded += s.values.back();
  }
  // integers below 2^53: the correction makes the tail sum exact
  s.values.back() += target_raw - tail_rounded;
  return s;
}

} // namespace batfleet::demand
