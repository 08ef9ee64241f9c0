/*
 * demand.hpp
 *
 * Demand series ingestion. CSV layout: header `period,demand_kwh`, one row per
 * period, labels `YYYY-MM` (monthly) or `YYYY-Qn` (quarterly).
 */
#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace batfleet::demand {

enum class Granularity { monthly, quarterly };

struct DemandSeries
{
  Granularity granularity = Granularity::quarterly;
  std::vector<std::string> labels;
  std::vector<double> values; // kWh per period, scale already applied
  double scale_factor = 1.0;

  std::size_t size() const { return values.size(); }
  double mean() const;
  /// Consecutive monthly triples summed into calendar quarters.
  DemandSeries to_quarterly() const;
  DemandSeries window(std::size_t first, std::size_t count) const;
  /// Index of a period label, throws InputError when absent.
  std::size_t index_of(const std::string& label) const;
};

DemandSeries load_demand(std::istream& in, const std::string& source, double scale = 1.0,
                         bool quarterly = false);
DemandSeries load_demand(const std::string& path, double scale = 1.0, bool quarterly = false);

void write_demand_csv(std::ostream& out, const DemandSeries& series);

/// Scale applied to raw retail sales to get fleet demand.
inline constexpr double raw_sales_scale = 1e-3;
/// Target quarterly mean of the last 20 quarters after scaling, kWh.
inline constexpr double reference_quarterly_mean = 940'572'000.0;

/// Deterministic seasonal monthly series with an accelerating upward trend,
/// 1969-01 .. 2018-12, in raw (unscaled) kWh. After raw_sales_scale and quarterly
/// aggregation the final 20 quarters average reference_quarterly_mean.
DemandSeries synthetic_monthly_series();

} // namespace batfleet::demand
