#include "batfleet/studies.hpp"

#include "batfleet/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>

namespace batfleet::studies {

std::string format_currency(double value)
{
  if (!std::isfinite(value))
    return {};
  std::string s = fmt::format("{:.2f}", value);
  return s == "-0.00" ? "0.00" : s;
}

namespace {

std::string format_number(double value)
{
  if (!std::isfinite(value))
    return {};
  return fmt::format("{:.10g}", value);
}

std::string join_points(const std::vector<int>& points, int all_count)
{
  if (!points.empty() && static_cast<int>(points.size()) == all_count)
    return "All";
  std::string s;
  for (std::size_t k = 0; k < points.size(); ++k)
    s += (k ? ";" : "") + std::to_string(points[k]);
  return s;
}

std::string xml_escape(const std::string& text)
{
  std::string out;
  for (char c : text)
    switch (c)
    {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    case '\'': out += "&apos;"; break;
    default: out += c;
    }
  return out;
}

std::ofstream open_output(const std::filesystem::path& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(fmt::format("cannot write {}", path.string()));
  return out;
}

} // namespace

std::vector<std::filesystem::path> emit_report(const SweepResult& result, const std::filesystem::path& out_dir)
{
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw Error(fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));

  std::vector<std::filesystem::path> written;
  const auto csv_path = out_dir / (result.name + ".csv");
  {
    auto out = open_output(csv_path);
    out << "series," << result.parameter
        << ",label,status,optimal_cost,heuristic_cost,best_bound,total_demand_kwh,unit_demand_cost,nodes\n";
    for (const auto& p : result.points)
      out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", p.series, format_number(p.parameter), p.label, p.status,
                         format_currency(p.optimal_cost), format_currency(p.heuristic_cost),
                         format_currency(p.best_bound), format_currency(p.total_demand),
                         format_number(p.unit_demand_cost), p.nodes);
    if (!out)
      throw Error(fmt::format("write failed: {}", csv_path.string()));
  }
  written.push_back(csv_path);
  if (result.points.empty())
    return written;

  // one polyline per cost series, in order of first appearance
  const bool unit_cost = result.name == "demand_window";
  std::vector<std::string> order;
  std::map<std::string, std::pair<ChartSeries, ChartSeries>> grouped;
  for (const auto& p : result.points)
  {
    auto [it, fresh] = grouped.try_emplace(p.series);
    if (fresh)
    {
      order.push_back(p.series);
      it->second.first.name = unit_cost ? p.series + " unit cost" : p.series + " optimal";
      it->second.second.name = p.series + " heuristic";
    }
    if (unit_cost)
    {
      if (std::isfinite(p.unit_demand_cost))
        it->second.first.points.emplace_back(p.parameter, p.unit_demand_cost);
    }
    else
    {
      if (std::isfinite(p.optimal_cost))
        it->second.first.points.emplace_back(p.parameter, p.optimal_cost);
      if (std::isfinite(p.heuristic_cost))
        it->second.second.points.emplace_back(p.parameter, p.heuristic_cost);
    }
  }
  std::vector<ChartSeries> series;
  for (const auto& key : order)
  {
    series.push_back(grouped[key].first);
    if (!unit_cost)
      series.push_back(grouped[key].second);
  }
  const auto svg_path = out_dir / (result.name + ".svg");
  {
    auto out = open_output(svg_path);
    out << svg_line_chart(result.name, result.parameter, unit_cost ? "unit demand cost ($/kWh)" : "total cost ($)",
                          series);
    if (!out)
      throw Error(fmt::format("write failed: {}", svg_path.string()));
  }
  written.push_back(svg_path);
  return written;
}

void write_comparison_csv(std::ostream& out, const SweepResult& sweep)
{
  out << "lifetime,series,average_salvage_age,salvage_time_points,purchase_time_points,optimal_cost,"
         "heuristic_cost,status\n";
  for (const auto& p : sweep.points)
  {
    std::string age, salvage, purchase;
    if (p.schedule && p.instance)
    {
      age = fmt::format("{:.2f}", average_salvage_age(*p.instance, *p.schedule));
      salvage = join_points(salvage_time_points(*p.instance, *p.schedule), p.instance->periods - 1);
      purchase = join_points(purchase_time_points(*p.instance, *p.schedule), p.instance->periods);
    }
    out << fmt::format("{},{},{},{},{},{},{},{}\n", format_number(p.parameter), p.series, age, salvage, purchase,
                       format_currency(p.optimal_cost), format_currency(p.heuristic_cost), p.status);
  }
}

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<ChartSeries>& series)
{
  constexpr double width = 720, height = 440;
  constexpr double left = 110, right = 190, top = 40, bottom = 60;
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points)
    {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (!std::isfinite(x0))
  {
    x0 = 0;
    x1 = 1;
    y0 = 0;
    y1 = 1;
  }
  if (x1 == x0)
  {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 == y0)
  {
    const double pad = std::max(1e-9, std::abs(y0) * 0.05);
    y0 -= pad;
    y1 += pad;
  }
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * plot_w; };
  auto py = [&](double y) { return top + plot_h - (y - y0) / (y1 - y0) * plot_h; };

  std::string svg = fmt::format(
    "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
    "  <rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
    "  <text x=\"{2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{3}</text>\n",
    width, height, left + plot_w / 2, xml_escape(title));
  svg += fmt::format("  <g stroke=\"black\" stroke-width=\"1\">\n"
                     "    <line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\"/>\n"
                     "    <line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{1}\"/>\n"
                     "  </g>\n",
                     left, top + plot_h, left + plot_w, top);
  svg += "  <g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int k = 0; k <= 4; ++k)
  {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    svg += fmt::format("    <text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.4g}</text>\n", px(xv),
                       top + plot_h + 18, xv);
    svg += fmt::format("    <text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.6g}</text>\n", left - 6,
                       py(yv) + 4, yv);
  }
  svg += fmt::format("    <text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", left + plot_w / 2,
                     height - 16, xml_escape(x_label));
  svg += fmt::format("    <text x=\"16\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1f})\">{}</text>\n",
                     top + plot_h / 2, top + plot_h / 2, xml_escape(y_label));
  svg += "  </g>\n";

  for (std::size_t k = 0; k < series.size(); ++k)
  {
    const char* colour = palette[k % std::size(palette)];
    std::string pts;
    for (const auto& [x, y] : series[k].points)
      pts += fmt::format("{}{:.2f},{:.2f}", pts.empty() ? "" : " ", px(x), py(y));
    svg += fmt::format("  <polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{} points=\"{}\"/>\n", colour,
                       k % 2 ? " stroke-dasharray=\"6 3\"" : "", pts);
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    svg += fmt::format("  <line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"{3}\" "
                       "stroke-width=\"2\"/>\n",
                       left + plot_w + 12, ly, left + plot_w + 36, colour);
    svg += fmt::format("  <text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                       left + plot_w + 42, ly + 4, xml_escape(series[k].name));
  }
  svg += "</svg>\n";
  return svg;
}

} // namespace batfleet::studies
