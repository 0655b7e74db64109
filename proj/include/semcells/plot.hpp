#pragma once

// Self-contained SVG line charts of trajectory CSV files.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "semcells/core.hpp"
#include "semcells/embeddings.hpp"
#include "semcells/harness.hpp"
#include "semcells/text.hpp"

namespace semcells::plot {

struct Series {
  std::string ordering;
  std::string seed;
  std::string item;
  std::vector<std::pair<double, double>> points;  // (step, polysemy)
};

// Series appear in first-appearance order of (ordering, seed, item).
inline std::vector<Series> parse_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::MalformedCsv, "missing header", 1);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryHeader) {
    throw Error(ErrorCode::MalformedCsv,
                "expected header '" + std::string(kTrajectoryHeader) + "'", 1);
  }
  std::vector<Series> series;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t>
      index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto fields = text::parse_csv_line(line, line_no);
    if (fields.size() != 5) {
      throw Error(ErrorCode::MalformedCsv,
                  "expected 5 fields, found " + std::to_string(fields.size()),
                  line_no);
    }
    const auto step = semcells::detail::parse_double(fields[2]);
    const auto value = semcells::detail::parse_double(fields[4]);
    if (!step || !value) {
      throw Error(ErrorCode::MalformedCsv, "step and polysemy must be numbers",
                  line_no);
    }
    auto key = std::make_tuple(fields[0], fields[1], fields[3]);
    auto [it, inserted] = index.try_emplace(key, series.size());
    if (inserted) {
      series.push_back({fields[0], fields[1], fields[3], {}});
    }
    series[it->second].points.emplace_back(*step, *value);
  }
  if (series.empty()) {
    throw Error(ErrorCode::MalformedCsv, "no data rows", line_no);
  }
  return series;
}

namespace detail {

inline std::string fixed(double v, int digits = 2) {
  std::array<char, 64> buffer{};
  std::snprintf(buffer.data(), buffer.size(), "%.*f", digits, v);
  std::string out(buffer.data());
  if (out == "-0.00") out = "0.00";
  return out;
}

inline std::string tick(double v) {
  std::array<char, 64> buffer{};
  std::snprintf(buffer.data(), buffer.size(), "%.6g", v);
  return buffer.data();
}

inline std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline constexpr std::array<const char*, 10> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace detail

// One polyline per series on shared linear axes scaled to the data range.
inline std::string render_svg(const std::vector<Series>& series, int width = 800,
                              int height = 500) {
  if (width < 200 || height < 150) {
    throw Error(ErrorCode::InvalidParameter, "plot is too small");
  }
  double x_min = INFINITY, x_max = -INFINITY, y_min = INFINITY, y_max = -INFINITY;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  const double x_span = x_max > x_min ? x_max - x_min : 1.0;
  const double y_span = y_max > y_min ? y_max - y_min : 1.0;

  const double left = 90, right = 20, top = 20, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  auto px = [&](double x) { return left + (x - x_min) / x_span * plot_w; };
  auto py = [&](double y) { return top + plot_h - (y - y_min) / y_span * plot_h; };

  using detail::fixed;
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" fill=\"white\"/>\n";

  // Axes.
  const std::string x0 = fixed(left), x1 = fixed(left + plot_w);
  const std::string y0 = fixed(top + plot_h), y1 = fixed(top);
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + x0 + "\" y1=\"" + y0 + "\" x2=\"" + x1 + "\" y2=\"" +
         y0 + "\"/>\n";
  svg += "<line x1=\"" + x0 + "\" y1=\"" + y0 + "\" x2=\"" + x0 + "\" y2=\"" +
         y1 + "\"/>\n";
  svg += "</g>\n";

  svg += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
  svg += "<text x=\"" + x0 + "\" y=\"" + fixed(top + plot_h + 18) +
         "\" text-anchor=\"middle\">" + detail::tick(x_min) + "</text>\n";
  svg += "<text x=\"" + x1 + "\" y=\"" + fixed(top + plot_h + 18) +
         "\" text-anchor=\"middle\">" + detail::tick(x_max) + "</text>\n";
  svg += "<text x=\"" + fixed(left - 6) + "\" y=\"" + fixed(top + plot_h + 4) +
         "\" text-anchor=\"end\">" + detail::tick(y_min) + "</text>\n";
  svg += "<text x=\"" + fixed(left - 6) + "\" y=\"" + fixed(top + 4) +
         "\" text-anchor=\"end\">" + detail::tick(y_max) + "</text>\n";
  svg += "<text x=\"" + fixed(left + plot_w / 2) + "\" y=\"" +
         fixed(height - 20.0) + "\" text-anchor=\"middle\">step</text>\n";
  svg += "<text x=\"16\" y=\"" + fixed(top + plot_h / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fixed(top + plot_h / 2) + ")\">polysemy</text>\n";
  svg += "</g>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    svg += "<polyline fill=\"none\" stroke=\"" +
           std::string(detail::kPalette[i % detail::kPalette.size()]) +
           "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t p = 0; p < s.points.size(); ++p) {
      if (p) svg += ' ';
      svg += fixed(px(s.points[p].first)) + "," + fixed(py(s.points[p].second));
    }
    svg += "\"><title>" +
           detail::escape(s.ordering + " seed " + s.seed + " " + s.item) +
           "</title></polyline>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace semcells::plot
