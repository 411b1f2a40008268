#pragma once

// Minimal SVG line plots from the CSV files the CLI writes.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nltaxis/output.hpp"

namespace nltaxis {

class PlotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw PlotError("missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  }
};

inline CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CsvTable t;
  auto split = [](const std::string& l) {
    std::vector<std::string> out;
    std::stringstream ss(l);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!l.empty() && l.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(in, line) || line.empty()) throw PlotError("empty CSV");
  if (line.back() == '\r') line.pop_back();
  t.header = split(line);
  if (t.header.size() < 2) throw PlotError("CSV needs at least two columns");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size())
      throw PlotError("line " + std::to_string(lineno) + ": expected " +
                      std::to_string(t.header.size()) + " fields");
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size())
        throw PlotError("line " + std::to_string(lineno) + ": '" + c + "' is not a number");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw PlotError("CSV has no data rows");
  return t;
}

struct Series {
  std::string label;
  std::vector<double> x, y;
};

inline std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                                 const std::string& ylabel, const std::vector<Series>& series) {
  constexpr double W = 720, H = 440, ml = 70, mr = 150, mt = 40, mb = 50;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!(x1 >= x0)) x0 = 0, x1 = 1;
  if (!(y1 >= y0)) y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
    << H - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << ml << "\" y=\"" << H - mb + 16 << "\">" << fmt_double(x0) << "</text>\n";
  o << "<text x=\"" << W - mr << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"end\">" << fmt_double(x1)
    << "</text>\n";
  o << "<text x=\"" << ml - 4 << "\" y=\"" << H - mb << "\" text-anchor=\"end\">" << fmt_double(y0) << "</text>\n";
  o << "<text x=\"" << ml - 4 << "\" y=\"" << mt + 10 << "\" text-anchor=\"end\">" << fmt_double(y1) << "</text>\n";
  o << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xlabel
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << (mt + H - mb) / 2 << "\" transform=\"rotate(-90 16 " << (mt + H - mb) / 2
    << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* col = kColors[k % 10];
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[k].x.size(); ++i)
      if (std::isfinite(series[k].x[i]) && std::isfinite(series[k].y[i]))
        o << px(series[k].x[i]) << ',' << py(series[k].y[i]) << ' ';
    o << "\"/>\n";
    const double ly = mt + 14 + 16.0 * static_cast<double>(k);
    o << "<line x1=\"" << W - mr + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - mr + 30 << "\" y2=\""
      << ly - 4 << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - mr + 34 << "\" y=\"" << ly << "\">" << series[k].label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

/// Groups rows by the value in column `key` and plots y against x per group.
inline std::vector<Series> group_series(const CsvTable& t, const std::string& key, const std::string& x,
                                        const std::string& y, const std::string& prefix) {
  const std::size_t kk = t.column(key), kx = t.column(x), ky = t.column(y);
  std::map<double, Series> groups;
  for (const auto& row : t.rows) {
    auto& s = groups[row[kk]];
    s.label = prefix + fmt_double(row[kk]);
    s.x.push_back(row[kx]);
    s.y.push_back(row[ky]);
  }
  std::vector<Series> out;
  for (auto& [_, s] : groups) out.push_back(std::move(s));
  return out;
}

/// SVG documents (file name, content) for one CSV written by the CLI.
inline std::vector<std::pair<std::string, std::string>> plot_csv(const std::string& text,
                                                                 const std::string& stem) {
  const CsvTable t = parse_csv(text);
  const auto& h = t.header;
  std::vector<std::pair<std::string, std::string>> out;
  if (h == std::vector<std::string>{"t", "x", "c", "v"}) {
    out.emplace_back(stem + "_c.svg", svg_line_plot("cell density", "x", "c", group_series(t, "t", "x", "c", "t=")));
    out.emplace_back(stem + "_v.svg", svg_line_plot("matrix density", "x", "v", group_series(t, "t", "x", "v", "t=")));
  } else if (h == std::vector<std::string>{"t", "r", "d"}) {
    out.emplace_back(stem + ".svg", svg_line_plot("distance to local solution", "t", "d",
                                                  group_series(t, "r", "t", "d", "r=")));
  } else if (h.size() == 4 && h[0] == "t" && h[1] == "x") {
    out.emplace_back(stem + ".svg", svg_line_plot(h[2] + " vs " + h[3], "x", h[2],
                                                  group_series(t, "t", "x", h[2], "t=")));
  } else {
    std::vector<Series> series;
    for (std::size_t k = 1; k < h.size(); ++k) {
      Series s;
      s.label = h[k];
      for (const auto& row : t.rows) {
        s.x.push_back(row[0]);
        s.y.push_back(row[k]);
      }
      series.push_back(std::move(s));
    }
    out.emplace_back(stem + ".svg", svg_line_plot(stem, h[0], "value", series));
  }
  return out;
}

}  // namespace nltaxis
