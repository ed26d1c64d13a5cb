#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "opo/io.hpp"

namespace opo::io {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string escape(const std::string& s) {
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

std::pair<double, double> padded(double lo, double hi) {
  if (lo == hi) {
    const double pad = lo == 0.0 ? 0.5 : 0.05 * std::abs(lo);
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

std::string text(double x, double y, const std::string& anchor, const std::string& content) {
  return "<text x=\"" + fixed(x) + "\" y=\"" + fixed(y) + "\" text-anchor=\"" + anchor +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(content) + "</text>\n";
}

}  // namespace

PlotOutput emit_plot_data(const PlotSeries& series) {
  if (series.points.empty()) throw std::invalid_argument("plot series is empty");
  double xmin = series.points.front().first, xmax = xmin;
  double ymin = series.points.front().second, ymax = ymin;
  for (const auto& [x, y] : series.points) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("plot data must be finite");
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  std::tie(xmin, xmax) = padded(xmin, xmax);
  std::tie(ymin, ymax) = padded(ymin, ymax);

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg += text(kWidth / 2, kTop / 2 + 4, "middle", series.title);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  svg += "<line x1=\"" + fixed(x0) + "\" y1=\"" + fixed(y0) + "\" x2=\"" + fixed(x1) + "\" y2=\"" +
         fixed(y0) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fixed(x0) + "\" y1=\"" + fixed(y0) + "\" x2=\"" + fixed(x0) + "\" y2=\"" +
         fixed(y1) + "\" stroke=\"black\"/>\n";
  svg += text(x0, y0 + 16, "middle", tick(xmin));
  svg += text(x1, y0 + 16, "middle", tick(xmax));
  svg += text(x0 - 6, y0 + 4, "end", tick(ymin));
  svg += text(x0 - 6, y1 + 4, "end", tick(ymax));
  svg += text(kLeft + plot_w / 2, kHeight - 12, "middle", series.x_label);
  svg += "<text x=\"16\" y=\"" + fixed(kTop + plot_h / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
         fixed(kTop + plot_h / 2) + ")\">" + escape(series.y_label) + "</text>\n";

  svg += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < series.points.size(); ++i) {
    const auto& [x, y] = series.points[i];
    svg += (i ? " " : "") + fixed(px(x)) + "," + fixed(py(y));
  }
  svg += "\"/>\n";
  if (series.markers) {
    for (const auto& [x, y] : series.points)
      svg += "<circle cx=\"" + fixed(px(x)) + "\" cy=\"" + fixed(py(y)) + "\" r=\"2.5\" fill=\"#1f77b4\"/>\n";
  }
  svg += "</svg>\n";

  PlotOutput out;
  out.svg = std::move(svg);
  auto column = [](std::string s) {
    std::replace(s.begin(), s.end(), ',', '_');
    return s;
  };
  out.csv.header = {column(series.x_label), column(series.y_label)};
  for (const auto& [x, y] : series.points) out.csv.rows.push_back({x, y});
  return out;
}

}  // namespace opo::io
