#include "wplap/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wplap {

namespace {

constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    return used == s.size() ? v : std::numeric_limits<double>::quiet_NaN();
  } catch (const std::exception&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

std::string svg_line_chart(const std::string& csv, const std::string& x_column,
                           const std::vector<std::string>& y_columns, const std::string& title,
                           bool log_x) {
  std::stringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("svg_line_chart: empty CSV");
  const auto header = split(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::invalid_argument("svg_line_chart: no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t xi = column(x_column);
  std::vector<std::size_t> yi;
  for (const auto& c : y_columns) yi.push_back(column(c));

  std::vector<double> xs;
  std::vector<std::vector<double>> ys(yi.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    auto cell = [&](std::size_t i) { return i < cells.size() ? parse(cells[i]) : std::nan(""); };
    double x = cell(xi);
    if (log_x) x = x > 0.0 ? std::log10(x) : std::nan("");
    xs.push_back(x);
    for (std::size_t k = 0; k < yi.size(); ++k) ys[k].push_back(cell(yi[k]));
  }

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (const auto& col : ys) {
      if (!std::isfinite(xs[i]) || !std::isfinite(col[i])) continue;
      x0 = std::min(x0, xs[i]), x1 = std::max(x1, xs[i]);
      y0 = std::min(y0, col[i]), y1 = std::max(y1, col[i]);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  auto X = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto Y = [&](double y) { return kTop + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
    os << "<text x=\"" << X(xv) << "\" y=\"" << kH - kBottom + 16 << "\" text-anchor=\"middle\">"
       << (log_x ? "1e" + fmt(xv) : fmt(xv)) << "</text>\n";
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << Y(yv) + 4 << "\" text-anchor=\"end\">" << fmt(yv)
       << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">"
     << escape(x_column) << "</text>\n";
  if (y0 < 0.0 && y1 > 0.0) {
    os << "<line x1=\"" << kLeft << "\" y1=\"" << Y(0) << "\" x2=\"" << kLeft + pw << "\" y2=\"" << Y(0)
       << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t k = 0; k < ys.size(); ++k) {
    const char* color = kColors[k % 6];
    std::ostringstream pts;
    auto flush = [&] {
      if (pts.tellp() > 0) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str()
           << "\"/>\n";
      }
      pts.str("");
      pts.clear();
    };
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (std::isfinite(xs[i]) && std::isfinite(ys[k][i])) {
        pts << X(xs[i]) << ',' << Y(ys[k][i]) << ' ';
      } else {
        flush();
      }
    }
    flush();
    os << "<text x=\"" << kLeft + 10 << "\" y=\"" << kTop + 16 + 14 * static_cast<double>(k) << "\" fill=\""
       << color << "\">" << escape(y_columns[k]) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace wplap
