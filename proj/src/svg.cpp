#include "sympflow/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sympflow {

namespace {

constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 18.0;
constexpr double kMarginTop = 34.0;
constexpr double kMarginBottom = 46.0;
constexpr int kTicks = 5;

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

SvgPlot::SvgPlot(int width, int height, std::string title)
    : width_(width), height_(height), title_(std::move(title)) {
  if (width_ < 100 || height_ < 100) throw std::invalid_argument("SvgPlot: viewport too small");
}

void SvgPlot::set_axis_labels(std::string x_label, std::string y_label) {
  x_label_ = std::move(x_label);
  y_label_ = std::move(y_label);
}

void SvgPlot::set_range(double x_lo, double x_hi, double y_lo, double y_hi) {
  if (!(x_lo < x_hi) || !(y_lo < y_hi)) throw std::invalid_argument("SvgPlot: empty range");
  x_lo_ = x_lo;
  x_hi_ = x_hi;
  y_lo_ = y_lo;
  y_hi_ = y_hi;
  has_range_ = true;
}

void SvgPlot::set_log_y(bool log_y) { log_y_ = log_y; }

void SvgPlot::add_line(std::vector<Point> pts, std::string color, double stroke_width,
                       bool dashed, std::string label) {
  series_.push_back({dashed ? Series::Type::DashedLine : Series::Type::Line, std::move(pts),
                     std::move(color), stroke_width, std::move(label)});
}

void SvgPlot::add_scatter(std::vector<Point> pts, std::string color, double radius,
                          std::string label) {
  series_.push_back(
      {Series::Type::Scatter, std::move(pts), std::move(color), radius, std::move(label)});
}

void SvgPlot::add_segments(std::vector<std::pair<Point, Point>> segs, std::string color,
                           double stroke_width) {
  Series s;
  s.type = Series::Type::Segments;
  for (const auto& [a, b] : segs) {
    s.pts.push_back(a);
    s.pts.push_back(b);
  }
  s.color = std::move(color);
  s.size = stroke_width;
  series_.push_back(std::move(s));
}

std::string SvgPlot::render() const {
  // Resolve the data range.
  double xlo = x_lo_, xhi = x_hi_, ylo = y_lo_, yhi = y_hi_;
  const auto ty = [&](double y) {
    if (!log_y_) return y;
    return std::log10(std::max(y, 1e-300));
  };
  if (!has_range_) {
    xlo = ylo = std::numeric_limits<double>::infinity();
    xhi = yhi = -std::numeric_limits<double>::infinity();
    for (const Series& s : series_) {
      for (const auto& [x, y] : s.pts) {
        xlo = std::min(xlo, x);
        xhi = std::max(xhi, x);
        ylo = std::min(ylo, ty(y));
        yhi = std::max(yhi, ty(y));
      }
    }
    if (!(xlo < xhi)) {
      xlo -= 0.5;
      xhi += 0.5;
    }
    if (!(ylo < yhi)) {
      ylo -= 0.5;
      yhi += 0.5;
    }
    const double px = 0.05 * (xhi - xlo), py = 0.05 * (yhi - ylo);
    xlo -= px;
    xhi += px;
    ylo -= py;
    yhi += py;
  } else if (log_y_) {
    ylo = ty(y_lo_);
    yhi = ty(y_hi_);
  }

  const double pw = width_ - kMarginLeft - kMarginRight;
  const double ph = height_ - kMarginTop - kMarginBottom;
  const auto sx = [&](double x) { return kMarginLeft + (x - xlo) / (xhi - xlo) * pw; };
  const auto sy = [&](double y) { return kMarginTop + (1.0 - (ty(y) - ylo) / (yhi - ylo)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
    << height_ << "\" viewBox=\"0 0 " << width_ << ' ' << height_ << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << width_ / 2.0 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
    << escape(title_) << "</text>\n";

  // Axes frame and ticks.
  o << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\"" << pw
    << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  for (int i = 0; i < kTicks; ++i) {
    const double fx = xlo + (xhi - xlo) * i / (kTicks - 1);
    const double gx = sx(fx);
    o << "<line x1=\"" << gx << "\" y1=\"" << kMarginTop + ph << "\" x2=\"" << gx << "\" y2=\""
      << kMarginTop + ph + 5 << "\" stroke=\"#444\"/>\n";
    o << "<text x=\"" << gx << "\" y=\"" << kMarginTop + ph + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << num(fx)
      << "</text>\n";
    const double fy = ylo + (yhi - ylo) * i / (kTicks - 1);
    const double gy = kMarginTop + (1.0 - static_cast<double>(i) / (kTicks - 1)) * ph;
    o << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << gy << "\" x2=\"" << kMarginLeft
      << "\" y2=\"" << gy << "\" stroke=\"#444\"/>\n";
    const std::string ylab = log_y_ ? ("1e" + num(fy)) : num(fy);
    o << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << gy + 3
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << ylab
      << "</text>\n";
  }
  if (!x_label_.empty())
    o << "<text x=\"" << kMarginLeft + pw / 2 << "\" y=\"" << height_ - 8
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape(x_label_) << "</text>\n";
  if (!y_label_.empty())
    o << "<text x=\"14\" y=\"" << kMarginTop + ph / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 14 "
      << kMarginTop + ph / 2 << ")\">" << escape(y_label_) << "</text>\n";

  // Series, clipped to the frame.
  o << "<clipPath id=\"plot\"><rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop
    << "\" width=\"" << pw << "\" height=\"" << ph << "\"/></clipPath>\n";
  o << "<g clip-path=\"url(#plot)\">\n";
  for (const Series& s : series_) {
    switch (s.type) {
      case Series::Type::Line:
      case Series::Type::DashedLine: {
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"" << s.size
          << '"';
        if (s.type == Series::Type::DashedLine) o << " stroke-dasharray=\"5 4\"";
        o << " points=\"";
        for (const auto& [x, y] : s.pts) o << num(sx(x)) << ',' << num(sy(y)) << ' ';
        o << "\"/>\n";
        break;
      }
      case Series::Type::Scatter:
        for (const auto& [x, y] : s.pts)
          o << "<circle cx=\"" << num(sx(x)) << "\" cy=\"" << num(sy(y)) << "\" r=\"" << s.size
            << "\" fill=\"" << s.color << "\"/>\n";
        break;
      case Series::Type::Segments:
        for (std::size_t i = 0; i + 1 < s.pts.size(); i += 2)
          o << "<line x1=\"" << num(sx(s.pts[i].first)) << "\" y1=\"" << num(sy(s.pts[i].second))
            << "\" x2=\"" << num(sx(s.pts[i + 1].first)) << "\" y2=\""
            << num(sy(s.pts[i + 1].second)) << "\" stroke=\"" << s.color
            << "\" stroke-width=\"" << s.size << "\" stroke-dasharray=\"3 3\"/>\n";
        break;
    }
  }
  o << "</g>\n";

  // Legend for labeled series, top-right inside the frame.
  double ly = kMarginTop + 14;
  for (const Series& s : series_) {
    if (s.label.empty()) continue;
    const double lx = kMarginLeft + pw - 150;
    if (s.type == Series::Type::Scatter) {
      o << "<circle cx=\"" << lx + 12 << "\" cy=\"" << ly - 3 << "\" r=\"3\" fill=\"" << s.color
        << "\"/>\n";
    } else {
      o << "<line x1=\"" << lx << "\" y1=\"" << ly - 3 << "\" x2=\"" << lx + 24 << "\" y2=\""
        << ly - 3 << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
      if (s.type == Series::Type::DashedLine) o << " stroke-dasharray=\"5 4\"";
      o << "/>\n";
    }
    o << "<text x=\"" << lx + 30 << "\" y=\"" << ly
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label) << "</text>\n";
    ly += 16;
  }

  o << "</svg>\n";
  return o.str();
}

void SvgPlot::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write svg: " + path);
  out << render();
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace sympflow
