#pragma once

#include <string>
#include <utility>
#include <vector>

namespace sympflow {

// Minimal self-contained SVG chart writer for the experiment artifacts:
// polyline series (solid or dashed), scatter series, free segments
// (dashed sample connectors), axes with ticks, and a legend. Data
// coordinates map linearly (optionally log10 in y) into a fixed viewport.
class SvgPlot {
 public:
  SvgPlot(int width, int height, std::string title);

  void set_axis_labels(std::string x_label, std::string y_label);
  // Fixes the data range; otherwise it is fitted to the added data.
  void set_range(double x_lo, double x_hi, double y_lo, double y_hi);
  void set_log_y(bool log_y);

  using Point = std::pair<double, double>;

  void add_line(std::vector<Point> pts, std::string color, double stroke_width,
                bool dashed = false, std::string label = "");
  void add_scatter(std::vector<Point> pts, std::string color, double radius,
                   std::string label = "");
  // Independent segments, one per pair; always dashed.
  void add_segments(std::vector<std::pair<Point, Point>> segs, std::string color,
                    double stroke_width);

  std::string render() const;
  void save(const std::string& path) const;

 private:
  struct Series {
    enum class Type { Line, DashedLine, Scatter, Segments } type;
    std::vector<Point> pts;        // for Segments: flattened pairs
    std::string color;
    double size = 1.0;             // stroke width or dot radius
    std::string label;
  };

  int width_;
  int height_;
  std::string title_;
  std::string x_label_, y_label_;
  bool has_range_ = false;
  bool log_y_ = false;
  double x_lo_ = 0, x_hi_ = 1, y_lo_ = 0, y_hi_ = 1;
  std::vector<Series> series_;
};

}  // namespace sympflow
