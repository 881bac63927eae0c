#pragma once

#include <filesystem>
#include <vector>

#include "ieg/core.hpp"

namespace ieg {

struct EdgePoint {
  double x = 0.0;  // pixel column
  double y = 0.0;  // pixel row
  double gx = 0.0;
  double gy = 0.0;
};

// The known tracking target. Pixel (x, y) sits at pattern-frame coordinate
// (x - cx, y - cy) where (cx, cy) is the image center.
class Pattern {
 public:
  static constexpr double kDefaultEdgeThreshold = 0.1;

  // `intensity` is row-major, values in [0, 1].
  Pattern(int width, int height, std::vector<double> intensity,
          double edge_threshold = kDefaultEdgeThreshold);

  int width() const { return width_; }
  int height() const { return height_; }
  double edge_threshold() const { return edge_threshold_; }
  Point2 center() const { return {(width_ - 1) / 2.0, (height_ - 1) / 2.0}; }

  double intensity(int x, int y) const { return intensity_[index(x, y)]; }
  Point2 gradient(int x, int y) const { return {grad_x_[index(x, y)], grad_y_[index(x, y)]}; }
  const std::vector<double>& intensity() const { return intensity_; }
  const std::vector<EdgePoint>& edges() const { return edges_; }

  Point2 to_pattern_frame(double x, double y) const {
    const Point2 c = center();
    return {x - c.x, y - c.y};
  }

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  double edge_threshold_;
  std::vector<double> intensity_;
  std::vector<double> grad_x_;
  std::vector<double> grad_y_;
  std::vector<EdgePoint> edges_;
};

// Binary PGM (P5, 8-bit) or PNG (8-bit gray, or color converted to luma).
Pattern load_pattern(const std::filesystem::path& path,
                     double edge_threshold = Pattern::kDefaultEdgeThreshold);

void write_pgm(const Pattern& pattern, const std::filesystem::path& path);

// Built-in AR-marker-like target: a dark square ring with a bright inner
// window on a bright background. Parallel edges are 16 px apart at size 64.
Pattern make_marker_pattern(int size = 64);

}  // namespace ieg
