#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mobeval {

/// Axis-aligned box in continuous pixel coordinates. Area is
/// (xmax - xmin) * (ymax - ymin) with no +1 pixel correction; integer
/// annotation coordinates embed losslessly.
struct BBox {
  double xmin;
  double ymin;
  double xmax;
  double ymax;

  /// Throws std::invalid_argument for non-finite coordinates or a
  /// degenerate (zero or negative area) box.
  BBox(double xmin, double ymin, double xmax, double ymax);

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (xmin + xmax); }
  double center_y() const { return 0.5 * (ymin + ymax); }

  bool contains(const BBox& other) const {
    return xmin <= other.xmin && ymin <= other.ymin && xmax >= other.xmax &&
           ymax >= other.ymax;
  }

  bool operator==(const BBox&) const = default;
};

double area(const BBox& b);
double intersection_area(const BBox& a, const BBox& b);

/// Intersection over union. Boxes that are disjoint or touch only at an
/// edge or corner have IoU 0; identical boxes have IoU 1.
double iou(const BBox& a, const BBox& b);

/// 1 - iou(a, b).
double jaccard_distance(const BBox& a, const BBox& b);

/// Symmetric pairwise Jaccard distance matrix with zero diagonal.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> entries;  // row-major, n*n

  double at(std::size_t i, std::size_t k) const { return entries[i * n + k]; }
};

/// Throws std::invalid_argument on empty input ("no boxes").
DistanceMatrix distance_matrix(std::span<const BBox> boxes);

/// Smallest axis-aligned box containing every input box: component-wise
/// minimum of minima and maximum of maxima.
/// Throws std::invalid_argument on empty input ("no boxes").
BBox enclose(std::span<const BBox> boxes);

/// Largest prediction box width that can still reach IoU `epsilon` against
/// a ground-truth box of width `avg_width` fully contained in it:
/// avg_width / sqrt(epsilon).
/// Throws std::invalid_argument when epsilon is not in (0, 1] (epsilon 0
/// would make the width unbounded) or avg_width is not positive.
double max_pred_width(double epsilon, double avg_width);

/// Width of the square region a maximum-sized unity-aspect prediction may
/// occupy around the ground truth: 2 * max_pred_width - avg_width.
double max_tp_area_width(double epsilon, double avg_width);

/// Converts a pixel width to ground meters given a meters-per-pixel
/// resolution.
double pixels_to_ground(double pixel_width, double meters_per_pixel);

}  // namespace mobeval
