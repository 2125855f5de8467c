#include "geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mobeval {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string("non-finite box coordinate ") + name);
  }
}

}  // namespace

BBox::BBox(double xmin, double ymin, double xmax, double ymax)
    : xmin(xmin), ymin(ymin), xmax(xmax), ymax(ymax) {
  require_finite(xmin, "xmin");
  require_finite(ymin, "ymin");
  require_finite(xmax, "xmax");
  require_finite(ymax, "ymax");
  if (xmin >= xmax || ymin >= ymax) {
    throw std::invalid_argument(
        "degenerate box: (" + std::to_string(xmin) + ", " + std::to_string(ymin) +
        ", " + std::to_string(xmax) + ", " + std::to_string(ymax) + ")");
  }
}

double area(const BBox& b) { return b.area(); }

double intersection_area(const BBox& a, const BBox& b) {
  const double w = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double h = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  return inter / (a.area() + b.area() - inter);
}

double jaccard_distance(const BBox& a, const BBox& b) { return 1.0 - iou(a, b); }

DistanceMatrix distance_matrix(std::span<const BBox> boxes) {
  if (boxes.empty()) throw std::invalid_argument("no boxes");
  DistanceMatrix m;
  m.n = boxes.size();
  m.entries.assign(m.n * m.n, 0.0);
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t k = i + 1; k < m.n; ++k) {
      const double d = jaccard_distance(boxes[i], boxes[k]);
      m.entries[i * m.n + k] = d;
      m.entries[k * m.n + i] = d;
    }
  }
  return m;
}

BBox enclose(std::span<const BBox> boxes) {
  if (boxes.empty()) throw std::invalid_argument("no boxes");
  double xmin = boxes[0].xmin;
  double ymin = boxes[0].ymin;
  double xmax = boxes[0].xmax;
  double ymax = boxes[0].ymax;
  for (const BBox& b : boxes.subspan(1)) {
    xmin = std::min(xmin, b.xmin);
    ymin = std::min(ymin, b.ymin);
    xmax = std::max(xmax, b.xmax);
    ymax = std::max(ymax, b.ymax);
  }
  return BBox(xmin, ymin, xmax, ymax);
}

double max_pred_width(double epsilon, double avg_width) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("unbounded width: iou threshold must be positive");
  }
  if (epsilon > 1.0) {
    throw std::invalid_argument("iou threshold above 1");
  }
  if (!(avg_width > 0.0)) {
    throw std::invalid_argument("average width must be positive");
  }
  return avg_width / std::sqrt(epsilon);
}

double max_tp_area_width(double epsilon, double avg_width) {
  return 2.0 * max_pred_width(epsilon, avg_width) - avg_width;
}

double pixels_to_ground(double pixel_width, double meters_per_pixel) {
  if (pixel_width < 0.0) throw std::invalid_argument("negative pixel width");
  if (!(meters_per_pixel > 0.0)) {
    throw std::invalid_argument("ground resolution must be positive");
  }
  return pixel_width * meters_per_pixel;
}

}  // namespace mobeval
