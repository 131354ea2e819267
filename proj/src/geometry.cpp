#include "hoiagent/geometry.hpp"

#include <algorithm>

namespace hoiagent {

bool valid_box(const BBox& b) {
  return b.x1 >= 0.0 && b.y1 >= 0.0 && b.x1 <= b.x2 && b.y1 <= b.y2;
}

double iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  const double inter = std::max(0.0, iw) * std::max(0.0, ih);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

}  // namespace hoiagent
