#pragma once

namespace hoiagent {

/// Axis-aligned box in original-image pixel coordinates, XYXY order.
/// Invariants: x1 <= x2, y1 <= y2, all coordinates >= 0. Zero-area boxes
/// are legal values.
struct BBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  bool operator==(const BBox&) const = default;
};

/// Returns true iff the coordinates satisfy the BBox invariants.
bool valid_box(const BBox& b);

/// Intersection-over-union of two boxes. Defined as 0 whenever the union
/// has zero area, so degenerate (zero-area) boxes score 0 against
/// anything, including themselves.
double iou(const BBox& a, const BBox& b);

}  // namespace hoiagent
