#include "relkit/geometry.h"

#include <algorithm>

namespace relkit {

double iou(const Box &a, const Box &b) {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (a == b) return 1.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Box union_box(const Box &a, const Box &b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
          std::max(a.y2, b.y2)};
}

}  // namespace relkit
