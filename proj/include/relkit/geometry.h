#ifndef RELKIT_GEOMETRY_H_
#define RELKIT_GEOMETRY_H_

#include "relkit/types.h"

namespace relkit {

// Intersection over union; 0 for disjoint boxes.
double iou(const Box &a, const Box &b);

// Smallest box containing both.
Box union_box(const Box &a, const Box &b);

}  // namespace relkit

#endif  // RELKIT_GEOMETRY_H_
