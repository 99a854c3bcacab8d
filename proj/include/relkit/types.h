#ifndef RELKIT_TYPES_H_
#define RELKIT_TYPES_H_

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace relkit {

using Vec = std::vector<double>;

// A relationship type <object_1, predicate, object_2> as vocabulary indices.
struct Triple {
  int i = 0;  // subject category
  int k = 0;  // predicate
  int j = 0;  // object category

  auto operator<=>(const Triple &) const = default;
};

std::string to_string(const Triple &t);

// Axis-aligned box in pixel coordinates; valid boxes have x1 < x2, y1 < y2.
struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  bool valid() const { return x1 < x2 && y1 < y2; }

  bool operator==(const Box &) const = default;
  auto operator<=>(const Box &) const = default;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) acc += a[n] * b[n];
  return acc;
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t n = 0; n < x.size(); ++n) y[n] += alpha * x[n];
}

}  // namespace relkit

#endif  // RELKIT_TYPES_H_
