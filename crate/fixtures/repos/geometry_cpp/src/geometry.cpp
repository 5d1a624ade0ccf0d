#include "geometry.hpp"

#include <cmath>

namespace geo {

double distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

class Circle : public Shape {
 public:
  explicit Circle(double r) : r_(r) {}
  double area() const override { return 3.14159 * r_ * r_; }

 private:
  double r_;
};

double perimeter(const Point* pts, int n) {
  double total = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    total += distance(pts[i], pts[i + 1]);
  }
  return total;
}

}  // namespace geo
