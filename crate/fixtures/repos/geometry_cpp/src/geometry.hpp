#pragma once

namespace geo {

struct Point {
  double x;
  double y;
};

class Shape {
 public:
  virtual double area() const = 0;
};

double distance(const Point& a, const Point& b);

}  // namespace geo
