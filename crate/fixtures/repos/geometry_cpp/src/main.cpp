#include <iostream>

#include "geometry.hpp"

using namespace geo;

static Shape* make_shape(double r) {
  // new Circle(r) would leak; see below
  return new Circle(r);
}

int main() {
  Point a{0.0, 0.0};
  Point b{3.0, 4.0};
  std::cout << geo::distance(a, b) << "\n";
  Shape* s = make_shape(2.0);
  std::cout << s->area() << std::endl;
  delete s;
  return 0;
}
