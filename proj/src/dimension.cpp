#include "graphstab/dimension.hpp"

#include <cmath>
#include <numbers>

namespace gs {

double unit_sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

Constants Constants::at(Dimension d) {
  const int n = d.n();
  Constants c;
  c.omega = unit_sphere_area(n);
  c.c_n = 2.0 * (n - 1) * c.omega;
  c.beta = c.omega / n;
  return c;
}

}  // namespace gs
