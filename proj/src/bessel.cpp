#include "dppcond/bessel.hpp"

#include <cmath>

#include "dppcond/core.hpp"

namespace dppcond {

double bessel_j(double nu, double x) {
  if (!(x >= 0.0)) throw DomainError("bessel_j: argument must be nonnegative");
  if (!(nu > -2.0)) throw DomainError("bessel_j: order must exceed -2");
  if (nu >= 0.0) return std::cyl_bessel_j(nu, x);
  if (x == 0.0) {
    // J_nu(0) for negative non-integer nu is infinite; for nu = -1 it is 0
    if (nu == -1.0) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  // J_{nu} = 2 (nu + 1) / x J_{nu+1} - J_{nu+2}
  if (nu >= -1.0) {
    return 2.0 * (nu + 1.0) / x * std::cyl_bessel_j(nu + 1.0, x) - std::cyl_bessel_j(nu + 2.0, x);
  }
  const double j1 = 2.0 * (nu + 2.0) / x * std::cyl_bessel_j(nu + 2.0, x) - std::cyl_bessel_j(nu + 3.0, x);
  return 2.0 * (nu + 1.0) / x * j1 - std::cyl_bessel_j(nu + 2.0, x);
}

}  // namespace dppcond
