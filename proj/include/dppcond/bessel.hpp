#pragma once

namespace dppcond {

/// Bessel function of the first kind J_nu(x) for x >= 0 and nu > -2.
/// Negative orders are reached from nonnegative ones by the downward recurrence in nu.
double bessel_j(double nu, double x);

}  // namespace dppcond
