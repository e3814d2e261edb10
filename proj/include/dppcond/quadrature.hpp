#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "dppcond/core.hpp"

namespace dppcond {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return nodes.size(); }

  template <typename F>
  double apply(F&& f) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

/// Golub-Welsch: nodes and weights from the symmetric Jacobi matrix of an
/// orthonormal recurrence x p_k = off[k+1] p_{k+1} + diag[k] p_k + off[k] p_{k-1}.
/// `off` has size n-1 (off[0] couples p_0 and p_1); `mass` is the total weight.
QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double mass);

QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);
/// Weight exp(-x^2) on the real line.
QuadratureRule gauss_hermite(int n);
/// Weight (1-x)^alpha (1+x)^beta on [-1, 1].
QuadratureRule gauss_jacobi(int n, double alpha, double beta);

/// Composite Gauss-Legendre rule with `per_cell` nodes on each cell [breaks[i], breaks[i+1]].
QuadratureRule composite_gauss_legendre(const std::vector<double>& breaks, int per_cell);

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

/// Adaptive bisection with 10/20-point Gauss-Legendre error estimates on a finite interval.
IntegrationResult integrate(const std::function<double(double)>& f, double a, double b,
                            double abs_tol = 1e-11, double rel_tol = 1e-10, int max_depth = 40);

/// Integral over [a, +inf), a > 0, through x = a / tau^2. The integrand must decay faster than 1/x.
IntegrationResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                        double abs_tol = 1e-11, double rel_tol = 1e-10);

/// Integral over an arbitrary interval; infinite ends are split off at +-max(1, |finite end|).
IntegrationResult integrate(const std::function<double(double)>& f, Interval range,
                            double abs_tol = 1e-11, double rel_tol = 1e-10);

/// Barycentric Chebyshev interpolant of a smooth function on a compact interval.
class ChebyshevInterpolant {
 public:
  ChebyshevInterpolant() = default;
  ChebyshevInterpolant(const std::function<double(double)>& f, Interval range, int nodes = 12);

  double operator()(double x) const;
  bool empty() const { return values_.size() == 0; }

 private:
  Eigen::VectorXd nodes_;
  Eigen::VectorXd values_;
  Eigen::VectorXd bary_;
};

}  // namespace dppcond
