#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dppcond/core.hpp"
#include "dppcond/quadrature.hpp"

namespace dppcond {

enum class PolyKind { Hermite, Jacobi };

/// Classical family used for Christoffel-Darboux kernels.
///
/// Hermite uses the physicists' convention, weight exp(-x^2) on the line.
/// Jacobi is the one-parameter family with weight (1-u)^s on [-1, 1], s > -1.
class OrthoPolyFamily {
 public:
  static OrthoPolyFamily hermite();
  static OrthoPolyFamily jacobi(double s);

  PolyKind kind() const { return kind_; }
  double exponent() const { return s_; }
  Interval support() const;
  std::string label() const;

  double weight(double x) const;
  double log_weight(double x) const;
  /// Total mass of the weight.
  double mass() const;

  /// Standard normalization: P_{k+1} = (a x + b) P_k - c P_{k-1}.
  struct StandardStep {
    double a, b, c;
  };
  StandardStep standard_step(int k) const;
  /// Integral of P_k^2 against the weight.
  double standard_norm_squared(int k) const;

  /// Orthonormal recurrence x p_k = offdiag(k+1) p_{k+1} + diag(k) p_k + offdiag(k) p_{k-1}.
  double recurrence_diag(int k) const;
  double recurrence_offdiag(int k) const;

  QuadratureRule gauss_rule(int n) const;

 private:
  OrthoPolyFamily(PolyKind kind, double s) : kind_(kind), s_(s) {}

  PolyKind kind_;
  double s_;
};

/// Degree-`degree` member in the standard normalization (H_n, P_n^{(s,0)}).
template <typename Scalar>
Scalar poly_eval(const OrthoPolyFamily& family, int degree, Scalar x) {
  if (degree < 0) throw DomainError("poly_eval: negative degree");
  Scalar prev(0);
  Scalar cur(1);
  for (int k = 0; k < degree; ++k) {
    const auto step = family.standard_step(k);
    Scalar next = (Scalar(step.a) * x + Scalar(step.b)) * cur - Scalar(step.c) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// phi_0..phi_{n-1} at x: orthonormal polynomials times sqrt(weight).
Eigen::VectorXd orthonormal_functions(const OrthoPolyFamily& family, int n, double x);

/// Weighted n-th Christoffel-Darboux kernel sum_{j<n} phi_j(x) phi_j(y).
/// The weight is folded in, so the induced point process lives on Lebesgue measure.
class CDKernel {
 public:
  CDKernel(OrthoPolyFamily family, int n);

  /// Christoffel-Darboux summation formula; confluent form near the diagonal.
  double operator()(double x, double y) const;
  double diagonal(double x) const;
  double direct_sum(double x, double y) const;

  const OrthoPolyFamily& family() const { return family_; }
  int degree() const { return n_; }

 private:
  OrthoPolyFamily family_;
  int n_;
};

/// max |K^(s)_n - c P^(s+1)_{n-1} (1-u)^{s/2} P^(s+1)_{n-1} (1-u)^{s/2} - K^(s+2)_{n-1}| over the grid,
/// c = (s+1)/2^{s+1}.
double jacobi_cd_recurrence_check(int n, double s, const std::vector<std::pair<double, double>>& grid);

/// A CD kernel seen through an affine change of variables u = offset + slope x,
/// K(x, y) = |slope| K_base(u(x), u(y)).
class ScaledKernel {
 public:
  /// Bulk scaling of the Hermite kernel: slope = pi / sqrt(2n), so that K(x,x) -> 1 at the origin.
  static ScaledKernel hermite_bulk(int n);
  /// Hard-edge scaling u = 1 - x / (2 n^2) of the Jacobi kernel.
  static ScaledKernel jacobi_hard_edge(int n, double s);

  double operator()(double x, double y) const;
  double diagonal(double x) const;

  double to_base(double x) const { return offset_ + slope_ * x; }
  /// 1 - u(x) computed without cancellation near the edge.
  double edge_gap(double x) const { return (1.0 - offset_) - slope_ * x; }
  double jacobian() const { return std::abs(slope_); }
  /// Preimage of the open support of the base family.
  Interval domain() const;
  const CDKernel& base() const { return base_; }
  std::string label() const;

 private:
  ScaledKernel(CDKernel base, double offset, double slope) : base_(std::move(base)), offset_(offset), slope_(slope) {}
  void check(double x) const;

  CDKernel base_;
  double offset_;
  double slope_;
};

}  // namespace dppcond
