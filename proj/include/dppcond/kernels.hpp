#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dppcond/core.hpp"
#include "dppcond/orthopoly.hpp"

namespace dppcond {

/// Symmetric kernel of a projection operator on L2(U, Leb).
class Kernel {
 public:
  virtual ~Kernel() = default;

  virtual double operator()(double x, double y) const = 0;
  virtual double diagonal(double x) const { return (*this)(x, x); }
  /// Open domain U.
  virtual Interval domain() const = 0;
  virtual std::string label() const = 0;

  /// log(rho(p) / rho(q)) when a closed form is known.
  virtual std::optional<double> log_rho_ratio(double /*p*/, double /*q*/) const { return std::nullopt; }
  /// Kernel of the form (A(x)B(y) - B(x)A(y)) / (x - y); metadata, not checked.
  virtual bool integrable_form() const { return false; }
  /// Pi(x, x) = Pi(-x, -x).
  virtual bool even_diagonal() const { return false; }

  /// Matrix [K(x_i, y_j)].
  virtual Eigen::MatrixXd cross(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  Eigen::MatrixXd gram(const Eigen::VectorXd& x) const { return cross(x, x); }

  /// (d/dx, d/dy) K(x, y); central differences unless overridden.
  virtual Eigen::Vector2d gradient(double x, double y) const;
  /// Hessian of K in (x, y).
  virtual Eigen::Matrix2d hessian(double x, double y) const;

  bool in_domain(double x) const { return domain().contains_open(x); }
};

using KernelPtr = std::shared_ptr<const Kernel>;

/// Kernels with (A(x)B(y) - B(x)A(y)) / (x - y) structure get a vectorised cross().
class IntegrableKernel : public Kernel {
 public:
  double operator()(double x, double y) const override;
  bool integrable_form() const override { return true; }
  Eigen::MatrixXd cross(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override;

  /// (A(x), B(x)).
  virtual Eigen::Vector2d ab(double x) const = 0;
  /// |x - y| below this uses the diagonal at the midpoint.
  double confluent_threshold(double x) const { return 1e-6 * (1.0 + std::abs(x)); }
};

class SineKernel final : public IntegrableKernel {
 public:
  double operator()(double x, double y) const override;
  double diagonal(double) const override { return 1.0; }
  Interval domain() const override { return real_line(); }
  std::string label() const override { return "sine"; }
  std::optional<double> log_rho_ratio(double, double) const override { return 0.0; }
  bool even_diagonal() const override { return true; }
  Eigen::Vector2d ab(double x) const override;
  Eigen::Vector2d gradient(double x, double y) const override;
  Eigen::Matrix2d hessian(double x, double y) const override;
};

struct BesselKernelParams {
  double s = 0.0;
};

class BesselKernel final : public IntegrableKernel {
 public:
  explicit BesselKernel(BesselKernelParams params);

  double diagonal(double x) const override;
  Interval domain() const override { return {0.0, std::numeric_limits<double>::infinity()}; }
  std::string label() const override;
  std::optional<double> log_rho_ratio(double p, double q) const override;
  Eigen::Vector2d ab(double x) const override;

  double order() const { return params_.s; }

 private:
  BesselKernelParams params_;
};

/// Weighted Christoffel-Darboux kernel; rho is the classical weight.
class CDProjectionKernel final : public Kernel {
 public:
  explicit CDProjectionKernel(CDKernel kernel) : kernel_(std::move(kernel)) {}

  double operator()(double x, double y) const override { return kernel_(x, y); }
  double diagonal(double x) const override { return kernel_.diagonal(x); }
  Interval domain() const override { return kernel_.family().support(); }
  std::string label() const override;
  std::optional<double> log_rho_ratio(double p, double q) const override;
  bool even_diagonal() const override { return kernel_.family().kind() == PolyKind::Hermite; }

  const CDKernel& cd() const { return kernel_; }

 private:
  CDKernel kernel_;
};

/// A scaled CD kernel as a projection kernel on the preimage domain; rho = weight at the mapped point.
class ScaledProjectionKernel final : public Kernel {
 public:
  explicit ScaledProjectionKernel(ScaledKernel kernel) : kernel_(std::move(kernel)) {}

  double operator()(double x, double y) const override { return kernel_(x, y); }
  double diagonal(double x) const override { return kernel_.diagonal(x); }
  Interval domain() const override { return kernel_.domain(); }
  std::string label() const override { return kernel_.label(); }
  std::optional<double> log_rho_ratio(double p, double q) const override;
  bool even_diagonal() const override { return kernel_.base().family().kind() == PolyKind::Hermite; }

 private:
  ScaledKernel kernel_;
};

KernelPtr make_sine_kernel();
KernelPtr make_bessel_kernel(double s);
KernelPtr make_cd_kernel(const OrthoPolyFamily& family, int n);
KernelPtr make_scaled_kernel(ScaledKernel kernel);

double sine_eval(double x, double y);
double bessel_kernel_eval(const BesselKernelParams& params, double x, double y);

/// max |J_s(x,y) - J_{s+2}(x,y) - (s+1)/sqrt(xy) J_{s+1}(sqrt x) J_{s+1}(sqrt y)| over the grid.
double bessel_recurrence_check(double s, const std::vector<std::pair<double, double>>& grid);

/// Finite simple configuration: sorted, distinct points inside a closed window.
class Configuration {
 public:
  Configuration() = default;
  Configuration(std::vector<double> points, Interval window);

  const std::vector<double>& points() const { return points_; }
  Interval window() const { return window_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  std::size_t count_in(Interval set) const;
  /// Points inside `set`, window `set`.
  Configuration restricted(Interval set) const;
  /// Points outside `set`, same window.
  Configuration outside(Interval set) const;
  Configuration with_added(const std::vector<double>& extra) const;

 private:
  std::vector<double> points_;
  Interval window_{};
};

/// det[K(p_i, p_j)]; exactly 0 when a point repeats.
double correlation_function(const Kernel& kernel, const std::vector<double>& points);

/// Palm kernel at q_1..q_l: K(x,y) - k(x)^T G^{-1} k(y), G = [K(q_i, q_j)].
/// Equal to the iterated rank-one update at each conditioning point.
class PalmReducedKernel final : public Kernel {
 public:
  PalmReducedKernel(KernelPtr base, std::vector<double> points);

  double operator()(double x, double y) const override;
  double diagonal(double x) const override { return (*this)(x, x); }
  Interval domain() const override { return base_->domain(); }
  std::string label() const override;
  bool integrable_form() const override { return base_->integrable_form(); }
  Eigen::MatrixXd cross(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override;

  const Kernel& base() const { return *base_; }
  const std::vector<double>& conditioning_points() const { return points_; }

 private:
  Eigen::VectorXd column(double x) const;

  KernelPtr base_;
  std::vector<double> points_;
  Eigen::VectorXd q_;
  Eigen::LLT<Eigen::MatrixXd> gram_;
};

std::shared_ptr<const PalmReducedKernel> palm_reduce(KernelPtr kernel, const std::vector<double>& points);

struct AssumptionReport {
  double trace_integral = 0.0;  ///< windowed integral of Pi(x,x) / (1 + |x|)
  double key_integral = 0.0;    ///< windowed integral of Pi(x,x) / (1 + x^2)
  double growth_exponent = 0.0; ///< slope of log Pi(x,x) against log(1 + |x|)
  bool trace_condition = false; ///< diagonal decays: the first integral plausibly converges
  bool trace_divergent = false;
  bool key_condition = false;   ///< diagonal grows slower than |x|
  bool growth_below_half = false;
};

/// Windowed diagnostics of the integrability assumptions. The growth fit uses the outer part
/// of the window, |x| >= tail_exponent_probe * max|window|; probe <= 0 fits the whole window.
AssumptionReport assumption_diagnostics(const Kernel& kernel, Interval window, double tail_exponent_probe);

}  // namespace dppcond
