#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dppcond/kernels.hpp"
#include "dppcond/quadrature.hpp"
#include "dppcond/sampler.hpp"

namespace dppcond {

/// Regularizer lambda with sup |x^2 lambda(x) - x| < inf.
class LambdaRegularizer {
 public:
  /// lambda = 0, the trace-class case.
  static LambdaRegularizer zero();
  /// lambda_0(x) = x / (x^2 + 1).
  static LambdaRegularizer rational();
  /// Piecewise-linear through (x_i, y_i), continued by 1/x outside the table.
  static LambdaRegularizer table(std::vector<double> x, std::vector<double> y);
  static LambdaRegularizer custom(std::function<double(double)> f, std::string label, bool odd = false);

  double operator()(double x) const { return f_(x); }
  bool is_zero() const { return zero_; }
  bool is_odd() const { return odd_; }
  const std::string& label() const { return label_; }

  /// sup of |x^2 lambda(x) - x| over a logarithmic grid reaching |x| = 1e6.
  double admissibility_bound() const;

 private:
  LambdaRegularizer(std::function<double(double)> f, std::string label, bool odd, bool zero)
      : f_(std::move(f)), label_(std::move(label)), odd_(odd), zero_(zero) {}

  std::function<double(double)> f_;
  std::string label_;
  bool odd_;
  bool zero_;
};

struct FunctionalEstimate {
  double log_value = 0.0;
  double radius = 0.0;
  double compensator = 0.0;
  Interval window{};

  double value() const { return std::exp(log_value); }
};

/// sum over particles with |x| <= R of 2 (log|x - p| - log|x - q|).
double psi_truncated(double p, double q, const Configuration& x, double radius);

/// 2 (p - q) times the integral of Pi(x,x) lambda(x) over [-R, R] within the domain.
double compensator(const Kernel& kernel, const LambdaRegularizer& lambda, double p, double q, double radius);

FunctionalEstimate psi_regularized(const Kernel& kernel, const LambdaRegularizer& lambda, double p, double q,
                                   const Configuration& x, double radius);

/// Base log-value plus the factors of extra particles t_i.
double particle_split_eval(const FunctionalEstimate& base, const std::vector<double>& extra, double p, double q);

struct BetaEstimate {
  double value = 0.0;         ///< window integral plus tail
  double window_value = 0.0;  ///< integral over the window only
  double tail = 0.0;
  double error = 0.0;
};

/// Integral of (lambda1 - lambda2) Pi(x,x) over the window, with a tail from a power-law fit of the diagonal.
BetaEstimate beta_constant(const Kernel& kernel, const LambdaRegularizer& lambda1, const LambdaRegularizer& lambda2,
                           Interval window);

/// Mean-field estimate of the factors of log Psi lost beyond the truncation window:
/// tail(a, b) = integral over U \ inner of 2 log|(x - a)/(x - b)| D(x) + 2 (a - b) lambda(x) Pi(x,x) dx,
/// with D the density of the sampled process. Tabulated in a, b over `range`.
class TailModel {
 public:
  TailModel() = default;
  TailModel(const Kernel& density, const Kernel& base, const LambdaRegularizer& lambda, Interval inner, Interval range);

  double operator()(double a, double b) const;
  bool empty() const { return interp_.empty(); }

 private:
  double anchor_ = 0.0;
  ChebyshevInterpolant interp_;
};

/// One-shot evaluation of the tail integral (no tabulation).
double tail_correction(const Kernel& density, const Kernel& base, const LambdaRegularizer& lambda, double a, double b,
                       Interval inner);

/// Truncation radii R_1 < R_2 < ...
struct TruncationSchedule {
  std::vector<double> radii;

  /// R_n proportional to n^4, n = 1..count, with R_count = max_radius.
  static TruncationSchedule quartic(int count, double max_radius);
  static TruncationSchedule explicit_radii(std::vector<double> radii);
};

struct VarianceScan {
  std::vector<std::pair<double, double>> points;  ///< (R, sample variance)
  std::vector<double> means;                      ///< sample mean per radius
  double slope = 0.0;
  std::size_t samples = 0;
};

/// Sample mean and variance of the tail 2 sum_{x in X, |x| >= R} (log|x - p| - log|x - q|) of log Psi, per radius,
/// and the least-squares slope of log variance against log R.
VarianceScan variance_scan(const std::vector<Configuration>& samples, double p, double q,
                           const TruncationSchedule& schedule);

/// Draws cfg.streams * cfg.chain_length samples from the discretized kernel, then scans.
VarianceScan variance_scan(const DiscretizedKernel& dk, double p, double q, const TruncationSchedule& schedule,
                           const SamplerConfig& cfg);

}  // namespace dppcond
