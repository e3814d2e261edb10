#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dppcond/functionals.hpp"
#include "dppcond/kernels.hpp"
#include "dppcond/orthopoly.hpp"
#include "dppcond/sampler.hpp"

namespace dppcond {

/// Compact I, the configuration outside it, and the number of particles inside.
struct WindowCondition {
  Interval interval;
  Configuration outside;
  int inside_count = 0;

  static WindowCondition from(const Configuration& x, Interval interval);
};

struct ConditionalOptions {
  /// Truncation radius of the product over the outside configuration.
  double radius = std::numeric_limits<double>::infinity();
  /// Mean-field estimate of the factors lost beyond the truncation window.
  const TailModel* tail = nullptr;
};

/// log rho_{I,X}(p) - log rho_{I,X}(q0) on I.
class ConditionalWeight {
 public:
  ConditionalWeight(KernelPtr kernel, const LambdaRegularizer& lambda, const WindowCondition& cond, double q0,
                    const ConditionalOptions& opt = {});

  double log_ratio(double p) const;
  double ratio(double p, double q) const { return std::exp(log_ratio(p) - log_ratio(q)); }

  Interval interval() const { return interval_; }
  double reference() const { return q0_; }
  double radius() const { return radius_; }
  const std::string& lambda_label() const { return lambda_label_; }

 private:
  KernelPtr kernel_;
  Interval interval_;
  double q0_;
  double radius_;
  double slope_ = 0.0;  ///< compensator per unit of p - q0
  std::vector<double> outside_;
  std::string lambda_label_;
  const TailModel* tail_ = nullptr;
};

ConditionalWeight conditional_weight(KernelPtr kernel, const LambdaRegularizer& lambda, const WindowCondition& cond,
                                     double q0, const ConditionalOptions& opt = {});

/// OPE on I with l points and per-point log weight given by the conditional weight.
OPESpec conditional_density(const ConditionalWeight& cw, int l);

/// Exact finite-n comparison: differences of the full ensemble log density between inside tuples
/// against the same differences from the conditional OPE with weight w(t) prod_out (x - t)^2.
double finite_n_conditional_check(const OrthoPolyFamily& family, int n, Interval interval,
                                  const std::vector<double>& outside,
                                  const std::vector<std::vector<double>>& inside_tuples);

/// Translation of finitely many disjoint intervals, identity elsewhere.
class PiecewiseIsometry {
 public:
  struct Piece {
    Interval source;  ///< half-open [lo, hi)
    double shift = 0.0;
  };

  PiecewiseIsometry() = default;
  explicit PiecewiseIsometry(std::vector<Piece> pieces);
  /// Swaps two disjoint intervals of equal length.
  static PiecewiseIsometry exchange(Interval a, Interval b);

  double operator()(double x) const;
  Configuration operator()(const Configuration& x) const;
  /// Hull of the moved region.
  Interval support() const;
  bool is_identity() const { return pieces_.empty(); }
  bool maps_grid(const Eigen::VectorXd& grid, double tol = 1e-9) const;
  const std::vector<Piece>& pieces() const { return pieces_; }

 private:
  std::vector<Piece> pieces_;
};

/// log dP o T / dP at X: Vandermonde, rho and Psi factors of the particles in the support of T.
double log_qi_rn(const Kernel& kernel, const LambdaRegularizer& lambda, const PiecewiseIsometry& t,
                 const Configuration& x, double radius, const TailModel* tail = nullptr);

struct Statistic {
  std::string name;
  std::function<double(const Configuration&)> f;
};

struct QIStatisticReport {
  std::string name;
  double pushforward_mean = 0.0;  ///< E[f(T X)]
  double reweighted_mean = 0.0;   ///< E[f(X) RN(X)]
  double std_error = 0.0;         ///< of the paired difference
  double z = 0.0;
};

struct QIReport {
  std::vector<QIStatisticReport> statistics;
  std::size_t samples = 0;
  double mean_rn = 1.0;
  bool pass(double z_max = 3.0) const;
};

/// Monte Carlo comparison of E[f(T X)] and E[f(X) RN(X)] on samples of the (involutive) isometry T.
QIReport quasi_invariance_check(const Kernel& kernel, const LambdaRegularizer& lambda, const PiecewiseIsometry& t,
                                const std::vector<Statistic>& stats, const std::vector<Configuration>& samples,
                                const TailModel* tail = nullptr);

struct QIQuadratureReport {
  std::vector<double> pushforward;
  std::vector<double> reweighted;
  double max_residual = 0.0;
};

/// Both sides for the n-point ensemble by composite Gauss-Legendre quadrature on [-L, L]^n
/// with cells aligned to the breakpoints of T; n <= 4.
QIQuadratureReport quasi_invariance_quadrature(const OrthoPolyFamily& family, int n, const PiecewiseIsometry& t,
                                               const std::vector<Statistic>& stats, int per_cell = 8);

struct ConditionalBinReport {
  int l = 0;
  int outside_class = 0;
  int distance_tercile = 0;
  std::size_t count = 0;
  double z_mean = 0.0;
  double z_spread = 0.0;
};

struct ConditionalReport {
  std::vector<ConditionalBinReport> bins;  ///< populated bins only
  std::size_t samples = 0;
  std::size_t excluded_samples = 0;
  double fraction_within = 1.0;  ///< share of z-scores with |z| < 3
  bool vacuous = false;
  bool pass() const { return fraction_within >= 0.95; }
};

struct ConditionalMcOptions {
  int regeneration_sweeps = 300;
  std::size_t min_bin = 100;
  double radius = std::numeric_limits<double>::infinity();
  bool tail_correction = true;
};

/// End-to-end check on full samples: inside points are redrawn from the predicted conditional OPE
/// and compared with the original ones by bin, through paired z-scores of the mean position and
/// of the mean squared distance to the midpoint of I.
ConditionalReport conditional_mc_verification(KernelPtr kernel, const LambdaRegularizer& lambda, Interval interval,
                                              const std::vector<Configuration>& samples, const SamplerConfig& cfg,
                                              const ConditionalMcOptions& opt = {});

}  // namespace dppcond
