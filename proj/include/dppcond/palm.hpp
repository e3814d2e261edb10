#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dppcond/functionals.hpp"
#include "dppcond/kernels.hpp"
#include "dppcond/orthopoly.hpp"
#include "dppcond/sampler.hpp"

namespace dppcond {

/// log(rho(p) / rho(q)).
using LogRhoRatio = std::function<double(double p, double q)>;
/// log Psi_{p,q}(X).
using LogPsi = std::function<double(double p, double q, const Configuration& x)>;

/// Closed-form rho ratio of a kernel; throws if the kernel has none.
LogRhoRatio closed_form_log_rho(KernelPtr kernel);
LogPsi truncated_log_psi(double radius);
LogPsi regularized_log_psi(KernelPtr kernel, LambdaRegularizer lambda, double radius);

/// log rho_l(points) = log det[Pi(p_i, p_j)].
double log_correlation(const Kernel& kernel, const std::vector<double>& points);

struct RNDerivativeReport {
  std::vector<double> p;
  std::vector<double> q;
  double log_rn = 0.0;
  double log_det_ratio = 0.0;          ///< log det Pi(q) - log det Pi(p)
  double log_vandermonde_ratio = 0.0;  ///< sum_{i<j} log (p_i - p_j)^2 / (q_i - q_j)^2
  double log_rho_ratio = 0.0;          ///< sum_i log rho(p_i) / rho(q_i)
  double log_psi = 0.0;                ///< sum_i log Psi_{p_i, q_i}(X)
  double radius = 0.0;
};

/// log dP^{p_1..p_l} / dP^{q_1..q_l} at X, with its components.
RNDerivativeReport rn_derivative_order_l(const Kernel& kernel, const LogRhoRatio& rho, const LogPsi& psi,
                                         const std::vector<double>& p, const std::vector<double>& q,
                                         const Configuration& x, double radius);

/// |order-l derivative - telescoping product of order-1 derivatives on augmented configurations| in log space.
double palm_dif_identity_check(const Kernel& kernel, const LogRhoRatio& rho, const LogPsi& psi,
                               const std::vector<double>& p, const std::vector<double>& q, const Configuration& x,
                               double radius);

/// sum_{i<j} log Phi(p_i,p_j)/Phi(q_i,q_j) + sum_i log Psi(p_i, q_i, X), with Phi(a, b) = |a - b|^2.
double phi_palm_formula(const std::vector<double>& p, const std::vector<double>& q, const Configuration& x,
                        const LogPsi& psi);

struct RhoEstimate {
  double p = 0.0;
  double q = 0.0;
  double ratio = 1.0;  ///< rho(p) / rho(q)
  double std_error = 0.0;
  std::string method;
  std::size_t samples = 0;
  double mean_psi = 1.0;
  double median_batch_mean = 1.0;
  bool heavy_tail = false;
  std::vector<std::string> warnings;
};

struct RhoMcOptions {
  double radius = std::numeric_limits<double>::infinity();  ///< truncation radius (clipped to the grid window)
  bool tail_correction = true;
  int batches = 20;
};

/// Monte Carlo estimates of rho(p)/rho(q) for several p from one set of Palm samples at q.
std::vector<RhoEstimate> rho_estimate_from_samples(const Kernel& kernel, const Kernel& palm, const LambdaRegularizer& lambda,
                                                   const std::vector<double>& ps, double q,
                                                   const std::vector<Configuration>& samples, const RhoMcOptions& opt);

/// Samples the Palm process at q discretized on `grid` and estimates rho(p)/rho(q) for every p.
std::vector<RhoEstimate> rho_estimate_mc(KernelPtr kernel, const LambdaRegularizer& lambda, const std::vector<double>& ps,
                                         double q, const SamplerConfig& cfg, const Grid& grid, const RhoMcOptions& opt);

RhoEstimate rho_estimate_mc(KernelPtr kernel, const LambdaRegularizer& lambda, double p, double q,
                            const SamplerConfig& cfg, const Grid& grid, const RhoMcOptions& opt = {});

struct RhoLimitSequence {
  std::vector<int> n;
  std::vector<RhoEstimate> estimates;
  double extrapolated = 1.0;  ///< Richardson extrapolation in 1/n from the last two terms
};

/// Finite-n weight ratios rho_n(p)/rho_n(q) under the scaling maps of the limit transitions.
RhoLimitSequence rho_finite_n_limit(PolyKind kind, double s, const std::vector<int>& ns, double p, double q);

/// |E_{P^q}[Psi_{p,q}] rho(p) Pi(q,q) / (rho(q) Pi(p,p)) - 1| for the n-point ensemble, by
/// (n-1)-dimensional Gauss quadrature of the family; n <= 4.
double finite_n_palm_integral_check(const OrthoPolyFamily& family, int n, double p, double q, int quad_order);

}  // namespace dppcond
