#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dppcond/core.hpp"
#include "dppcond/kernels.hpp"

namespace dppcond {

using Rng = std::mt19937_64;

struct SamplerConfig {
  std::uint64_t seed = 20240601;
  /// Samples per stream for DPP sampling; post-burn-in sweeps per stream for MCMC.
  int chain_length = 10000;
  int burn_in = 10000;
  double proposal_scale = 0.1;
  int streams = 1;
  int thin = 10;

  void validate() const;
};

/// Generator of stream `stream` under `seed`.
Rng make_stream_rng(std::uint64_t seed, int stream);

/// Runs fn(stream, rng) for every stream, on threads when more than one core is available.
void run_streams(const SamplerConfig& cfg, const std::function<void(int, Rng&)>& fn);

/// Quadrature grid: nodes x_i with weights w_i inside a window.
struct Grid {
  Eigen::VectorXd points;
  Eigen::VectorXd weights;
  Interval window;

  Eigen::Index size() const { return points.size(); }

  /// n midpoint cells of equal width.
  static Grid uniform(Interval window, int n);
  /// Midpoint cells uniform in t = x^(1/exponent) on a window inside [0, inf); `breaks` become cell
  /// boundaries. Suited to kernels whose diagonal varies like a power of x near the origin.
  static Grid power(Interval window, int n, double exponent, const std::vector<double>& breaks = {});
};

/// Kernel restricted to a grid: M_ij = sqrt(w_i) K(x_i, x_j) sqrt(w_j).
class DiscretizedKernel {
 public:
  DiscretizedKernel(const Kernel& kernel, Grid grid, double clamp_tolerance = 1e-6);
  /// Uses a ready matrix on the grid (already including the weights).
  static DiscretizedKernel from_matrix(Eigen::MatrixXd matrix, Grid grid, double clamp_tolerance = 1e-6);

  const Grid& grid() const { return grid_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  /// Clamped to [0, 1], ascending.
  const Eigen::VectorXd& eigenvalues() const { return values_; }
  const Eigen::MatrixXd& eigenvectors() const { return vectors_; }
  double raw_min_eigenvalue() const { return raw_min_; }
  double raw_max_eigenvalue() const { return raw_max_; }
  /// Largest distance moved by the clamp.
  double clamp_magnitude() const { return std::max({0.0, -raw_min_, raw_max_ - 1.0}); }
  double trace() const { return matrix_.trace(); }
  double expected_count() const { return values_.sum(); }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  DiscretizedKernel() = default;
  void decompose(double clamp_tolerance);

  Grid grid_;
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd values_;
  Eigen::MatrixXd vectors_;
  double raw_min_ = 0.0;
  double raw_max_ = 0.0;
  std::vector<std::string> warnings_;
};

DiscretizedKernel discretize(const Kernel& kernel, Interval window, int n);
DiscretizedKernel discretize(const Kernel& kernel, const Grid& grid);
/// Power grid whose exponent in {2, 3, 4} gives the smallest eigenvalue clamp.
DiscretizedKernel discretize_power(const Kernel& kernel, Interval window, int n, const std::vector<double>& breaks = {});

/// Spectral sampler for the determinantal measure of a discretized kernel.
class DppSampler {
 public:
  explicit DppSampler(const DiscretizedKernel& dk) : dk_(dk) {}

  /// Grid indices of one sample, ascending.
  std::vector<int> draw_indices(Rng& rng);
  Configuration draw(Rng& rng);
  std::size_t restarts() const { return restarts_; }

 private:
  const DiscretizedKernel& dk_;
  std::size_t restarts_ = 0;
};

struct DppSampleSet {
  std::vector<Configuration> samples;  ///< stream-major order
  std::size_t restarts = 0;
};

/// cfg.streams * cfg.chain_length independent samples.
DppSampleSet dpp_sample(const DiscretizedKernel& dk, const SamplerConfig& cfg);

/// Density on I^l proportional to prod_{i<j} (t_i - t_j)^2 prod_i exp(log_weight(t_i)).
struct OPESpec {
  int l = 1;
  Interval interval{0.0, 1.0};
  std::function<double(double)> log_weight = [](double) { return 0.0; };

  void validate() const;
};

double ope_log_density(const OPESpec& spec, const std::vector<double>& points);

/// Metropolis chain with per-coordinate Gaussian steps reflected at the endpoints of I.
class OPEChain {
 public:
  OPEChain(const OPESpec& spec, std::vector<double> initial, double scale);

  /// One pass over all coordinates; returns the number of accepted moves.
  int sweep(Rng& rng);
  /// Multiplies the scale toward the target acceptance from the rate of the last sweeps.
  void tune(double acceptance_rate, double target = 0.3);

  const std::vector<double>& state() const { return state_; }
  double scale() const { return scale_; }
  double log_density() const { return log_density_; }

 private:
  double reflect(double x) const;

  const OPESpec& spec_;
  std::vector<double> state_;
  double scale_;
  double log_density_;
};

/// Evenly spread interior starting points.
std::vector<double> ope_default_start(const OPESpec& spec);

struct OPESampleResult {
  std::vector<Configuration> states;  ///< stream-major order
  double acceptance = 0.0;
  double proposal_scale = 0.0;
  std::vector<std::string> warnings;
};

/// burn_in sweeps (with scale tuning), then chain_length sweeps keeping every thin-th state, per stream.
OPESampleResult ope_sample(const OPESpec& spec, const SamplerConfig& cfg);

struct OracleResult {
  double expectation = 0.0;
  double normalization = 0.0;
};

/// E[statistic] and Z under the OPE density by tensor Gauss-Legendre quadrature; l <= 4.
OracleResult exact_finite_oracle(const OPESpec& spec, const std::function<double(const std::vector<double>&)>& statistic,
                                 int quad_order);

}  // namespace dppcond
