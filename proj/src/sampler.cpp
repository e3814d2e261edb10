#include "dppcond/sampler.hpp"

#include <cmath>
#include <exception>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "dppcond/quadrature.hpp"

namespace dppcond {

void SamplerConfig::validate() const {
  if (chain_length < 1 || burn_in < 0 || !(proposal_scale > 0.0) || streams < 1 || thin < 1)
    throw DomainError("SamplerConfig: chain_length, streams, thin and proposal_scale must be positive");
}

Rng make_stream_rng(std::uint64_t seed, int stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), 0x9e3779b9u};
  return Rng(seq);
}

void run_streams(const SamplerConfig& cfg, const std::function<void(int, Rng&)>& fn) {
  const unsigned cores = std::thread::hardware_concurrency();
  if (cfg.streams == 1 || cores <= 1) {
    for (int s = 0; s < cfg.streams; ++s) {
      Rng rng = make_stream_rng(cfg.seed, s);
      fn(s, rng);
    }
    return;
  }
  std::vector<std::exception_ptr> errors(cfg.streams);
  const int width = static_cast<int>(std::min<unsigned>(cores, static_cast<unsigned>(cfg.streams)));
  for (int first = 0; first < cfg.streams; first += width) {
    std::vector<std::thread> pool;
    for (int s = first; s < std::min(cfg.streams, first + width); ++s) {
      pool.emplace_back([&, s] {
        try {
          Rng rng = make_stream_rng(cfg.seed, s);
          fn(s, rng);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Grid Grid::uniform(Interval window, int n) {
  if (n < 1 || !window.is_finite() || !(window.hi > window.lo))
    throw DomainError("Grid::uniform: need a compact window and n >= 1");
  Grid g;
  g.window = window;
  const double h = window.length() / n;
  g.points = Eigen::VectorXd::LinSpaced(n, window.lo + 0.5 * h, window.hi - 0.5 * h);
  g.weights = Eigen::VectorXd::Constant(n, h);
  return g;
}

Grid Grid::power(Interval window, int n, double exponent, const std::vector<double>& breaks) {
  if (!(window.lo >= 0.0) || !window.is_finite() || !(window.hi > window.lo))
    throw DomainError("Grid::power: window must be a compact subset of [0, inf)");
  if (!(exponent >= 1.0)) throw DomainError("Grid::power: exponent must be at least 1");
  std::vector<double> knots{std::pow(window.lo, 1.0 / exponent)};
  std::vector<double> inner = breaks;
  std::sort(inner.begin(), inner.end());
  for (double b : inner)
    if (b > window.lo && b < window.hi) knots.push_back(std::pow(b, 1.0 / exponent));
  knots.push_back(std::pow(window.hi, 1.0 / exponent));
  const int segments = static_cast<int>(knots.size()) - 1;
  if (n < segments) throw DomainError("Grid::power: fewer cells than segments");

  const double total = knots.back() - knots.front();
  std::vector<int> cells(segments);
  for (int k = 0; k < segments; ++k)
    cells[k] = std::max(1, static_cast<int>(std::lround(n * (knots[k + 1] - knots[k]) / total)));
  int excess = std::accumulate(cells.begin(), cells.end(), 0) - n;
  while (excess != 0) {
    auto it = std::max_element(cells.begin(), cells.end());
    *it -= excess > 0 ? 1 : -1;
    excess += excess > 0 ? -1 : 1;
  }

  Grid g;
  g.window = window;
  g.points.resize(n);
  g.weights.resize(n);
  int idx = 0;
  for (int k = 0; k < segments; ++k) {
    const double dt = (knots[k + 1] - knots[k]) / cells[k];
    for (int c = 0; c < cells[k]; ++c, ++idx) {
      const double t = knots[k] + (c + 0.5) * dt;
      g.points[idx] = std::pow(t, exponent);
      g.weights[idx] = exponent * std::pow(t, exponent - 1.0) * dt;
    }
  }
  return g;
}

DiscretizedKernel::DiscretizedKernel(const Kernel& kernel, Grid grid, double clamp_tolerance)
    : grid_(std::move(grid)) {
  if (grid_.size() < 16) throw DomainError("discretize: at least 16 grid points are required");
  for (Eigen::Index i = 0; i < grid_.size(); ++i)
    if (!kernel.in_domain(grid_.points[i])) throw DomainError("discretize: grid point outside the kernel domain");
  const Eigen::VectorXd root = grid_.weights.array().sqrt();
  matrix_ = root.asDiagonal() * kernel.gram(grid_.points) * root.asDiagonal();
  if (kernel.label() == "sine") {
    const double h = grid_.weights.maxCoeff();
    if (h >= 0.5) {
      std::ostringstream os;
      os << "grid spacing " << h << " does not resolve the sine kernel (need h < 0.5)";
      warnings_.push_back(os.str());
    }
  }
  decompose(clamp_tolerance);
}

DiscretizedKernel DiscretizedKernel::from_matrix(Eigen::MatrixXd matrix, Grid grid, double clamp_tolerance) {
  if (matrix.rows() != grid.size() || matrix.cols() != grid.size())
    throw DomainError("DiscretizedKernel: matrix does not match the grid");
  DiscretizedKernel dk;
  dk.grid_ = std::move(grid);
  dk.matrix_ = std::move(matrix);
  dk.decompose(clamp_tolerance);
  return dk;
}

void DiscretizedKernel::decompose(double clamp_tolerance) {
  matrix_ = 0.5 * (matrix_ + matrix_.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix_);
  if (solver.info() != Eigen::Success) throw NumericalError("discretize: eigen-decomposition failed");
  values_ = solver.eigenvalues();
  vectors_ = solver.eigenvectors();
  raw_min_ = values_.size() ? values_.minCoeff() : 0.0;
  raw_max_ = values_.size() ? values_.maxCoeff() : 0.0;
  if (clamp_magnitude() > clamp_tolerance) {
    std::ostringstream os;
    os << "discretize: eigenvalues leave [0, 1] by " << clamp_magnitude() << " (tolerance " << clamp_tolerance
       << "); refine the grid";
    throw NumericalError(os.str());
  }
  values_ = values_.cwiseMax(0.0).cwiseMin(1.0);
}

DiscretizedKernel discretize(const Kernel& kernel, Interval window, int n) {
  return DiscretizedKernel(kernel, Grid::uniform(window, n));
}

DiscretizedKernel discretize(const Kernel& kernel, const Grid& grid) { return DiscretizedKernel(kernel, grid); }

DiscretizedKernel discretize_power(const Kernel& kernel, Interval window, int n, const std::vector<double>& breaks) {
  std::optional<DiscretizedKernel> best;
  for (double m : {2.0, 3.0, 4.0}) {
    DiscretizedKernel dk(kernel, Grid::power(window, n, m, breaks), std::numeric_limits<double>::infinity());
    if (!best || dk.clamp_magnitude() < best->clamp_magnitude()) best.emplace(std::move(dk));
  }
  if (best->clamp_magnitude() > 1e-6) {
    std::ostringstream os;
    os << "discretize_power: eigenvalues leave [0, 1] by " << best->clamp_magnitude() << "; refine the grid";
    throw NumericalError(os.str());
  }
  return std::move(*best);
}

std::vector<int> DppSampler::draw_indices(Rng& rng) {
  const Eigen::VectorXd& lambda = dk_.eigenvalues();
  const Eigen::MatrixXd& vectors = dk_.eigenvectors();
  const Eigen::Index n = lambda.size();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr int kMaxRestarts = 1000;
  for (int attempt = 0; attempt <= kMaxRestarts; ++attempt) {
    std::vector<Eigen::Index> chosen;
    for (Eigen::Index i = 0; i < n; ++i)
      if (unif(rng) < lambda[i]) chosen.push_back(i);
    const auto k = static_cast<Eigen::Index>(chosen.size());
    if (k == 0) return {};

    Eigen::MatrixXd v(n, k);
    for (Eigen::Index c = 0; c < k; ++c) v.col(c) = vectors.col(chosen[c]);
    Eigen::VectorXd d = v.rowwise().squaredNorm();
    Eigen::MatrixXd basis(n, k);
    std::vector<int> picked;
    picked.reserve(k);
    bool degenerate = false;
    for (Eigen::Index t = 0; t < k; ++t) {
      d = d.cwiseMax(0.0);
      const double total = d.sum();
      // the residual mass equals the remaining rank k - t
      if (!(total > 0.5)) {
        degenerate = true;
        break;
      }
      double u = unif(rng) * total;
      Eigen::Index i = 0;
      for (; i < n - 1; ++i) {
        u -= d[i];
        if (u < 0.0) break;
      }
      while (d[i] <= 0.0 && i > 0) --i;
      const double di = d[i];
      if (!(di > 1e-12)) {
        degenerate = true;
        break;
      }
      Eigen::VectorXd col = v * v.row(i).transpose();
      if (t > 0) col.noalias() -= basis.leftCols(t) * basis.row(i).head(t).transpose();
      col /= std::sqrt(di);
      basis.col(t) = col;
      d -= col.array().square().matrix();
      d[i] = 0.0;
      picked.push_back(static_cast<int>(i));
    }
    if (!degenerate) {
      std::sort(picked.begin(), picked.end());
      return picked;
    }
    ++restarts_;
  }
  throw NumericalError("dpp_sample: orthogonalization kept degenerating");
}

Configuration DppSampler::draw(Rng& rng) {
  const std::vector<int> idx = draw_indices(rng);
  std::vector<double> pts(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) pts[i] = dk_.grid().points[idx[i]];
  return {std::move(pts), dk_.grid().window};
}

DppSampleSet dpp_sample(const DiscretizedKernel& dk, const SamplerConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<Configuration>> per_stream(cfg.streams);
  std::vector<std::size_t> restarts(cfg.streams, 0);
  run_streams(cfg, [&](int s, Rng& rng) {
    DppSampler sampler(dk);
    per_stream[s].reserve(cfg.chain_length);
    for (int i = 0; i < cfg.chain_length; ++i) per_stream[s].push_back(sampler.draw(rng));
    restarts[s] = sampler.restarts();
  });
  DppSampleSet out;
  for (int s = 0; s < cfg.streams; ++s) {
    for (auto& c : per_stream[s]) out.samples.push_back(std::move(c));
    out.restarts += restarts[s];
  }
  return out;
}

void OPESpec::validate() const {
  if (l < 0) throw DomainError("OPESpec: l must be nonnegative");
  if (!interval.is_finite() || !(interval.hi > interval.lo)) throw DomainError("OPESpec: interval must be compact");
  if (!log_weight) throw DomainError("OPESpec: missing log-weight");
}

double ope_log_density(const OPESpec& spec, const std::vector<double>& points) {
  if (static_cast<int>(points.size()) != spec.l) throw DomainError("ope_log_density: expected l points");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!spec.interval.contains(points[i])) return kNegInf;
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = std::abs(points[i] - points[j]);
      if (d == 0.0) return kNegInf;
      acc += 2.0 * std::log(d);
    }
    acc += spec.log_weight(points[i]);
  }
  return acc;
}

OPEChain::OPEChain(const OPESpec& spec, std::vector<double> initial, double scale)
    : spec_(spec), state_(std::move(initial)), scale_(scale) {
  spec_.validate();
  log_density_ = ope_log_density(spec_, state_);
  if (!std::isfinite(log_density_)) throw DomainError("OPEChain: starting point has zero density");
}

double OPEChain::reflect(double x) const {
  const double a = spec_.interval.lo;
  const double len = spec_.interval.length();
  double y = std::fmod(x - a, 2.0 * len);
  if (y < 0.0) y += 2.0 * len;
  if (y > len) y = 2.0 * len - y;
  return a + y;
}

int OPEChain::sweep(Rng& rng) {
  std::normal_distribution<double> step(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int accepted = 0;
  for (std::size_t i = 0; i < state_.size(); ++i) {
    const double old = state_[i];
    const double prop = reflect(old + scale_ * step(rng));
    double delta = spec_.log_weight(prop) - spec_.log_weight(old);
    for (std::size_t j = 0; j < state_.size(); ++j) {
      if (j == i) continue;
      delta += 2.0 * (std::log(std::abs(prop - state_[j])) - std::log(std::abs(old - state_[j])));
    }
    const double u = unif(rng);
    if (!std::isnan(delta) && std::log(u) < delta) {
      state_[i] = prop;
      log_density_ += delta;
      ++accepted;
    }
  }
  return accepted;
}

void OPEChain::tune(double acceptance_rate, double target) {
  const double len = spec_.interval.length();
  scale_ = std::clamp(scale_ * std::exp(acceptance_rate - target), 1e-6 * len, 2.0 * len);
}

std::vector<double> ope_default_start(const OPESpec& spec) {
  std::vector<double> start(spec.l);
  for (int i = 0; i < spec.l; ++i) start[i] = spec.interval.lo + (i + 0.5) * spec.interval.length() / spec.l;
  return start;
}

OPESampleResult ope_sample(const OPESpec& spec, const SamplerConfig& cfg) {
  cfg.validate();
  spec.validate();
  OPESampleResult result;
  const int kept = cfg.chain_length / cfg.thin;
  if (spec.l == 0) {
    result.states.assign(static_cast<std::size_t>(kept) * cfg.streams, Configuration({}, spec.interval));
    result.acceptance = 1.0;
    result.proposal_scale = cfg.proposal_scale;
    return result;
  }
  std::vector<std::vector<Configuration>> per_stream(cfg.streams);
  std::vector<long long> accepted(cfg.streams, 0);
  std::vector<double> scales(cfg.streams, 0.0);
  run_streams(cfg, [&](int s, Rng& rng) {
    OPEChain chain(spec, ope_default_start(spec), cfg.proposal_scale);
    constexpr int kTuneEvery = 50;
    int window_acc = 0;
    for (int b = 1; b <= cfg.burn_in; ++b) {
      window_acc += chain.sweep(rng);
      if (b % kTuneEvery == 0) {
        chain.tune(double(window_acc) / (kTuneEvery * spec.l));
        window_acc = 0;
      }
    }
    per_stream[s].reserve(kept);
    for (int i = 1; i <= cfg.chain_length; ++i) {
      accepted[s] += chain.sweep(rng);
      if (i % cfg.thin == 0) per_stream[s].emplace_back(chain.state(), spec.interval);
    }
    scales[s] = chain.scale();
  });
  long long total_acc = 0;
  for (int s = 0; s < cfg.streams; ++s) {
    for (auto& c : per_stream[s]) result.states.push_back(std::move(c));
    total_acc += accepted[s];
  }
  result.acceptance = double(total_acc) / (double(cfg.chain_length) * cfg.streams * spec.l);
  result.proposal_scale = std::accumulate(scales.begin(), scales.end(), 0.0) / cfg.streams;
  if (result.acceptance < 0.05 || result.acceptance > 0.95) {
    std::ostringstream os;
    os << "acceptance rate " << result.acceptance << " outside [0.05, 0.95]; try proposal_scale "
       << result.proposal_scale * std::exp(result.acceptance - 0.3);
    result.warnings.push_back(os.str());
  }
  return result;
}

OracleResult exact_finite_oracle(const OPESpec& spec, const std::function<double(const std::vector<double>&)>& statistic,
                                 int quad_order) {
  spec.validate();
  if (spec.l > 4) throw DomainError("exact_finite_oracle: l <= 4 only");
  if (spec.l == 0) return {statistic({}), 1.0};
  const QuadratureRule rule = gauss_legendre(quad_order, spec.interval.lo, spec.interval.hi);
  const int l = spec.l;
  std::vector<int> idx(l, 0);
  std::vector<double> pts(l);
  std::vector<double> logs;
  std::vector<double> stats;
  const long long total = static_cast<long long>(std::pow(quad_order, l));
  logs.reserve(total);
  stats.reserve(total);
  for (long long m = 0; m < total; ++m) {
    long long r = m;
    double lw = 0.0;
    for (int i = 0; i < l; ++i) {
      idx[i] = static_cast<int>(r % quad_order);
      r /= quad_order;
      pts[i] = rule.nodes[idx[i]];
      lw += std::log(rule.weights[idx[i]]);
    }
    const double ld = ope_log_density(spec, pts);
    if (!std::isfinite(ld)) continue;
    logs.push_back(lw + ld);
    stats.push_back(statistic(pts));
  }
  if (logs.empty()) throw NumericalError("exact_finite_oracle: density vanishes on every node");
  const double top = *std::max_element(logs.begin(), logs.end());
  double z = 0.0;
  double e = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    const double w = std::exp(logs[i] - top);
    z += w;
    e += w * stats[i];
  }
  return {e / z, z * std::exp(top)};
}

}  // namespace dppcond
