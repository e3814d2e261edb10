#include "dppcond/palm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dppcond {

LogRhoRatio closed_form_log_rho(KernelPtr kernel) {
  if (!kernel) throw DomainError("closed_form_log_rho: null kernel");
  return [kernel](double p, double q) {
    const std::optional<double> r = kernel->log_rho_ratio(p, q);
    if (!r) throw DomainError("no closed-form rho for kernel " + kernel->label());
    return *r;
  };
}

LogPsi truncated_log_psi(double radius) {
  return [radius](double p, double q, const Configuration& x) { return psi_truncated(p, q, x, radius); };
}

LogPsi regularized_log_psi(KernelPtr kernel, LambdaRegularizer lambda, double radius) {
  // the compensator is linear in p - q
  const double slope = compensator(*kernel, lambda, 1.0, 0.0, radius);
  return [slope, radius](double p, double q, const Configuration& x) {
    return psi_truncated(p, q, x, radius) + (p - q) * slope;
  };
}

double log_correlation(const Kernel& kernel, const std::vector<double>& points) {
  const double d = correlation_function(kernel, points);
  return d > 0.0 ? std::log(d) : -std::numeric_limits<double>::infinity();
}

namespace {

void check_tuples(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size() || p.empty()) throw DomainError("RN derivative: tuples must have equal positive length");
  for (const auto* t : {&p, &q}) {
    std::vector<double> s = *t;
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
      throw DomainError("RN derivative: tuple points must be distinct");
  }
}

double log_sq_vandermonde(const std::vector<double>& t) {
  double acc = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j) acc += 2.0 * std::log(std::abs(t[i] - t[j]));
  return acc;
}

}  // namespace

RNDerivativeReport rn_derivative_order_l(const Kernel& kernel, const LogRhoRatio& rho, const LogPsi& psi,
                                         const std::vector<double>& p, const std::vector<double>& q,
                                         const Configuration& x, double radius) {
  check_tuples(p, q);
  RNDerivativeReport rep;
  rep.p = p;
  rep.q = q;
  rep.radius = radius;
  rep.log_det_ratio = log_correlation(kernel, q) - log_correlation(kernel, p);
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      rep.log_vandermonde_ratio +=
          2.0 * (std::log(std::abs(p[i] - p[j])) - std::log(std::abs(q[i] - q[j])));
  for (std::size_t i = 0; i < p.size(); ++i) {
    rep.log_rho_ratio += rho(p[i], q[i]);
    rep.log_psi += psi(p[i], q[i], x);
  }
  rep.log_rn = rep.log_det_ratio + rep.log_vandermonde_ratio + rep.log_rho_ratio + rep.log_psi;
  return rep;
}

double palm_dif_identity_check(const Kernel& kernel, const LogRhoRatio& rho, const LogPsi& psi,
                               const std::vector<double>& p, const std::vector<double>& q, const Configuration& x,
                               double radius) {
  check_tuples(p, q);
  const std::size_t l = p.size();
  const double lhs = (log_correlation(kernel, p) - log_correlation(kernel, q)) +
                     rn_derivative_order_l(kernel, rho, psi, p, q, x, radius).log_rn;
  double rhs = 0.0;
  for (std::size_t i = 0; i < l; ++i) {
    std::vector<double> extra(q.begin(), q.begin() + i);
    extra.insert(extra.end(), p.begin() + i + 1, p.end());
    const Configuration xi = x.with_added(extra);
    rhs += (log_correlation(kernel, {p[i]}) - log_correlation(kernel, {q[i]})) +
           rn_derivative_order_l(kernel, rho, psi, {p[i]}, {q[i]}, xi, radius).log_rn;
  }
  return std::abs(lhs - rhs);
}

double phi_palm_formula(const std::vector<double>& p, const std::vector<double>& q, const Configuration& x,
                        const LogPsi& psi) {
  check_tuples(p, q);
  double acc = log_sq_vandermonde(p) - log_sq_vandermonde(q);
  for (std::size_t i = 0; i < p.size(); ++i) acc += psi(p[i], q[i], x);
  return acc;
}

namespace {

// largest R with [-R, R] within U contained in the window
double admissible_radius(const Interval& window, const Interval& u, double requested) {
  double r = requested;
  if (u.hi > window.hi) r = std::min(r, window.hi);
  if (u.lo < window.lo) r = std::min(r, -window.lo);
  if (!(r > 0.0)) throw DomainError("rho estimate: the window does not contain a symmetric truncation radius");
  return r;
}

}  // namespace

std::vector<RhoEstimate> rho_estimate_from_samples(const Kernel& kernel, const Kernel& palm, const LambdaRegularizer& lambda,
                                                   const std::vector<double>& ps, double q,
                                                   const std::vector<Configuration>& samples, const RhoMcOptions& opt) {
  if (samples.size() < 1000) throw DomainError("rho estimate: at least 1000 Palm samples are required");
  if (opt.batches < 2) throw DomainError("rho estimate: need at least two batches");
  const Interval u = kernel.domain();
  const double radius = admissible_radius(samples.front().window(), u, opt.radius);
  const Interval inner{std::max(-radius, u.lo), std::min(radius, u.hi)};
  const double slope = compensator(kernel, lambda, 1.0, 0.0, radius);
  const std::size_t n = samples.size();
  const std::size_t batches = std::min<std::size_t>(opt.batches, n);

  std::vector<RhoEstimate> out;
  for (double p : ps) {
    RhoEstimate est;
    est.p = p;
    est.q = q;
    est.method = "mc-palm";
    est.samples = n;
    if (p == q) {
      out.push_back(est);
      continue;
    }
    const double tail = opt.tail_correction ? tail_correction(palm, kernel, lambda, p, q, inner) : 0.0;
    std::vector<double> logs(n);
    for (std::size_t i = 0; i < n; ++i) logs[i] = psi_truncated(p, q, samples[i], radius) + (p - q) * slope + tail;
    const double top = *std::max_element(logs.begin(), logs.end());
    std::vector<double> batch(batches, 0.0);
    std::vector<std::size_t> counts(batches, 0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = std::exp(logs[i] - top);
      const std::size_t b = i * batches / n;
      batch[b] += v;
      ++counts[b];
      total += v;
    }
    const double mean = total / double(n);
    double ss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      batch[b] /= double(counts[b]);
      ss += (batch[b] - mean) * (batch[b] - mean);
    }
    const double se_mean = std::sqrt(ss / double(batches - 1) / double(batches));
    std::vector<double> sorted = batch;
    std::sort(sorted.begin(), sorted.end());
    const double median = batches % 2 ? sorted[batches / 2] : 0.5 * (sorted[batches / 2 - 1] + sorted[batches / 2]);

    const double log_diag = std::log(kernel.diagonal(p)) - std::log(kernel.diagonal(q));
    est.mean_psi = mean * std::exp(top);
    est.median_batch_mean = median * std::exp(top);
    est.ratio = std::exp(log_diag - std::log(mean) - top);
    est.std_error = est.ratio * se_mean / mean;
    est.heavy_tail = std::abs(median / mean - 1.0) > 0.2;
    if (est.heavy_tail) est.warnings.push_back("median of batch means differs from the mean by more than 20%");
    if ((sorted.back() - sorted.front()) / mean > 0.5) {
      std::ostringstream os;
      os << "batch means of Psi vary by " << 100.0 * (sorted.back() - sorted.front()) / mean << "%";
      est.warnings.push_back(os.str());
    }
    out.push_back(est);
  }
  return out;
}

std::vector<RhoEstimate> rho_estimate_mc(KernelPtr kernel, const LambdaRegularizer& lambda, const std::vector<double>& ps,
                                         double q, const SamplerConfig& cfg, const Grid& grid, const RhoMcOptions& opt) {
  for (double p : ps)
    if (!kernel->in_domain(p)) throw DomainError("rho estimate: p outside the kernel domain");
  const auto palm = palm_reduce(kernel, {q});
  const DiscretizedKernel dk(*palm, grid);
  const DppSampleSet set = dpp_sample(dk, cfg);
  std::vector<RhoEstimate> est = rho_estimate_from_samples(*kernel, *palm, lambda, ps, q, set.samples, opt);
  if (set.restarts > 0)
    for (auto& e : est) e.warnings.push_back("sampler restarts: " + std::to_string(set.restarts));
  return est;
}

RhoEstimate rho_estimate_mc(KernelPtr kernel, const LambdaRegularizer& lambda, double p, double q,
                            const SamplerConfig& cfg, const Grid& grid, const RhoMcOptions& opt) {
  return rho_estimate_mc(std::move(kernel), lambda, std::vector<double>{p}, q, cfg, grid, opt).front();
}

RhoLimitSequence rho_finite_n_limit(PolyKind kind, double s, const std::vector<int>& ns, double p, double q) {
  if (ns.empty()) throw DomainError("rho_finite_n_limit: empty sequence of n");
  RhoLimitSequence seq;
  for (int n : ns) {
    const ScaledProjectionKernel k(kind == PolyKind::Hermite ? ScaledKernel::hermite_bulk(n)
                                                             : ScaledKernel::jacobi_hard_edge(n, s));
    if (!k.in_domain(p) || !k.in_domain(q)) throw DomainError("rho_finite_n_limit: point outside the scaled support");
    RhoEstimate est;
    est.p = p;
    est.q = q;
    est.method = "finite-n-limit";
    est.ratio = p == q ? 1.0 : std::exp(*k.log_rho_ratio(p, q));
    seq.n.push_back(n);
    seq.estimates.push_back(est);
  }
  const std::size_t m = seq.n.size();
  if (m == 1) {
    seq.extrapolated = seq.estimates.back().ratio;
  } else {
    const double n1 = seq.n[m - 2], n2 = seq.n[m - 1];
    const double r1 = seq.estimates[m - 2].ratio, r2 = seq.estimates[m - 1].ratio;
    seq.extrapolated = n1 == n2 ? r2 : (n2 * r2 - n1 * r1) / (n2 - n1);
  }
  return seq;
}

double finite_n_palm_integral_check(const OrthoPolyFamily& family, int n, double p, double q, int quad_order) {
  if (n < 1 || n > 4) throw DomainError("finite_n_palm_integral_check: 1 <= n <= 4");
  if (quad_order < n) throw DomainError("finite_n_palm_integral_check: quadrature order must be at least n");
  const CDKernel kernel(family, n);
  const double diag_ratio = kernel.diagonal(q) / kernel.diagonal(p);
  const double rho_ratio = std::exp(family.log_weight(p) - family.log_weight(q));
  const int dim = n - 1;
  double expectation = 1.0;
  if (dim > 0) {
    const QuadratureRule rule = family.gauss_rule(quad_order);
    std::vector<int> idx(dim, 0);
    long long total = 1;
    for (int d = 0; d < dim; ++d) total *= quad_order;
    double z = 0.0, acc = 0.0;
    for (long long m = 0; m < total; ++m) {
      long long r = m;
      for (int d = 0; d < dim; ++d) {
        idx[d] = static_cast<int>(r % quad_order);
        r /= quad_order;
      }
      double dens = 1.0;
      double psi = 1.0;
      for (int a = 0; a < dim; ++a) {
        const double xa = rule.nodes[idx[a]];
        dens *= rule.weights[idx[a]] * (xa - q) * (xa - q);
        for (int b = a + 1; b < dim; ++b) {
          const double d = xa - rule.nodes[idx[b]];
          dens *= d * d;
        }
        const double f = (xa - p) / (xa - q);
        psi *= f * f;
      }
      z += dens;
      acc += dens * psi;
    }
    if (!(z > 0.0)) throw NumericalError("finite_n_palm_integral_check: vanishing normalization");
    expectation = acc / z;
  }
  return std::abs(expectation * rho_ratio * diag_ratio - 1.0);
}

}  // namespace dppcond
