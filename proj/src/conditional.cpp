#include "dppcond/conditional.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace dppcond {

namespace {

double radius_within(const Interval& window, const Interval& u, double requested) {
  double r = requested;
  if (u.hi > window.hi) r = std::min(r, window.hi);
  if (u.lo < window.lo) r = std::min(r, -window.lo);
  if (!(r > 0.0)) throw DomainError("truncation radius: the window does not contain a symmetric radius");
  return r;
}

double unit_compensator(const Kernel& kernel, const LambdaRegularizer& lambda, double radius) {
  return compensator(kernel, lambda, 1.0, 0.0, radius);
}

}  // namespace

WindowCondition WindowCondition::from(const Configuration& x, Interval interval) {
  if (!interval.is_finite() || !(interval.hi > interval.lo)) throw DomainError("WindowCondition: I must be compact");
  return {interval, x.outside(interval), static_cast<int>(x.count_in(interval))};
}

ConditionalWeight::ConditionalWeight(KernelPtr kernel, const LambdaRegularizer& lambda, const WindowCondition& cond,
                                     double q0, const ConditionalOptions& opt)
    : kernel_(std::move(kernel)), interval_(cond.interval), q0_(q0), radius_(opt.radius), lambda_label_(lambda.label()),
      tail_(opt.tail) {
  if (!kernel_) throw DomainError("conditional_weight: null kernel");
  if (!interval_.contains(q0_)) throw DomainError("conditional_weight: q0 must lie in I");
  if (!kernel_->in_domain(interval_.lo) || !kernel_->in_domain(interval_.hi))
    throw DomainError("conditional_weight: I must lie inside the kernel domain");
  if (!kernel_->log_rho_ratio(q0_, q0_)) throw DomainError("conditional_weight: kernel has no closed-form rho");
  slope_ = unit_compensator(*kernel_, lambda, radius_);
  const double tol = 1e-12 * (1.0 + std::abs(q0_));
  for (double x : cond.outside.points()) {
    if (interval_.contains(x)) throw DomainError("conditional_weight: outside configuration meets I");
    if (std::abs(x) > radius_) continue;
    if (std::abs(x - q0_) < tol) throw SingularConfiguration("conditional_weight: a particle sits at q0");
    outside_.push_back(x);
  }
}

double ConditionalWeight::log_ratio(double p) const {
  if (!interval_.contains(p)) throw DomainError("conditional weight: point outside I");
  if (p == q0_) return 0.0;
  double acc = *kernel_->log_rho_ratio(p, q0_);
  for (double x : outside_) acc += 2.0 * (std::log(std::abs(x - p)) - std::log(std::abs(x - q0_)));
  acc += (p - q0_) * slope_;
  if (tail_) acc += (*tail_)(p, q0_);
  return acc;
}

ConditionalWeight conditional_weight(KernelPtr kernel, const LambdaRegularizer& lambda, const WindowCondition& cond,
                                     double q0, const ConditionalOptions& opt) {
  return {std::move(kernel), lambda, cond, q0, opt};
}

OPESpec conditional_density(const ConditionalWeight& cw, int l) {
  if (l < 0) throw DomainError("conditional_density: l must be nonnegative");
  OPESpec spec;
  spec.l = l;
  spec.interval = cw.interval();
  spec.log_weight = [cw](double t) { return cw.log_ratio(t); };
  return spec;
}

double finite_n_conditional_check(const OrthoPolyFamily& family, int n, Interval interval,
                                  const std::vector<double>& outside,
                                  const std::vector<std::vector<double>>& inside_tuples) {
  if (inside_tuples.empty()) throw DomainError("finite_n_conditional_check: no inside tuples");
  const std::size_t l = inside_tuples.front().size();
  if (outside.size() + l != static_cast<std::size_t>(n))
    throw DomainError("finite_n_conditional_check: inside and outside counts must add up to n");
  for (double x : outside)
    if (interval.contains(x)) throw DomainError("finite_n_conditional_check: outside point inside I");

  // full ensemble: prod of squared differences and weights, evaluated as a product
  auto full_log = [&](const std::vector<double>& inside) {
    std::vector<double> all = inside;
    all.insert(all.end(), outside.begin(), outside.end());
    double prod = 1.0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      prod *= family.weight(all[i]);
      for (std::size_t j = i + 1; j < all.size(); ++j) prod *= (all[i] - all[j]) * (all[i] - all[j]);
    }
    return std::log(prod);
  };

  OPESpec spec;
  spec.l = static_cast<int>(l);
  spec.interval = interval;
  spec.log_weight = [&](double t) {
    double acc = family.log_weight(t);
    for (double x : outside) acc += 2.0 * std::log(std::abs(x - t));
    return acc;
  };

  const double base_full = full_log(inside_tuples.front());
  const double base_cond = ope_log_density(spec, inside_tuples.front());
  double worst = 0.0;
  for (const auto& tuple : inside_tuples) {
    if (tuple.size() != l) throw DomainError("finite_n_conditional_check: tuples of different sizes");
    for (double t : tuple)
      if (!interval.contains(t)) throw DomainError("finite_n_conditional_check: inside point outside I");
    const double direct = full_log(tuple) - base_full;
    const double formula = ope_log_density(spec, tuple) - base_cond;
    worst = std::max(worst, std::abs(direct - formula));
  }
  return worst;
}

namespace {

std::vector<Interval> merged(std::vector<Interval> parts) {
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const Interval& p : parts) {
    if (!out.empty() && p.lo <= out.back().hi + 1e-12) {
      out.back().hi = std::max(out.back().hi, p.hi);
    } else {
      out.push_back(p);
    }
  }
  return out;
}

bool overlapping(std::vector<Interval> parts) {
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t i = 1; i < parts.size(); ++i)
    if (parts[i].lo < parts[i - 1].hi - 1e-12) return true;
  return false;
}

}  // namespace

PiecewiseIsometry::PiecewiseIsometry(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
  std::vector<Interval> src, img;
  for (const Piece& p : pieces_) {
    if (!p.source.is_finite() || !(p.source.hi > p.source.lo))
      throw DomainError("PiecewiseIsometry: sources must be nonempty compact intervals");
    src.push_back(p.source);
    img.push_back({p.source.lo + p.shift, p.source.hi + p.shift});
  }
  if (overlapping(src) || overlapping(img)) throw DomainError("PiecewiseIsometry: sources or images overlap");
  const auto a = merged(src);
  const auto b = merged(img);
  bool same = a.size() == b.size();
  for (std::size_t i = 0; same && i < a.size(); ++i)
    same = std::abs(a[i].lo - b[i].lo) < 1e-12 && std::abs(a[i].hi - b[i].hi) < 1e-12;
  if (!same) throw DomainError("PiecewiseIsometry: images must tile the union of the sources");
}

PiecewiseIsometry PiecewiseIsometry::exchange(Interval a, Interval b) {
  if (std::abs(a.length() - b.length()) > 1e-12) throw DomainError("exchange: intervals must have equal length");
  return PiecewiseIsometry({{a, b.lo - a.lo}, {b, a.lo - b.lo}});
}

double PiecewiseIsometry::operator()(double x) const {
  for (const Piece& p : pieces_)
    if (x >= p.source.lo && x < p.source.hi) return x + p.shift;
  return x;
}

Configuration PiecewiseIsometry::operator()(const Configuration& x) const {
  std::vector<double> pts;
  pts.reserve(x.size());
  for (double t : x.points()) pts.push_back((*this)(t));
  return {std::move(pts), x.window()};
}

Interval PiecewiseIsometry::support() const {
  if (pieces_.empty()) return {0.0, 0.0};
  Interval s = pieces_.front().source;
  for (const Piece& p : pieces_) {
    s.lo = std::min(s.lo, p.source.lo);
    s.hi = std::max(s.hi, p.source.hi);
  }
  return s;
}

bool PiecewiseIsometry::maps_grid(const Eigen::VectorXd& grid, double tol) const {
  std::vector<double> sorted(grid.data(), grid.data() + grid.size());
  std::sort(sorted.begin(), sorted.end());
  for (double x : sorted) {
    const double y = (*this)(x);
    if (y == x) continue;
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), y - tol);
    if (it == sorted.end() || std::abs(*it - y) > tol) return false;
  }
  return true;
}

namespace {

double log_qi_rn_impl(const Kernel& kernel, double slope, const PiecewiseIsometry& t, const Configuration& x,
                      double radius, const TailModel* tail) {
  if (t.is_identity()) return 0.0;
  const Interval v = t.support();
  std::vector<double> inside, moved, outside;
  for (double p : x.points()) {
    if (v.contains(p)) {
      inside.push_back(p);
      moved.push_back(t(p));
    } else if (std::abs(p) <= radius) {
      outside.push_back(p);
    }
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < inside.size(); ++i) {
    for (std::size_t j = i + 1; j < inside.size(); ++j)
      acc += 2.0 * (std::log(std::abs(moved[i] - moved[j])) - std::log(std::abs(inside[i] - inside[j])));
    const double a = moved[i];
    const double b = inside[i];
    if (a == b) continue;
    acc += *kernel.log_rho_ratio(a, b);
    for (double y : outside) acc += 2.0 * (std::log(std::abs(y - a)) - std::log(std::abs(y - b)));
    acc += (a - b) * slope;
    if (tail) acc += (*tail)(a, b);
  }
  return acc;
}

}  // namespace

double log_qi_rn(const Kernel& kernel, const LambdaRegularizer& lambda, const PiecewiseIsometry& t,
                 const Configuration& x, double radius, const TailModel* tail) {
  if (!kernel.log_rho_ratio(t.support().lo, t.support().lo) && !t.is_identity())
    throw DomainError("log_qi_rn: kernel has no closed-form rho");
  return log_qi_rn_impl(kernel, unit_compensator(kernel, lambda, radius), t, x, radius, tail);
}

bool QIReport::pass(double z_max) const {
  for (const auto& s : statistics)
    if (!(std::abs(s.z) < z_max)) return false;
  return true;
}

QIReport quasi_invariance_check(const Kernel& kernel, const LambdaRegularizer& lambda, const PiecewiseIsometry& t,
                                const std::vector<Statistic>& stats, const std::vector<Configuration>& samples,
                                const TailModel* tail) {
  if (samples.size() < 1000) throw DomainError("quasi_invariance_check: at least 1000 samples are required");
  const Interval window = samples.front().window();
  if (!t.is_identity() && !window.contains(t.support()))
    throw DomainError("quasi_invariance_check: T must act inside the sampling window");
  const double radius = radius_within(window, kernel.domain(), std::numeric_limits<double>::infinity());
  const double slope = unit_compensator(kernel, lambda, radius);
  const std::size_t m = stats.size();
  std::vector<double> lhs(m, 0.0), rhs(m, 0.0), mean_d(m, 0.0), m2_d(m, 0.0);
  double rn_sum = 0.0;
  std::size_t k = 0;
  for (const Configuration& x : samples) {
    const double rn = std::exp(log_qi_rn_impl(kernel, slope, t, x, radius, tail));
    const Configuration tx = t(x);
    ++k;
    rn_sum += rn;
    for (std::size_t s = 0; s < m; ++s) {
      const double a = stats[s].f(tx);
      const double b = stats[s].f(x) * rn;
      lhs[s] += a;
      rhs[s] += b;
      const double d = a - b;
      const double delta = d - mean_d[s];
      mean_d[s] += delta / double(k);
      m2_d[s] += delta * (d - mean_d[s]);
    }
  }
  QIReport rep;
  rep.samples = k;
  rep.mean_rn = rn_sum / double(k);
  for (std::size_t s = 0; s < m; ++s) {
    QIStatisticReport r;
    r.name = stats[s].name;
    r.pushforward_mean = lhs[s] / double(k);
    r.reweighted_mean = rhs[s] / double(k);
    r.std_error = std::sqrt(m2_d[s] / double(k - 1) / double(k));
    r.z = r.std_error > 0.0 ? mean_d[s] / r.std_error : 0.0;
    rep.statistics.push_back(r);
  }
  return rep;
}

QIQuadratureReport quasi_invariance_quadrature(const OrthoPolyFamily& family, int n, const PiecewiseIsometry& t,
                                               const std::vector<Statistic>& stats, int per_cell) {
  if (n < 1 || n > 4) throw DomainError("quasi_invariance_quadrature: 1 <= n <= 4");
  const bool hermite = family.kind() == PolyKind::Hermite;
  const Interval range = hermite ? Interval{-7.0, 7.0} : Interval{-1.0, 1.0};
  std::vector<double> breaks{range.lo, range.hi};
  if (hermite)
    for (double b : {-4.0, -2.5, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.5, 4.0}) breaks.push_back(b);
  for (const auto& p : t.pieces())
    for (double b : {p.source.lo, p.source.hi, p.source.lo + p.shift, p.source.hi + p.shift}) breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(), [&](double b) { return b < range.lo || b > range.hi; }),
               breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               breaks.end());
  if (!t.is_identity() && !range.contains(t.support()))
    throw DomainError("quasi_invariance_quadrature: T must act inside the integration range");
  const QuadratureRule rule = composite_gauss_legendre(breaks, per_cell);
  const CDProjectionKernel kernel(CDKernel(family, n));
  const double inf = std::numeric_limits<double>::infinity();

  const auto size = static_cast<int>(rule.size());
  const std::size_t m = stats.size();
  std::vector<double> lhs(m, 0.0), rhs(m, 0.0);
  double z = 0.0;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::vector<double> pts(n);
  // the integrand is symmetric, so strictly increasing index tuples suffice
  while (true) {
    double w = 1.0;
    double logw = 0.0;
    for (int i = 0; i < n; ++i) {
      pts[i] = rule.nodes[idx[i]];
      w *= rule.weights[idx[i]];
      logw += family.log_weight(pts[i]);
      for (int j = 0; j < i; ++j) w *= (pts[i] - pts[j]) * (pts[i] - pts[j]);
    }
    w *= std::exp(logw);
    if (w > 0.0) {
      const Configuration x(pts, range);
      const Configuration tx = t(x);
      const double rn = std::exp(log_qi_rn_impl(kernel, 0.0, t, x, inf, nullptr));
      z += w;
      for (std::size_t s = 0; s < m; ++s) {
        lhs[s] += w * stats[s].f(tx);
        rhs[s] += w * stats[s].f(x) * rn;
      }
    }
    int i = n - 1;
    while (i >= 0 && idx[i] == size - n + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
  QIQuadratureReport rep;
  for (std::size_t s = 0; s < m; ++s) {
    rep.pushforward.push_back(lhs[s] / z);
    rep.reweighted.push_back(rhs[s] / z);
    rep.max_residual = std::max(rep.max_residual, std::abs(lhs[s] - rhs[s]) / z);
  }
  return rep;
}

ConditionalReport conditional_mc_verification(KernelPtr kernel, const LambdaRegularizer& lambda, Interval interval,
                                              const std::vector<Configuration>& samples, const SamplerConfig& cfg,
                                              const ConditionalMcOptions& opt) {
  ConditionalReport rep;
  rep.samples = samples.size();
  if (samples.empty()) {
    rep.vacuous = true;
    return rep;
  }
  const Interval window = samples.front().window();
  if (!window.contains(interval) || !(interval.lo > window.lo && interval.hi < window.hi))
    throw DomainError("conditional_mc_verification: the window must contain I with a margin");
  const Interval u = kernel->domain();
  const double radius = radius_within(window, u, opt.radius);
  const Interval inner{std::max(-radius, u.lo), std::min(radius, u.hi)};
  TailModel tail;
  if (opt.tail_correction) tail = TailModel(*kernel, *kernel, lambda, inner, interval);
  ConditionalOptions copt;
  copt.radius = radius;
  copt.tail = opt.tail_correction ? &tail : nullptr;
  const double q0 = interval.midpoint();
  const double mid = interval.midpoint();

  struct Record {
    int l;
    std::size_t outside;
    double distance;
    double orig[2];
    double fresh[2];
  };
  std::vector<Record> records;
  records.reserve(samples.size());
  Rng rng = make_stream_rng(cfg.seed, 7919);
  std::uniform_real_distribution<double> unif(interval.lo, interval.hi);
  const double scale = 0.25 * interval.length();

  for (const Configuration& x : samples) {
    const WindowCondition cond = WindowCondition::from(x, interval);
    Record r{cond.inside_count, cond.outside.size(), 0.0, {0.0, 0.0}, {0.0, 0.0}};
    std::vector<double> dist;
    for (double y : cond.outside.points()) dist.push_back(y < interval.lo ? interval.lo - y : y - interval.hi);
    std::sort(dist.begin(), dist.end());
    if (dist.size() >= 2) {
      r.distance = 0.5 * (dist[0] + dist[1]);
    } else if (dist.size() == 1) {
      r.distance = dist[0];
    } else {
      r.distance = window.length();
    }
    if (r.l > 0) {
      const ConditionalWeight cw(kernel, lambda, cond, q0, copt);
      const OPESpec spec = conditional_density(cw, r.l);
      std::vector<double> start(r.l);
      for (auto& s : start) s = unif(rng);
      OPEChain chain(spec, start, scale);
      for (int s = 0; s < opt.regeneration_sweeps; ++s) chain.sweep(rng);
      const std::vector<double> orig = x.restricted(interval).points();
      const std::vector<double>& fresh = chain.state();
      for (int k = 0; k < r.l; ++k) {
        r.orig[0] += orig[k] / r.l;
        r.orig[1] += (orig[k] - mid) * (orig[k] - mid) / r.l;
        r.fresh[0] += fresh[k] / r.l;
        r.fresh[1] += (fresh[k] - mid) * (fresh[k] - mid) / r.l;
      }
    }
    records.push_back(r);
  }

  std::vector<std::size_t> counts;
  std::vector<double> dists;
  for (const Record& r : records) {
    counts.push_back(r.outside);
    dists.push_back(r.distance);
  }
  std::sort(counts.begin(), counts.end());
  std::sort(dists.begin(), dists.end());
  const std::size_t median_count = counts[counts.size() / 2];
  const double t1 = dists[dists.size() / 3];
  const double t2 = dists[2 * dists.size() / 3];

  std::map<std::tuple<int, int, int>, std::vector<const Record*>> bins;
  for (const Record& r : records) {
    if (r.l == 0) continue;
    const int cls = r.outside < median_count ? 0 : (r.outside == median_count ? 1 : 2);
    const int ter = r.distance < t1 ? 0 : (r.distance < t2 ? 1 : 2);
    bins[{r.l, cls, ter}].push_back(&r);
  }
  std::size_t within = 0, total = 0;
  for (const auto& [key, members] : bins) {
    if (members.size() < opt.min_bin) {
      rep.excluded_samples += members.size();
      continue;
    }
    ConditionalBinReport b;
    b.l = std::get<0>(key);
    b.outside_class = std::get<1>(key);
    b.distance_tercile = std::get<2>(key);
    b.count = members.size();
    double z[2];
    for (int o = 0; o < 2; ++o) {
      double mean = 0.0, m2 = 0.0;
      std::size_t k = 0;
      for (const Record* r : members) {
        const double d = r->orig[o] - r->fresh[o];
        ++k;
        const double delta = d - mean;
        mean += delta / double(k);
        m2 += delta * (d - mean);
      }
      const double se = std::sqrt(m2 / double(k - 1) / double(k));
      z[o] = se > 0.0 ? mean / se : 0.0;
      ++total;
      if (std::abs(z[o]) < 3.0) ++within;
    }
    b.z_mean = z[0];
    b.z_spread = z[1];
    rep.bins.push_back(b);
  }
  if (total == 0) {
    rep.vacuous = true;
    rep.fraction_within = 1.0;
  } else {
    rep.fraction_within = double(within) / double(total);
  }
  return rep;
}

}  // namespace dppcond
