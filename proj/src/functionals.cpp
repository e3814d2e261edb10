#include "dppcond/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dppcond {

LambdaRegularizer LambdaRegularizer::zero() {
  return {[](double) { return 0.0; }, "none", true, true};
}

LambdaRegularizer LambdaRegularizer::rational() {
  return {[](double x) { return x / (x * x + 1.0); }, "rational", true, false};
}

LambdaRegularizer LambdaRegularizer::table(std::vector<double> x, std::vector<double> y) {
  if (x.size() < 2 || x.size() != y.size()) throw DomainError("lambda table: need matching x and y with >= 2 entries");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw DomainError("lambda table: x must increase strictly");
  auto f = [x = std::move(x), y = std::move(y)](double t) {
    if (t < x.front() || t > x.back()) return 1.0 / t;
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    if (it == x.end()) return y.back();
    const std::size_t j = static_cast<std::size_t>(it - x.begin());
    const double w = (t - x[j - 1]) / (x[j] - x[j - 1]);
    return (1.0 - w) * y[j - 1] + w * y[j];
  };
  return {std::move(f), "table", false, false};
}

LambdaRegularizer LambdaRegularizer::custom(std::function<double(double)> f, std::string label, bool odd) {
  if (!f) throw DomainError("lambda: empty function");
  return {std::move(f), std::move(label), odd, false};
}

double LambdaRegularizer::admissibility_bound() const {
  double worst = std::abs(f_(0.0) * 0.0);
  constexpr int kProbe = 400;
  for (int i = 0; i <= kProbe; ++i) {
    const double r = std::pow(10.0, -3.0 + 9.0 * i / kProbe);
    for (double x : {r, -r}) worst = std::max(worst, std::abs(x * x * f_(x) - x));
  }
  return worst;
}

double psi_truncated(double p, double q, const Configuration& x, double radius) {
  double acc = 0.0;
  const double tol = 1e-12 * (1.0 + std::abs(q));
  for (double t : x.points()) {
    if (std::abs(t) > radius) continue;
    if (std::abs(t - q) < tol) throw SingularConfiguration("psi: a particle sits at q");
    acc += 2.0 * (std::log(std::abs(t - p)) - std::log(std::abs(t - q)));
  }
  return acc;
}

namespace {

Interval clip(const Interval& a, const Interval& b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

}  // namespace

double compensator(const Kernel& kernel, const LambdaRegularizer& lambda, double p, double q, double radius) {
  if (lambda.is_zero() || p == q) return 0.0;
  const Interval span = clip({-radius, radius}, kernel.domain());
  if (!(span.hi > span.lo)) return 0.0;
  if (lambda.is_odd() && kernel.even_diagonal() && span.lo == -span.hi) return 0.0;
  const IntegrationResult r =
      integrate([&](double x) { return kernel.diagonal(x) * lambda(x); }, span, 1e-12, 1e-11);
  // oscillating diagonals on infinite ranges can stall just above the target; accept a loose bound
  if (!r.converged && r.error > 1e-8 * std::max(1.0, std::abs(r.value)))
    throw NumericalError("compensator: quadrature did not converge");
  return 2.0 * (p - q) * r.value;
}

FunctionalEstimate psi_regularized(const Kernel& kernel, const LambdaRegularizer& lambda, double p, double q,
                                   const Configuration& x, double radius) {
  FunctionalEstimate est;
  est.radius = radius;
  est.window = clip({-radius, radius}, kernel.domain());
  if (p == q) return est;
  est.compensator = compensator(kernel, lambda, p, q, radius);
  est.log_value = psi_truncated(p, q, x, radius) + est.compensator;
  return est;
}

double particle_split_eval(const FunctionalEstimate& base, const std::vector<double>& extra, double p, double q) {
  double acc = base.log_value;
  const double tol = 1e-12 * (1.0 + std::abs(q));
  for (double t : extra) {
    if (std::abs(t - q) < tol) throw SingularConfiguration("particle_split_eval: a particle sits at q");
    acc += 2.0 * (std::log(std::abs(t - p)) - std::log(std::abs(t - q)));
  }
  return acc;
}

BetaEstimate beta_constant(const Kernel& kernel, const LambdaRegularizer& lambda1, const LambdaRegularizer& lambda2,
                           Interval window) {
  const Interval u = kernel.domain();
  const Interval w = clip(window, u);
  if (!w.is_finite() || !(w.hi > w.lo)) throw DomainError("beta_constant: window must be compact inside the domain");
  auto diff = [&](double x) { return lambda1(x) - lambda2(x); };
  BetaEstimate est;
  const IntegrationResult inner = integrate([&](double x) { return diff(x) * kernel.diagonal(x); }, w, 1e-12, 1e-11);
  est.window_value = inner.value;
  est.error = inner.error;

  // power-law continuation of the diagonal beyond each open side of the window
  auto side_tail = [&](double edge, double direction) {
    constexpr int kFit = 64;
    const double width = 0.5 * w.length();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (int i = 0; i < kFit; ++i) {
      const double x = edge - direction * width * (i + 0.5) / kFit;
      const double d = kernel.diagonal(x);
      if (!(d > 0.0)) continue;
      const double lx = std::log1p(std::abs(x));
      const double ly = std::log(d);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++m;
    }
    if (m < 2) return 0.0;
    const double den = m * sxx - sx * sx;
    const double alpha = den != 0.0 ? (m * sxy - sx * sy) / den : 0.0;
    const double amp = (sy - alpha * sx) / m;
    auto model = [&](double x) { return diff(x) * std::exp(amp + alpha * std::log1p(std::abs(x))); };
    const Interval beyond = direction > 0 ? Interval{edge, u.hi} : Interval{u.lo, edge};
    if (!(beyond.hi > beyond.lo)) return 0.0;
    return integrate(model, beyond, 1e-12, 1e-10).value;
  };
  if (u.hi > w.hi) est.tail += side_tail(w.hi, 1.0);
  if (u.lo < w.lo) est.tail += side_tail(w.lo, -1.0);
  est.value = est.window_value + est.tail;
  est.error += 0.5 * std::abs(est.tail);
  return est;
}

double tail_correction(const Kernel& density, const Kernel& base, const LambdaRegularizer& lambda, double a, double b,
                       Interval inner) {
  if (a == b) return 0.0;
  const Interval u = base.domain();
  auto g = [&](double x) {
    // log|(x - a)/(x - b)| without cancellation at large |x|
    double v = 2.0 * std::log1p((b - a) / (x - b)) * density.diagonal(x);
    if (!lambda.is_zero()) v += 2.0 * (a - b) * lambda(x) * base.diagonal(x);
    return v;
  };
  double acc = 0.0;
  if (u.hi > inner.hi) acc += integrate(g, Interval{inner.hi, u.hi}, 1e-11, 1e-9).value;
  if (u.lo < inner.lo) acc += integrate(g, Interval{u.lo, inner.lo}, 1e-11, 1e-9).value;
  return acc;
}

TailModel::TailModel(const Kernel& density, const Kernel& base, const LambdaRegularizer& lambda, Interval inner,
                     Interval range)
    : anchor_(range.midpoint()) {
  if (!(range.lo > inner.lo && range.hi < inner.hi)) throw DomainError("TailModel: range must lie inside the window");
  interp_ = ChebyshevInterpolant(
      [&](double t) { return tail_correction(density, base, lambda, t, anchor_, inner); }, range, 16);
}

double TailModel::operator()(double a, double b) const {
  if (interp_.empty() || a == b) return 0.0;
  return interp_(a) - interp_(b);
}

TruncationSchedule TruncationSchedule::quartic(int count, double max_radius) {
  if (count < 2 || !(max_radius > 0.0)) throw DomainError("TruncationSchedule: need count >= 2 and a positive radius");
  TruncationSchedule s;
  for (int n = 1; n <= count; ++n) s.radii.push_back(max_radius * std::pow(double(n) / count, 4.0));
  return s;
}

TruncationSchedule TruncationSchedule::explicit_radii(std::vector<double> radii) {
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw DomainError("TruncationSchedule: radii must increase strictly");
  if (radii.empty() || !(radii.front() > 0.0)) throw DomainError("TruncationSchedule: radii must be positive");
  return {std::move(radii)};
}

VarianceScan variance_scan(const std::vector<Configuration>& samples, double p, double q,
                           const TruncationSchedule& schedule) {
  if (samples.size() < 1000) throw DomainError("variance_scan: at least 1000 samples are required");
  const Interval win = samples.front().window();
  if (schedule.radii.back() > std::max(std::abs(win.lo), std::abs(win.hi)))
    throw DomainError("variance_scan: radii exceed the sampling window");
  VarianceScan scan;
  scan.samples = samples.size();
  const double n = double(samples.size());
  for (double r : schedule.radii) {
    double mean = 0.0, m2 = 0.0;
    std::size_t k = 0;
    for (const Configuration& c : samples) {
      double s = 0.0;
      for (double x : c.points())
        if (std::abs(x) >= r) s += 2.0 * (std::log(std::abs(x - p)) - std::log(std::abs(x - q)));
      ++k;
      const double delta = s - mean;
      mean += delta / double(k);
      m2 += delta * (s - mean);
    }
    scan.points.emplace_back(r, std::max(0.0, m2 / (n - 1.0)));
    scan.means.push_back(mean);
  }
  std::vector<double> lx, ly;
  for (const auto& [r, v] : scan.points)
    if (v > 0.0) {
      lx.push_back(std::log(r));
      ly.push_back(std::log(v));
    }
  if (lx.size() < 2) {
    scan.slope = std::numeric_limits<double>::quiet_NaN();
    return scan;
  }
  const Eigen::Map<Eigen::VectorXd> vx(lx.data(), Eigen::Index(lx.size()));
  const Eigen::Map<Eigen::VectorXd> vy(ly.data(), Eigen::Index(ly.size()));
  const Eigen::VectorXd cx = vx.array() - vx.mean();
  const Eigen::VectorXd cy = vy.array() - vy.mean();
  scan.slope = cx.dot(cy) / cx.squaredNorm();
  return scan;
}

VarianceScan variance_scan(const DiscretizedKernel& dk, double p, double q, const TruncationSchedule& schedule,
                           const SamplerConfig& cfg) {
  return variance_scan(dpp_sample(dk, cfg).samples, p, q, schedule);
}

}  // namespace dppcond
