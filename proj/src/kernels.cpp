#include "dppcond/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dppcond/bessel.hpp"
#include "dppcond/quadrature.hpp"

namespace dppcond {

namespace {

constexpr double kPi = std::numbers::pi;

double fd_step(double x) { return 1e-4 * (1.0 + std::abs(x)); }

}  // namespace

Eigen::MatrixXd Kernel::cross(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  Eigen::MatrixXd out(x.size(), y.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = 0; j < y.size(); ++j) out(i, j) = (*this)(x[i], y[j]);
  return out;
}

Eigen::Vector2d Kernel::gradient(double x, double y) const {
  const double hx = fd_step(x);
  const double hy = fd_step(y);
  return {((*this)(x + hx, y) - (*this)(x - hx, y)) / (2.0 * hx),
          ((*this)(x, y + hy) - (*this)(x, y - hy)) / (2.0 * hy)};
}

Eigen::Matrix2d Kernel::hessian(double x, double y) const {
  const double hx = fd_step(x);
  const double hy = fd_step(y);
  const double k = (*this)(x, y);
  Eigen::Matrix2d h;
  h(0, 0) = ((*this)(x + hx, y) - 2.0 * k + (*this)(x - hx, y)) / (hx * hx);
  h(1, 1) = ((*this)(x, y + hy) - 2.0 * k + (*this)(x, y - hy)) / (hy * hy);
  h(0, 1) = ((*this)(x + hx, y + hy) - (*this)(x + hx, y - hy) - (*this)(x - hx, y + hy) +
             (*this)(x - hx, y - hy)) /
            (4.0 * hx * hy);
  h(1, 0) = h(0, 1);
  return h;
}

double IntegrableKernel::operator()(double x, double y) const {
  if (std::abs(x - y) < confluent_threshold(x)) return diagonal(0.5 * (x + y));
  const Eigen::Vector2d fx = ab(x);
  const Eigen::Vector2d fy = ab(y);
  return (fx[0] * fy[1] - fx[1] * fy[0]) / (x - y);
}

Eigen::MatrixXd IntegrableKernel::cross(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  Eigen::MatrixXd fx(x.size(), 2);
  Eigen::MatrixXd fy(y.size(), 2);
  for (Eigen::Index i = 0; i < x.size(); ++i) fx.row(i) = ab(x[i]).transpose();
  for (Eigen::Index j = 0; j < y.size(); ++j) fy.row(j) = ab(y[j]).transpose();
  Eigen::MatrixXd out(x.size(), y.size());
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double d = x[i] - y[j];
      if (std::abs(d) < confluent_threshold(x[i])) {
        out(i, j) = diagonal(0.5 * (x[i] + y[j]));
      } else {
        out(i, j) = (fx(i, 0) * fy(j, 1) - fx(i, 1) * fy(j, 0)) / d;
      }
    }
  }
  return out;
}

double sine_eval(double x, double y) {
  const double d = x - y;
  if (d == 0.0) return 1.0;
  const double a = kPi * d;
  if (std::abs(a) < 1e-4) return 1.0 - a * a / 6.0 + a * a * a * a / 120.0;
  return std::sin(a) / a;
}

double SineKernel::operator()(double x, double y) const { return sine_eval(x, y); }

Eigen::Vector2d SineKernel::ab(double x) const {
  const double r = 1.0 / std::sqrt(kPi);
  return {std::sin(kPi * x) * r, std::cos(kPi * x) * r};
}

Eigen::Vector2d SineKernel::gradient(double x, double y) const {
  const double d = x - y;
  double g;
  if (std::abs(d) < 1e-4) {
    g = -kPi * kPi * d / 3.0 + std::pow(kPi, 4) * d * d * d / 30.0;
  } else {
    const double a = kPi * d;
    g = (a * std::cos(a) - std::sin(a)) / (kPi * d * d);
  }
  return {g, -g};
}

Eigen::Matrix2d SineKernel::hessian(double x, double y) const {
  const double d = x - y;
  double g2;
  if (std::abs(d) < 1e-3) {
    g2 = -kPi * kPi / 3.0 + std::pow(kPi, 4) * d * d / 10.0;
  } else {
    const double a = kPi * d;
    g2 = (-a * a * std::sin(a) - 2.0 * a * std::cos(a) + 2.0 * std::sin(a)) / (kPi * d * d * d);
  }
  Eigen::Matrix2d h;
  h << g2, -g2, -g2, g2;
  return h;
}

BesselKernel::BesselKernel(BesselKernelParams params) : params_(params) {
  if (!(params.s > -1.0)) throw DomainError("Bessel kernel: s must exceed -1");
}

Eigen::Vector2d BesselKernel::ab(double x) const {
  if (!(x > 0.0)) throw DomainError("Bessel kernel: arguments must be positive");
  const double r = std::sqrt(x);
  return {r * bessel_j(params_.s + 1.0, r) / std::numbers::sqrt2, bessel_j(params_.s, r) / std::numbers::sqrt2};
}

double BesselKernel::diagonal(double x) const {
  if (!(x > 0.0)) throw DomainError("Bessel kernel: arguments must be positive");
  const double r = std::sqrt(x);
  const double s = params_.s;
  const double js = bessel_j(s, r);
  return 0.25 * (js * js - bessel_j(s + 1.0, r) * bessel_j(s - 1.0, r));
}

std::string BesselKernel::label() const {
  std::ostringstream os;
  os << "bessel(s=" << params_.s << ")";
  return os.str();
}

std::optional<double> BesselKernel::log_rho_ratio(double p, double q) const {
  if (!(p > 0.0 && q > 0.0)) throw DomainError("Bessel rho: points must be positive");
  return params_.s * (std::log(p) - std::log(q));
}

double bessel_kernel_eval(const BesselKernelParams& params, double x, double y) {
  return BesselKernel(params)(x, y);
}

std::string CDProjectionKernel::label() const {
  std::ostringstream os;
  os << "cd-" << kernel_.family().label() << "-n" << kernel_.degree();
  return os.str();
}

std::optional<double> CDProjectionKernel::log_rho_ratio(double p, double q) const {
  const OrthoPolyFamily& f = kernel_.family();
  return f.log_weight(p) - f.log_weight(q);
}

std::optional<double> ScaledProjectionKernel::log_rho_ratio(double p, double q) const {
  const OrthoPolyFamily& f = kernel_.base().family();
  if (f.kind() == PolyKind::Jacobi)
    return f.exponent() * (std::log(kernel_.edge_gap(p)) - std::log(kernel_.edge_gap(q)));
  return f.log_weight(kernel_.to_base(p)) - f.log_weight(kernel_.to_base(q));
}

KernelPtr make_sine_kernel() { return std::make_shared<SineKernel>(); }
KernelPtr make_bessel_kernel(double s) { return std::make_shared<BesselKernel>(BesselKernelParams{s}); }
KernelPtr make_cd_kernel(const OrthoPolyFamily& family, int n) {
  return std::make_shared<CDProjectionKernel>(CDKernel(family, n));
}
KernelPtr make_scaled_kernel(ScaledKernel kernel) {
  return std::make_shared<ScaledProjectionKernel>(std::move(kernel));
}

double bessel_recurrence_check(double s, const std::vector<std::pair<double, double>>& grid) {
  const BesselKernel k0({s});
  const BesselKernel k2({s + 2.0});
  double worst = 0.0;
  for (const auto& [x, y] : grid) {
    const double extra = (s + 1.0) / std::sqrt(x * y) * bessel_j(s + 1.0, std::sqrt(x)) * bessel_j(s + 1.0, std::sqrt(y));
    worst = std::max(worst, std::abs(k0(x, y) - k2(x, y) - extra));
  }
  return worst;
}

Configuration::Configuration(std::vector<double> points, Interval window)
    : points_(std::move(points)), window_(window) {
  std::sort(points_.begin(), points_.end());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!window_.contains(points_[i])) throw DomainError("Configuration: point outside the window");
    if (i > 0 && points_[i] == points_[i - 1]) throw DomainError("Configuration: repeated point");
  }
}

std::size_t Configuration::count_in(Interval set) const {
  const auto lo = std::lower_bound(points_.begin(), points_.end(), set.lo);
  const auto hi = std::upper_bound(points_.begin(), points_.end(), set.hi);
  return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
}

Configuration Configuration::restricted(Interval set) const {
  std::vector<double> in;
  for (double x : points_)
    if (set.contains(x)) in.push_back(x);
  return {std::move(in), set};
}

Configuration Configuration::outside(Interval set) const {
  std::vector<double> out;
  for (double x : points_)
    if (!set.contains(x)) out.push_back(x);
  return {std::move(out), window_};
}

Configuration Configuration::with_added(const std::vector<double>& extra) const {
  std::vector<double> all = points_;
  all.insert(all.end(), extra.begin(), extra.end());
  Interval w = window_;
  for (double x : extra) {
    w.lo = std::min(w.lo, x);
    w.hi = std::max(w.hi, x);
  }
  return {std::move(all), w};
}

double correlation_function(const Kernel& kernel, const std::vector<double>& points) {
  if (points.empty()) return 1.0;
  std::vector<double> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return 0.0;
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(points.data(), Eigen::Index(points.size()));
  Eigen::MatrixXd g = kernel.gram(x);
  g = 0.5 * (g + g.transpose()).eval();
  return std::max(0.0, g.determinant());
}

PalmReducedKernel::PalmReducedKernel(KernelPtr base, std::vector<double> points)
    : base_(std::move(base)), points_(std::move(points)) {
  if (!base_) throw DomainError("palm_reduce: null kernel");
  std::vector<double> sorted = points_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw DomainError("palm_reduce: conditioning points must be distinct");
  q_ = Eigen::Map<const Eigen::VectorXd>(points_.data(), Eigen::Index(points_.size()));
  if (q_.size() == 0) return;
  for (double p : points_) {
    if (!base_->in_domain(p)) throw DomainError("palm_reduce: conditioning point outside the domain");
    if (!(base_->diagonal(p) > 0.0)) throw DomainError("palm_reduce: kernel diagonal vanishes at a conditioning point");
  }
  Eigen::MatrixXd g = base_->gram(q_);
  g = 0.5 * (g + g.transpose()).eval();
  gram_.compute(g);
  const double scale = g.diagonal().maxCoeff();
  if (gram_.info() != Eigen::Success ||
      gram_.matrixLLT().diagonal().array().square().minCoeff() < 1e-13 * scale)
    throw DomainError("palm_reduce: Gram matrix of the conditioning points is singular");
}

Eigen::VectorXd PalmReducedKernel::column(double x) const {
  Eigen::VectorXd c(q_.size());
  for (Eigen::Index i = 0; i < q_.size(); ++i) c[i] = (*base_)(q_[i], x);
  return c;
}

double PalmReducedKernel::operator()(double x, double y) const {
  if (q_.size() == 0) return (*base_)(x, y);
  for (double p : points_)
    if (x == p || y == p) return 0.0;
  return (*base_)(x, y) - column(x).dot(gram_.solve(column(y)));
}

Eigen::MatrixXd PalmReducedKernel::cross(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  Eigen::MatrixXd out = base_->cross(x, y);
  if (q_.size() == 0) return out;
  const Eigen::MatrixXd kx = base_->cross(q_, x);
  const Eigen::MatrixXd ky = base_->cross(q_, y);
  out.noalias() -= kx.transpose() * gram_.solve(ky);
  for (double p : points_) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (x[i] == p) out.row(i).setZero();
    for (Eigen::Index j = 0; j < y.size(); ++j)
      if (y[j] == p) out.col(j).setZero();
  }
  return out;
}

std::string PalmReducedKernel::label() const {
  std::ostringstream os;
  os << "palm[" << base_->label() << ";";
  for (std::size_t i = 0; i < points_.size(); ++i) os << (i ? "," : "") << points_[i];
  os << "]";
  return os.str();
}

std::shared_ptr<const PalmReducedKernel> palm_reduce(KernelPtr kernel, const std::vector<double>& points) {
  return std::make_shared<PalmReducedKernel>(std::move(kernel), points);
}

AssumptionReport assumption_diagnostics(const Kernel& kernel, Interval window, double tail_exponent_probe) {
  if (!window.is_finite() || !(window.hi > window.lo))
    throw DomainError("assumption_diagnostics: window must be a compact interval");
  const Interval u = kernel.domain();
  if (!u.contains(window))
    throw DomainError("assumption_diagnostics: window must lie inside the kernel domain");

  AssumptionReport rep;
  rep.trace_integral =
      integrate([&](double x) { return kernel.diagonal(x) / (1.0 + std::abs(x)); }, window, 1e-10, 1e-9).value;
  rep.key_integral =
      integrate([&](double x) { return kernel.diagonal(x) / (1.0 + x * x); }, window, 1e-10, 1e-9).value;

  const double rmax = std::max(std::abs(window.lo), std::abs(window.hi));
  double rmin = (window.lo <= 0.0 && window.hi >= 0.0) ? 0.0 : std::min(std::abs(window.lo), std::abs(window.hi));
  if (tail_exponent_probe > 0.0) rmin = std::max(rmin, tail_exponent_probe * rmax);
  constexpr int kProbe = 400;
  std::vector<double> lx, ly;
  const double t0 = std::log1p(rmin);
  const double t1 = std::log1p(rmax);
  for (int i = 0; i < kProbe; ++i) {
    const double r = std::expm1(t0 + (t1 - t0) * (i + 0.5) / kProbe);
    for (double x : {r, -r}) {
      if (!window.contains(x) || !kernel.in_domain(x)) continue;
      const double d = kernel.diagonal(x);
      if (d > 0.0) {
        lx.push_back(std::log1p(std::abs(x)));
        ly.push_back(std::log(d));
      }
    }
  }
  if (lx.size() >= 2) {
    const Eigen::Map<Eigen::VectorXd> vx(lx.data(), Eigen::Index(lx.size()));
    const Eigen::Map<Eigen::VectorXd> vy(ly.data(), Eigen::Index(ly.size()));
    const Eigen::VectorXd cx = vx.array() - vx.mean();
    const double sxx = cx.squaredNorm();
    rep.growth_exponent = sxx > 0.0 ? cx.dot(vy.array().matrix() - Eigen::VectorXd::Constant(vy.size(), vy.mean())) / sxx : 0.0;
  }
  rep.trace_condition = rep.growth_exponent < -0.1;
  rep.trace_divergent = !rep.trace_condition;
  rep.key_condition = rep.growth_exponent < 0.9;
  rep.growth_below_half = rep.growth_exponent < 0.5;
  return rep;
}

}  // namespace dppcond
