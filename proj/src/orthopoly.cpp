#include "dppcond/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dppcond {

OrthoPolyFamily OrthoPolyFamily::hermite() { return {PolyKind::Hermite, 0.0}; }

OrthoPolyFamily OrthoPolyFamily::jacobi(double s) {
  if (!(s > -1.0)) throw DomainError("jacobi family: exponent s must exceed -1");
  return {PolyKind::Jacobi, s};
}

Interval OrthoPolyFamily::support() const {
  return kind_ == PolyKind::Hermite ? real_line() : Interval{-1.0, 1.0};
}

std::string OrthoPolyFamily::label() const {
  if (kind_ == PolyKind::Hermite) return "hermite";
  std::ostringstream os;
  os << "jacobi(s=" << s_ << ")";
  return os.str();
}

double OrthoPolyFamily::log_weight(double x) const {
  if (kind_ == PolyKind::Hermite) return -x * x;
  if (!(x >= -1.0 && x <= 1.0)) return -std::numeric_limits<double>::infinity();
  if (s_ == 0.0) return 0.0;
  return s_ * std::log1p(-x);
}

double OrthoPolyFamily::weight(double x) const { return std::exp(log_weight(x)); }

double OrthoPolyFamily::mass() const {
  if (kind_ == PolyKind::Hermite) return std::sqrt(std::numbers::pi);
  return std::pow(2.0, s_ + 1.0) / (s_ + 1.0);
}

OrthoPolyFamily::StandardStep OrthoPolyFamily::standard_step(int k) const {
  if (kind_ == PolyKind::Hermite) return {2.0, 0.0, 2.0 * k};
  const double s = s_;
  if (k == 0) return {0.5 * (s + 2.0), 0.5 * s, 0.0};
  const double m = 2.0 * k + s;
  const double d = 2.0 * (k + 1.0) * (k + s + 1.0) * m;
  return {(m + 1.0) * (m + 2.0) * m / d, (m + 1.0) * s * s / d, 2.0 * (k + s) * k * (m + 2.0) / d};
}

double OrthoPolyFamily::standard_norm_squared(int k) const {
  if (kind_ == PolyKind::Hermite)
    return std::exp(0.5 * std::log(std::numbers::pi) + k * std::log(2.0) + std::lgamma(k + 1.0));
  return std::pow(2.0, s_ + 1.0) / (2.0 * k + s_ + 1.0);
}

double OrthoPolyFamily::recurrence_diag(int k) const {
  if (kind_ == PolyKind::Hermite) return 0.0;
  if (k == 0) return -s_ / (s_ + 2.0);
  return -s_ * s_ / ((2.0 * k + s_) * (2.0 * k + s_ + 2.0));
}

double OrthoPolyFamily::recurrence_offdiag(int k) const {
  if (k < 1) return 0.0;
  if (kind_ == PolyKind::Hermite) return std::sqrt(0.5 * k);
  const double j = k;
  const double t = 2.0 * j + s_;
  return std::sqrt(4.0 * j * (j + s_) * j * (j + s_) / (t * t * (t + 1.0) * (t - 1.0)));
}

QuadratureRule OrthoPolyFamily::gauss_rule(int n) const {
  return kind_ == PolyKind::Hermite ? gauss_hermite(n) : gauss_jacobi(n, s_, 0.0);
}

namespace {

// Orthonormal p_{n-1}, p_n (and derivatives) at x, stored as mantissas sharing the
// factor exp(log_scale); log_scale starts at log sqrt(w(x)).
struct RecurrenceState {
  double prev = 0.0, cur = 0.0, dprev = 0.0, dcur = 0.0;
  double log_scale = 0.0;
};

RecurrenceState run_recurrence(const OrthoPolyFamily& family, int n, double x, bool derivatives) {
  RecurrenceState st;
  st.log_scale = 0.5 * family.log_weight(x);
  double pm1 = 0.0, dpm1 = 0.0;
  double p = 1.0 / std::sqrt(family.mass());
  double dp = 0.0;
  for (int k = 0; k < n; ++k) {
    const double a_next = family.recurrence_offdiag(k + 1);
    const double a_k = family.recurrence_offdiag(k);
    const double shift = x - family.recurrence_diag(k);
    const double next = (shift * p - a_k * pm1) / a_next;
    double dnext = 0.0;
    if (derivatives) dnext = (shift * dp + p - a_k * dpm1) / a_next;
    pm1 = p;
    dpm1 = dp;
    p = next;
    dp = dnext;
    const double mag = std::max(std::abs(p), std::abs(pm1));
    if (mag > 1e150) {
      const double inv = 1.0 / mag;
      p *= inv;
      pm1 *= inv;
      dp *= inv;
      dpm1 *= inv;
      st.log_scale += std::log(mag);
    }
  }
  st.prev = pm1;
  st.cur = p;
  st.dprev = dpm1;
  st.dcur = dp;
  return st;
}

void check_support(const OrthoPolyFamily& family, double x) {
  if (!family.support().contains(x) || std::isnan(x))
    throw DomainError("CD kernel: argument outside the support of " + family.label());
}

}  // namespace

Eigen::VectorXd orthonormal_functions(const OrthoPolyFamily& family, int n, double x) {
  Eigen::VectorXd phi(std::max(n, 0));
  if (n <= 0) return phi;
  double log_scale = 0.5 * family.log_weight(x);
  Eigen::VectorXd mant(n);
  Eigen::VectorXd logs(n);
  double pm1 = 0.0;
  double p = 1.0 / std::sqrt(family.mass());
  for (int k = 0; k < n; ++k) {
    mant[k] = p;
    logs[k] = log_scale;
    const double next = ((x - family.recurrence_diag(k)) * p - family.recurrence_offdiag(k) * pm1) /
                        family.recurrence_offdiag(k + 1);
    pm1 = p;
    p = next;
    const double mag = std::max(std::abs(p), std::abs(pm1));
    if (mag > 1e150) {
      p /= mag;
      pm1 /= mag;
      log_scale += std::log(mag);
    }
  }
  for (int k = 0; k < n; ++k) phi[k] = mant[k] == 0.0 ? 0.0 : mant[k] * std::exp(logs[k]);
  return phi;
}

CDKernel::CDKernel(OrthoPolyFamily family, int n) : family_(family), n_(n) {
  if (n < 1) throw DomainError("CD kernel: degree must be positive");
}

double CDKernel::diagonal(double x) const {
  check_support(family_, x);
  const RecurrenceState st = run_recurrence(family_, n_, x, true);
  const double core = st.dcur * st.prev - st.dprev * st.cur;
  if (core == 0.0) return 0.0;
  return family_.recurrence_offdiag(n_) * core * std::exp(2.0 * st.log_scale);
}

double CDKernel::operator()(double x, double y) const {
  check_support(family_, x);
  check_support(family_, y);
  if (std::abs(x - y) < 1e-6 * (1.0 + std::abs(x))) return diagonal(0.5 * (x + y));
  const RecurrenceState sx = run_recurrence(family_, n_, x, false);
  const RecurrenceState sy = run_recurrence(family_, n_, y, false);
  const double core = sx.cur * sy.prev - sx.prev * sy.cur;
  if (core == 0.0) return 0.0;
  return family_.recurrence_offdiag(n_) * core * std::exp(sx.log_scale + sy.log_scale) / (x - y);
}

double CDKernel::direct_sum(double x, double y) const {
  check_support(family_, x);
  check_support(family_, y);
  return orthonormal_functions(family_, n_, x).dot(orthonormal_functions(family_, n_, y));
}

double jacobi_cd_recurrence_check(int n, double s, const std::vector<std::pair<double, double>>& grid) {
  if (n < 1) throw DomainError("jacobi_cd_recurrence_check: n must be positive");
  const CDKernel lhs(OrthoPolyFamily::jacobi(s), n);
  const OrthoPolyFamily shifted = OrthoPolyFamily::jacobi(s + 1.0);
  const double c = (s + 1.0) / std::pow(2.0, s + 1.0);
  double worst = 0.0;
  for (const auto& [u1, u2] : grid) {
    if (!(std::abs(u1) < 1.0 && std::abs(u2) < 1.0))
      throw DomainError("jacobi_cd_recurrence_check: grid points must lie in (-1, 1)");
    const double f1 = poly_eval(shifted, n - 1, u1) * std::pow(1.0 - u1, 0.5 * s);
    const double f2 = poly_eval(shifted, n - 1, u2) * std::pow(1.0 - u2, 0.5 * s);
    double rhs = c * f1 * f2;
    if (n > 1) rhs += CDKernel(OrthoPolyFamily::jacobi(s + 2.0), n - 1)(u1, u2);
    worst = std::max(worst, std::abs(lhs(u1, u2) - rhs));
  }
  return worst;
}

ScaledKernel ScaledKernel::hermite_bulk(int n) {
  return {CDKernel(OrthoPolyFamily::hermite(), n), 0.0, std::numbers::pi / std::sqrt(2.0 * n)};
}

ScaledKernel ScaledKernel::jacobi_hard_edge(int n, double s) {
  return {CDKernel(OrthoPolyFamily::jacobi(s), n), 1.0, -1.0 / (2.0 * n * double(n))};
}

void ScaledKernel::check(double x) const {
  if (!base_.family().support().contains_open(to_base(x)))
    throw DomainError("scaled kernel: preimage outside the support");
}

double ScaledKernel::operator()(double x, double y) const {
  check(x);
  check(y);
  return jacobian() * base_(to_base(x), to_base(y));
}

double ScaledKernel::diagonal(double x) const {
  check(x);
  return jacobian() * base_.diagonal(to_base(x));
}

Interval ScaledKernel::domain() const {
  const Interval s = base_.family().support();
  const double a = (s.lo - offset_) / slope_;
  const double b = (s.hi - offset_) / slope_;
  return {std::min(a, b), std::max(a, b)};
}

std::string ScaledKernel::label() const {
  std::ostringstream os;
  os << "scaled-" << base_.family().label() << "-n" << base_.degree();
  return os.str();
}

}  // namespace dppcond
