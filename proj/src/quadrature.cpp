#include "dppcond/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

#include <Eigen/Eigenvalues>

namespace dppcond {

QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double mass) {
  const Eigen::Index n = diag.size();
  if (n < 1 || off.size() < n - 1) throw DomainError("golub_welsch: inconsistent recurrence sizes");
  QuadratureRule rule;
  if (n == 1) {
    rule.nodes = diag;
    rule.weights = Eigen::VectorXd::Constant(1, mass);
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off.head(n - 1), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericalError("golub_welsch: eigen-decomposition failed");
  rule.nodes = solver.eigenvalues();
  rule.weights = mass * solver.eigenvectors().row(0).transpose().array().square();
  return rule;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw DomainError("gauss_legendre: n must be positive");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  QuadratureRule rule = golub_welsch(diag, off, 2.0);
  const double half = 0.5 * (b - a);
  rule.nodes = (rule.nodes.array() + 1.0) * half + a;
  rule.weights *= half;
  return rule;
}

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw DomainError("gauss_hermite: n must be positive");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(0.5 * k);
  return golub_welsch(diag, off, std::sqrt(std::numbers::pi));
}

QuadratureRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw DomainError("gauss_jacobi: n must be positive");
  if (!(alpha > -1.0) || !(beta > -1.0)) throw DomainError("gauss_jacobi: exponents must exceed -1");
  Eigen::VectorXd diag(n);
  Eigen::VectorXd off(n);
  const double ab = alpha + beta;
  for (int k = 0; k < n; ++k) {
    if (k == 0) {
      diag[k] = (beta - alpha) / (ab + 2.0);
    } else {
      diag[k] = (beta * beta - alpha * alpha) / ((2.0 * k + ab) * (2.0 * k + ab + 2.0));
    }
    const double j = k + 1.0;
    const double t = 2.0 * j + ab;
    off[k] = std::sqrt(4.0 * j * (j + alpha) * (j + beta) * (j + ab) / (t * t * (t + 1.0) * (t - 1.0)));
  }
  const double mass = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                               std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
  return golub_welsch(diag, off, mass);
}

QuadratureRule composite_gauss_legendre(const std::vector<double>& breaks, int per_cell) {
  if (breaks.size() < 2) throw DomainError("composite_gauss_legendre: need at least two breakpoints");
  const QuadratureRule ref = gauss_legendre(per_cell);
  const auto cells = static_cast<Eigen::Index>(breaks.size() - 1);
  QuadratureRule rule;
  rule.nodes.resize(cells * per_cell);
  rule.weights.resize(cells * per_cell);
  for (Eigen::Index c = 0; c < cells; ++c) {
    const double a = breaks[c];
    const double b = breaks[c + 1];
    if (!(b > a)) throw DomainError("composite_gauss_legendre: breakpoints must increase");
    const double half = 0.5 * (b - a);
    rule.nodes.segment(c * per_cell, per_cell) = (ref.nodes.array() + 1.0) * half + a;
    rule.weights.segment(c * per_cell, per_cell) = ref.weights * half;
  }
  return rule;
}

namespace {

const QuadratureRule& reference_rule() {
  static const QuadratureRule rule = gauss_legendre(10);
  return rule;
}

double gauss10(const std::function<double(double)>& f, double a, double b) {
  const QuadratureRule& ref = reference_rule();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ref.size(); ++i) acc += ref.weights[i] * f(mid + half * ref.nodes[i]);
  return acc * half;
}

struct Segment {
  double a, b, left, right, value, error;
  int depth;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment make_segment(const std::function<double(double)>& f, double a, double b, double whole, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gauss10(f, a, mid);
  const double right = gauss10(f, mid, b);
  return {a, b, left, right, left + right, std::abs(whole - (left + right)), depth};
}

}  // namespace

IntegrationResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                            double rel_tol, int max_depth) {
  if (a == b) return {};
  if (b < a) {
    IntegrationResult r = integrate(f, b, a, abs_tol, rel_tol, max_depth);
    r.value = -r.value;
    return r;
  }
  std::priority_queue<Segment> queue;
  queue.push(make_segment(f, a, b, gauss10(f, a, b), 0));
  double total = queue.top().value;
  double error = queue.top().error;
  IntegrationResult result;
  constexpr int kMaxSegments = 4000;
  int segments = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(total))) {
    Segment worst = queue.top();
    if (worst.depth >= max_depth || segments >= kMaxSegments) {
      result.converged = false;
      break;
    }
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = make_segment(f, worst.a, mid, worst.left, worst.depth + 1);
    Segment right = make_segment(f, mid, worst.b, worst.right, worst.depth + 1);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++segments;
  }
  // recompute the sums to shed accumulated rounding from the incremental updates
  total = 0.0;
  error = 0.0;
  while (!queue.empty()) {
    total += queue.top().value;
    error += queue.top().error;
    queue.pop();
  }
  result.value = total;
  result.error = error;
  return result;
}

IntegrationResult integrate_to_infinity(const std::function<double(double)>& f, double a, double abs_tol,
                                        double rel_tol) {
  if (!(a > 0.0)) throw DomainError("integrate_to_infinity: lower limit must be positive");
  auto g = [&](double tau) {
    const double x = a / (tau * tau);
    if (!std::isfinite(x)) return 0.0;
    return f(x) * 2.0 * a / (tau * tau * tau);
  };
  return integrate(g, 0.0, 1.0, abs_tol, rel_tol);
}

IntegrationResult integrate(const std::function<double(double)>& f, Interval range, double abs_tol,
                            double rel_tol) {
  const bool lo_inf = std::isinf(range.lo);
  const bool hi_inf = std::isinf(range.hi);
  if (!lo_inf && !hi_inf) return integrate(f, range.lo, range.hi, abs_tol, rel_tol);

  IntegrationResult total;
  auto add = [&total](const IntegrationResult& r) {
    total.value += r.value;
    total.error += r.error;
    total.converged = total.converged && r.converged;
  };
  auto upper_tail = [&](const std::function<double(double)>& g, double from) {
    // integral of g over [from, inf)
    if (from > 0.0) {
      add(integrate_to_infinity(g, from, abs_tol, rel_tol));
    } else {
      add(integrate(g, from, 1.0, abs_tol, rel_tol));
      add(integrate_to_infinity(g, 1.0, abs_tol, rel_tol));
    }
  };
  std::function<double(double)> reflected = [&f](double x) { return f(-x); };
  if (lo_inf && hi_inf) {
    upper_tail(f, 0.0);
    upper_tail(reflected, 0.0);
  } else if (hi_inf) {
    upper_tail(f, range.lo);
  } else {
    upper_tail(reflected, -range.hi);
  }
  return total;
}

ChebyshevInterpolant::ChebyshevInterpolant(const std::function<double(double)>& f, Interval range, int nodes) {
  if (nodes < 2 || !range.is_finite() || !(range.hi > range.lo))
    throw DomainError("ChebyshevInterpolant: need a compact interval and at least two nodes");
  nodes_.resize(nodes);
  values_.resize(nodes);
  bary_.resize(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double c = std::cos(std::numbers::pi * j / (nodes - 1));
    nodes_[j] = range.midpoint() + 0.5 * range.length() * c;
    values_[j] = f(nodes_[j]);
    bary_[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == nodes - 1) ? 0.5 : 1.0);
  }
}

double ChebyshevInterpolant::operator()(double x) const {
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index j = 0; j < nodes_.size(); ++j) {
    const double d = x - nodes_[j];
    if (d == 0.0) return values_[j];
    const double w = bary_[j] / d;
    num += w * values_[j];
    den += w;
  }
  return num / den;
}

}  // namespace dppcond
