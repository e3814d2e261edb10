#pragma once

// Test-only reference computations, written without the library's quadrature or kernels.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

/// Gauss rule for exp(-x^2) from the eigenpairs of the Jacobi matrix of the physicists' Hermite polynomials.
inline Rule gauss_hermite(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  Rule r;
  for (int k = 0; k < n; ++k) {
    r.x.push_back(es.eigenvalues()[k]);
    const double v = es.eigenvectors()(0, k);
    r.w.push_back(std::sqrt(std::numbers::pi) * v * v);
  }
  return r;
}

/// log of the integral over R^m of prod_{i<j}(x_i - x_j)^2 prod_i prod_k (x_i - a_k)^2 exp(-x_i^2).
inline double log_palm_normalizer(int m, const std::vector<double>& a, const Rule& rule) {
  if (m == 0) return 0.0;
  const int nodes = static_cast<int>(rule.x.size());
  std::vector<int> idx(m, 0);
  double total = 0.0;
  while (true) {
    double v = 1.0;
    for (int i = 0; i < m; ++i) {
      const double xi = rule.x[idx[i]];
      v *= rule.w[idx[i]];
      for (double ak : a) v *= (xi - ak) * (xi - ak);
      for (int j = 0; j < i; ++j) v *= (xi - rule.x[idx[j]]) * (xi - rule.x[idx[j]]);
    }
    total += v;
    int d = 0;
    while (d < m && ++idx[d] == nodes) idx[d++] = 0;
    if (d == m) break;
  }
  return std::log(total);
}

/// log dP^p/dP^q at x for the n-point Hermite ensemble with weight exp(-x^2), from the reduced Palm
/// densities prod_{i<j}(x_i - x_j)^2 prod (x_i - p_k)^2 exp(-x_i^2) / Z_p.
inline double hermite_palm_log_rn(int n, const std::vector<double>& p, const std::vector<double>& q,
                                  const std::vector<double>& x) {
  const int m = n - static_cast<int>(p.size());
  const Rule rule = gauss_hermite(2 * n + 4);
  double acc = log_palm_normalizer(m, q, rule) - log_palm_normalizer(m, p, rule);
  for (double t : x)
    for (std::size_t k = 0; k < p.size(); ++k) acc += std::log((t - p[k]) * (t - p[k]) / ((t - q[k]) * (t - q[k])));
  return acc;
}

}  // namespace oracle
