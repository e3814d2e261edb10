#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dppcond/palm.hpp"
#include "oracles.hpp"

using namespace dppcond;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> distinct_uniform(std::mt19937_64& rng, int count, double lo, double hi, double gap) {
  std::uniform_real_distribution<double> u(lo, hi);
  while (true) {
    std::vector<double> v(count);
    for (auto& x : v) x = u(rng);
    bool ok = true;
    for (int i = 0; i < count && ok; ++i)
      for (int j = 0; j < i && ok; ++j) ok = std::abs(v[i] - v[j]) > gap;
    if (ok) return v;
  }
}

}  // namespace

TEST_CASE("RN derivative components") {
  const auto sine = make_sine_kernel();
  const auto rho = closed_form_log_rho(sine);
  const auto psi = truncated_log_psi(10.0);
  const Configuration x({-6.0, -2.5, 4.0, 8.0}, {-10.0, 10.0});
  CHECK(rn_derivative_order_l(*sine, rho, psi, {0.7}, {0.7}, x, 10.0).log_rn == 0.0);
  const auto r = rn_derivative_order_l(*sine, rho, psi, {1.0, 2.0}, {0.0, 3.0}, x, 10.0);
  CHECK(r.log_vandermonde_ratio == doctest::Approx(std::log(1.0 / 9.0)).epsilon(1e-14));
  CHECK(r.log_rho_ratio == 0.0);
  CHECK(r.log_rn == doctest::Approx(r.log_det_ratio + r.log_vandermonde_ratio + r.log_rho_ratio + r.log_psi));
  CHECK_THROWS_AS(rn_derivative_order_l(*sine, rho, psi, {1.0, 1.0}, {0.0, 3.0}, x, 10.0), DomainError);
  CHECK_THROWS_AS(rn_derivative_order_l(*sine, rho, psi, {1.0}, {4.0}, x, 10.0), SingularConfiguration);
}

TEST_CASE("RN derivative matches the brute-force Hermite Palm densities") {
  std::mt19937_64 rng(91);
  const auto cd = make_cd_kernel(OrthoPolyFamily::hermite(), 4);
  const auto rho = closed_form_log_rho(cd);
  const auto psi = truncated_log_psi(kInf);
  for (int l : {1, 2, 3}) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto pts = distinct_uniform(rng, 4 + l, -2.0, 2.0, 0.05);
      const std::vector<double> p(pts.begin(), pts.begin() + l);
      const std::vector<double> q(pts.begin() + l, pts.begin() + 2 * l);
      const std::vector<double> x(pts.begin() + 2 * l, pts.end());
      const double lib = rn_derivative_order_l(*cd, rho, psi, p, q, Configuration(x, real_line()), kInf).log_rn;
      CHECK(std::abs(lib - oracle::hermite_palm_log_rn(4, p, q, x)) < 1e-6);
    }
  }
}

TEST_CASE("order irrelevance and cocycle") {
  std::mt19937_64 rng(12);
  const auto k = make_bessel_kernel(0.5);
  const auto rho = closed_form_log_rho(k);
  const auto psi = truncated_log_psi(100.0);
  for (int rep = 0; rep < 20; ++rep) {
    const auto pts = distinct_uniform(rng, 26, 0.01, 100.0, 1e-3);
    const Configuration x(std::vector<double>(pts.begin() + 6, pts.end()), {0.0, 100.0});
    const std::vector<double> p = {pts[0], pts[1], pts[2]}, q = {pts[3], pts[4], pts[5]};
    const std::vector<double> pp = {pts[2], pts[0], pts[1]}, qq = {pts[5], pts[3], pts[4]};
    const double a = rn_derivative_order_l(*k, rho, psi, p, q, x, 100.0).log_rn;
    CHECK(a == doctest::Approx(rn_derivative_order_l(*k, rho, psi, pp, qq, x, 100.0).log_rn).epsilon(1e-10));
    CHECK(phi_palm_formula(p, q, x, psi) == doctest::Approx(phi_palm_formula(pp, qq, x, psi)).epsilon(1e-10));

    const auto one = [&](double a1, double b1) {
      return rn_derivative_order_l(*k, rho, psi, {a1}, {b1}, x, 100.0).log_rn;
    };
    CHECK(std::abs(one(pts[0], pts[1]) + one(pts[1], pts[2]) - one(pts[0], pts[2])) < 1e-10);
  }
}

TEST_CASE("palm-dif identity and phi-palm bookkeeping") {
  std::mt19937_64 rng(33);
  const auto sine = make_sine_kernel();
  const auto rho = closed_form_log_rho(sine);
  const auto psi = truncated_log_psi(10.0);
  const Configuration x({-7.0, -3.1, 2.2, 5.0}, {-10.0, 10.0});
  CHECK(palm_dif_identity_check(*sine, rho, psi, {0.4}, {-1.2}, x, 10.0) == 0.0);
  CHECK(phi_palm_formula({1.0, 3.0}, {0.0, 2.0}, Configuration({}, {-10.0, 10.0}), psi) == 0.0);

  for (int l = 1; l <= 3; ++l) {
    for (int rep = 0; rep < 100; ++rep) {
      const bool use_sine = rep % 2 == 0;
      const KernelPtr k = use_sine ? sine : make_bessel_kernel(0.5);
      const Interval w = use_sine ? Interval{-10.0, 10.0} : Interval{0.0, 100.0};
      const auto pts = distinct_uniform(rng, 2 * l + 20, w.lo + 0.01, w.hi, 1e-3);
      const std::vector<double> p(pts.begin(), pts.begin() + l);
      const std::vector<double> q(pts.begin() + l, pts.begin() + 2 * l);
      const Configuration cx(std::vector<double>(pts.begin() + 2 * l, pts.end()), w);
      const auto r = closed_form_log_rho(k);
      const auto ps = truncated_log_psi(w.hi);
      CHECK(palm_dif_identity_check(*k, r, ps, p, q, cx, w.hi) < 1e-10);
      const auto rep_l = rn_derivative_order_l(*k, r, ps, p, q, cx, w.hi);
      CHECK(std::abs(phi_palm_formula(p, q, cx, ps) - (rep_l.log_rn - rep_l.log_det_ratio - rep_l.log_rho_ratio)) < 1e-12);
    }
  }
}

TEST_CASE("log_correlation") {
  const auto sine = make_sine_kernel();
  CHECK(log_correlation(*sine, {0.0, 0.5}) ==
        doctest::Approx(std::log(1 - 4 / (std::numbers::pi * std::numbers::pi))).epsilon(1e-13));
}

TEST_CASE("finite-n Palm integral") {
  CHECK(finite_n_palm_integral_check(OrthoPolyFamily::hermite(), 3, 0.5, -0.5, 24) < 1e-6);
  CHECK(finite_n_palm_integral_check(OrthoPolyFamily::hermite(), 3, 0.4, 0.4, 24) < 1e-13);
  CHECK(finite_n_palm_integral_check(OrthoPolyFamily::jacobi(0.5), 3, 0.3, -0.6, 24) < 1e-6);
  for (int n : {2, 3})
    for (const auto& fam : {OrthoPolyFamily::hermite(), OrthoPolyFamily::jacobi(0.0), OrthoPolyFamily::jacobi(1.5)})
      CHECK(finite_n_palm_integral_check(fam, n, 0.2, -0.35, 20) < 1e-6);
  CHECK_THROWS_AS(finite_n_palm_integral_check(OrthoPolyFamily::hermite(), 5, 0.2, 0.1, 20), DomainError);
}

TEST_CASE("finite-n weight ratios under the scaling maps") {
  const auto jac = rho_finite_n_limit(PolyKind::Jacobi, 1.0, {10, 100, 1000}, 2.0, 1.0);
  for (const auto& e : jac.estimates) CHECK(e.ratio == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(jac.extrapolated == doctest::Approx(2.0).epsilon(1e-10));

  // the calibrated bulk map u = pi x / sqrt(2n) gives exp(-pi^2 (p^2 - q^2) / (2n))
  const auto her = rho_finite_n_limit(PolyKind::Hermite, 0.0, {50, 200, 800}, 1.0, 0.0);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK(her.estimates[0].ratio == doctest::Approx(std::exp(-pi2 / 100)).epsilon(1e-12));
  for (std::size_t i = 1; i < her.estimates.size(); ++i)
    CHECK(std::abs(her.estimates[i].ratio - 1) < std::abs(her.estimates[i - 1].ratio - 1));
  CHECK(std::abs(her.extrapolated - 1) < 1e-3);

  for (const auto& e : rho_finite_n_limit(PolyKind::Jacobi, 0.5, {20, 40}, 3.0, 3.0).estimates) CHECK(e.ratio == 1.0);
}

TEST_CASE("Monte Carlo rho ratios") {
  const auto k = make_bessel_kernel(1.0);
  const auto lam = LambdaRegularizer::zero();
  SamplerConfig cfg;
  cfg.seed = 71;
  cfg.chain_length = 10000;
  const Grid grid = Grid::power({0.0, 400.0}, 150, 3.0, {1.0, 2.0, 3.0});
  RhoMcOptions opt;

  const auto same = rho_estimate_mc(k, lam, 1.5, 1.5, cfg, grid, opt);
  CHECK(same.ratio == 1.0);

  const auto pq = rho_estimate_mc(k, lam, 2.0, 1.0, cfg, grid, opt);
  const auto qr = rho_estimate_mc(k, lam, 1.0, 3.0, cfg, grid, opt);
  const auto pr = rho_estimate_mc(k, lam, 2.0, 3.0, cfg, grid, opt);
  CHECK(std::abs(pq.ratio - 2.0) < 3 * pq.std_error);
  const double c = pq.ratio * qr.ratio / pr.ratio;
  const double rel = std::sqrt(std::pow(pq.std_error / pq.ratio, 2) + std::pow(qr.std_error / qr.ratio, 2) +
                               std::pow(pr.std_error / pr.ratio, 2));
  CHECK(std::abs(c - 1.0) < 3 * rel);

  cfg.chain_length = 500;
  CHECK_THROWS_AS(rho_estimate_mc(k, lam, 2.0, 1.0, cfg, grid, opt), DomainError);
}
