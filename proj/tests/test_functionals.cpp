#include <cmath>
#include <random>

#include "doctest.h"
#include "dppcond/functionals.hpp"

using namespace dppcond;

namespace {

Configuration random_config(std::mt19937_64& rng, Interval window, int n) {
  std::uniform_real_distribution<double> u(window.lo, window.hi);
  std::vector<double> pts;
  for (int i = 0; i < n; ++i) pts.push_back(u(rng));
  std::sort(pts.begin(), pts.end());
  return Configuration(pts, window);
}

// (x + 1) / (x^2 + 1): admissible, neither odd nor zero
LambdaRegularizer shifted() {
  return LambdaRegularizer::custom([](double x) { return (x + 1) / (x * x + 1); }, "shifted");
}

}  // namespace

TEST_CASE("lambda regularizers") {
  const auto r = LambdaRegularizer::rational();
  CHECK(r(2.0) == doctest::Approx(0.4));
  CHECK(r.is_odd());
  // |x^2 x / (x^2 + 1) - x| = |x| / (x^2 + 1), largest at |x| = 1
  CHECK(r.admissibility_bound() == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(LambdaRegularizer::zero().is_zero());
  const auto t = LambdaRegularizer::table({-1.0, 0.0, 1.0}, {-0.5, 0.0, 0.5});
  CHECK(t(0.5) == doctest::Approx(0.25));
  CHECK(t(4.0) == doctest::Approx(0.25));
  CHECK(std::isfinite(t.admissibility_bound()));
  CHECK_THROWS_AS(LambdaRegularizer::table({1.0, 0.0}, {0.0, 0.0}), DomainError);
}

TEST_CASE("psi_truncated") {
  const Interval w{-10.0, 10.0};
  CHECK(psi_truncated(1.0, 2.0, Configuration({}, w), 5.0) == 0.0);
  CHECK(psi_truncated(1.3, 1.3, Configuration({-4.0, 0.5, 3.0}, w), 5.0) == 0.0);
  CHECK(psi_truncated(1.0, 2.0, Configuration({3.0}, w), 5.0) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(psi_truncated(1.0, 2.0, Configuration({3.0, 7.0}, w), 5.0) == doctest::Approx(std::log(4.0)));
  CHECK_THROWS_AS(psi_truncated(1.0, 2.0, Configuration({2.0}, w), 5.0), SingularConfiguration);
}

TEST_CASE("compensator and regularized functional") {
  const auto sine = make_sine_kernel();
  const auto lam = LambdaRegularizer::rational();
  std::mt19937_64 rng(2);
  const Configuration x = random_config(rng, {-20.0, 20.0}, 40);
  for (double r : {1.0, 5.0, 17.5}) {
    CHECK(std::abs(compensator(*sine, lam, 0.3, -0.8, r)) < 1e-12);
    const auto est = psi_regularized(*sine, lam, 0.3, -0.8, x, r);
    CHECK(est.log_value == doctest::Approx(psi_truncated(0.3, -0.8, x, r)).epsilon(1e-12));
    CHECK(psi_regularized(*sine, lam, 0.4, 0.4, x, r).log_value == 0.0);
  }
  // sine, shifted lambda: 2 (p - q) int_{-R}^{R} (x + 1)/(x^2 + 1) dx = 2 (p - q) 2 atan R
  CHECK(compensator(*sine, shifted(), 1.0, 0.0, 3.0) == doctest::Approx(4 * std::atan(3.0)).epsilon(1e-9));
}

TEST_CASE("Bessel regularized values settle as R grows") {
  const auto k = make_bessel_kernel(0.0);
  const auto lam = LambdaRegularizer::rational();
  const Configuration x({0.5, 3.0, 20.0, 70.0}, {0.0, 1e4});
  std::vector<double> v;
  for (double r : {1e2, 1e3, 1e4}) v.push_back(psi_regularized(*k, lam, 2.0, 1.0, x, r).log_value);
  CHECK(std::abs(v[2] - v[1]) < std::abs(v[1] - v[0]));
}

TEST_CASE("cocycle for truncated and regularized functionals") {
  std::mt19937_64 rng(4);
  const auto k = make_bessel_kernel(0.5);
  const auto lam = LambdaRegularizer::rational();
  for (int rep = 0; rep < 20; ++rep) {
    const Configuration x = random_config(rng, {0.0, 50.0}, 30);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    const double p = u(rng), q = u(rng), r = u(rng);
    const double t = psi_truncated(p, q, x, 40.0) + psi_truncated(q, r, x, 40.0) - psi_truncated(p, r, x, 40.0);
    CHECK(std::abs(t) < 1e-12);
    const double g = psi_regularized(*k, lam, p, q, x, 40.0).log_value +
                     psi_regularized(*k, lam, q, r, x, 40.0).log_value -
                     psi_regularized(*k, lam, p, r, x, 40.0).log_value;
    CHECK(std::abs(g) < 1e-9);
  }
}

TEST_CASE("beta constant") {
  const auto k = make_bessel_kernel(1.0);
  const auto a = LambdaRegularizer::rational();
  const auto b = shifted();
  const Interval w{0.0, 30.0};
  CHECK(beta_constant(*k, a, a, w).value == 0.0);
  const auto ab = beta_constant(*k, a, b, w);
  const auto ba = beta_constant(*k, b, a, w);
  CHECK(ab.value == doctest::Approx(-ba.value).epsilon(1e-12));
  CHECK(ab.value == doctest::Approx(ab.window_value + ab.tail));

  // lambda enters only through the compensator
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 5; ++rep) {
    const Configuration x = random_config(rng, w, 25);
    const double p = 2.5, q = 1.5;
    const double lhs = psi_regularized(*k, a, p, q, x, 30.0).log_value - psi_regularized(*k, b, p, q, x, 30.0).log_value;
    CHECK(lhs == doctest::Approx(2 * (p - q) * ab.window_value).epsilon(1e-8));
  }
}

TEST_CASE("particle split") {
  const Interval w{-10.0, 10.0};
  const auto sine = make_sine_kernel();
  const auto lam = LambdaRegularizer::zero();
  const auto empty = psi_regularized(*sine, lam, 1.0, 2.0, Configuration({}, w), 9.0);
  CHECK(particle_split_eval(empty, {}, 1.0, 2.0) == empty.log_value);
  CHECK(particle_split_eval(empty, {3.0}, 1.0, 2.0) ==
        doctest::Approx(psi_regularized(*sine, lam, 1.0, 2.0, Configuration({3.0}, w), 9.0).log_value));
  CHECK(particle_split_eval(empty, {3.0, -4.0, 6.5}, 1.0, 2.0) ==
        doctest::Approx(particle_split_eval(empty, {6.5, 3.0, -4.0}, 1.0, 2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(particle_split_eval(empty, {2.0}, 1.0, 2.0), SingularConfiguration);
}

TEST_CASE("truncation schedules") {
  const auto s = TruncationSchedule::quartic(4, 256.0);
  REQUIRE(s.radii.size() == 4);
  CHECK(s.radii[0] == doctest::Approx(1.0));
  CHECK(s.radii[3] == doctest::Approx(256.0));
  CHECK_THROWS_AS(TruncationSchedule::explicit_radii({2.0, 1.0}), DomainError);
}

TEST_CASE("variance scan basics") {
  const DiscretizedKernel dk = discretize(*make_sine_kernel(), {-10.0, 10.0}, 200);
  SamplerConfig cfg;
  cfg.seed = 31;
  cfg.chain_length = 1000;
  const auto schedule = TruncationSchedule::explicit_radii({2.0, 4.0, 8.0});
  const VarianceScan same = variance_scan(dk, 0.5, 0.5, schedule, cfg);
  for (const auto& [r, v] : same.points) CHECK(v == 0.0);
  const VarianceScan scan = variance_scan(dk, 0.5, -0.5, schedule, cfg);
  REQUIRE(scan.points.size() == 3);
  for (const auto& [r, v] : scan.points) CHECK(v >= 0.0);
  CHECK(scan.points[0].second > scan.points[2].second);

  cfg.chain_length = 999;
  CHECK_THROWS_AS(variance_scan(dk, 0.5, -0.5, schedule, cfg), DomainError);
}

TEST_CASE("tail correction is small for a distant window edge") {
  const auto sine = make_sine_kernel();
  const auto lam = LambdaRegularizer::rational();
  const double near = tail_correction(*sine, *sine, lam, 0.7, 0.2, {-15.0, 15.0});
  const double far = tail_correction(*sine, *sine, lam, 0.7, 0.2, {-150.0, 150.0});
  CHECK(std::abs(far) < std::abs(near));
  CHECK(tail_correction(*sine, *sine, lam, 0.4, 0.4, {-15.0, 15.0}) == doctest::Approx(0.0));
  const TailModel model(*sine, *sine, lam, {-15.0, 15.0}, {-2.0, 2.0});
  CHECK(model(0.7, 0.2) == doctest::Approx(near).epsilon(1e-6));
}
