#include <cmath>
#include <random>

#include "doctest.h"
#include "dppcond/conditional.hpp"

using namespace dppcond;

namespace {

const Interval kWindow{-15.0, 15.0};

WindowCondition condition(std::vector<double> outside, Interval interval, Interval window = kWindow) {
  return WindowCondition::from(Configuration(std::move(outside), window), interval);
}

std::vector<double> sorted_uniform(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("window condition splits a configuration") {
  const Configuration x({-3.0, 0.2, 0.7, 4.0}, kWindow);
  const WindowCondition c = WindowCondition::from(x, {0.0, 1.0});
  CHECK(c.inside_count == 2);
  CHECK(c.outside.points() == std::vector<double>{-3.0, 4.0});
  CHECK_THROWS_AS(WindowCondition::from(x, {1.0, 1.0}), DomainError);
}

TEST_CASE("conditional weight examples") {
  const auto sine = make_sine_kernel();
  const auto zero = LambdaRegularizer::zero();
  const ConditionalWeight empty(sine, zero, condition({}, {0.0, 1.0}), 0.0);
  for (double p : {0.0, 0.3, 1.0}) CHECK(empty.log_ratio(p) == 0.0);

  const ConditionalWeight one(sine, zero, condition({10.0}, {0.0, 1.0}), 0.0);
  CHECK(std::exp(one.log_ratio(1.0)) == doctest::Approx(0.81).epsilon(1e-14));

  const ConditionalWeight bessel(make_bessel_kernel(1.0), zero, condition({}, {1.0, 2.0}, {0.0, 100.0}), 1.0);
  CHECK(bessel.ratio(2.0, 1.0) == doctest::Approx(2.0).epsilon(1e-13));

  CHECK_THROWS_AS(ConditionalWeight(sine, zero, condition({}, {0.0, 1.0}), 2.0), DomainError);
  const WindowCondition meets{{0.0, 3.0}, Configuration({2.0}, kWindow), 0};
  CHECK_THROWS_AS(ConditionalWeight(sine, zero, meets, 1.0), DomainError);
  CHECK_THROWS_AS(one.log_ratio(1.5), DomainError);
}

TEST_CASE("conditional weight cocycle and empty-outside reduction") {
  std::mt19937_64 rng(8);
  const auto k = make_bessel_kernel(0.5);
  const auto lam = LambdaRegularizer::rational();
  const Interval interval{2.0, 4.0};
  std::vector<double> out;
  for (double x : sorted_uniform(rng, 30, 0.01, 50.0))
    if (!interval.contains(x)) out.push_back(x);
  const ConditionalWeight w(k, lam, condition(out, interval, {0.0, 50.0}), 3.0);
  std::uniform_real_distribution<double> u(2.0, 4.0);
  for (int rep = 0; rep < 50; ++rep) {
    const double p = u(rng), q = u(rng), r = u(rng);
    CHECK(std::abs(std::log(w.ratio(p, q)) + std::log(w.ratio(q, r)) - std::log(w.ratio(p, r))) < 1e-12);
  }
  const ConditionalWeight bare(k, LambdaRegularizer::zero(), condition({}, interval, {0.0, 50.0}), 3.0);
  for (double p : {2.0, 2.5, 3.9}) CHECK(bare.log_ratio(p) == doctest::Approx(*k->log_rho_ratio(p, 3.0)).epsilon(1e-14));
}

TEST_CASE("conditional density") {
  const auto sine = make_sine_kernel();
  const ConditionalWeight w(sine, LambdaRegularizer::zero(), condition({10.0}, {0.0, 1.0}), 0.0);
  const OPESpec none = conditional_density(w, 0);
  CHECK(none.l == 0);
  CHECK(ope_log_density(none, {}) == 0.0);
  const OPESpec one = conditional_density(w, 1);
  CHECK(ope_log_density(one, {0.6}) == doctest::Approx(2 * std::log(9.4 / 10.0)));

  // w(t) = ((10 - t) / 10)^2, Vandermonde (t1 - t2)^2
  const OPESpec two = conditional_density(w, 2);
  const auto hand = [](double a, double b) {
    return std::pow(b - a, 2) * std::pow((10 - a) * (10 - b) / 100, 2);
  };
  const double diff = ope_log_density(two, {0.1, 0.9}) - ope_log_density(two, {0.4, 0.6});
  CHECK(diff == doctest::Approx(std::log(hand(0.1, 0.9) / hand(0.4, 0.6))).epsilon(1e-13));
  CHECK_THROWS_AS(conditional_density(w, -1), DomainError);
}

TEST_CASE("finite-n conditional factorization") {
  const auto herm = OrthoPolyFamily::hermite();
  CHECK(finite_n_conditional_check(herm, 5, {-1.0, 1.0}, {-3.0, -2.5, 2.8}, {{-0.5, 0.3}, {0.1, 0.9}, {-0.9, -0.2}}) <
        1e-10);
  CHECK(finite_n_conditional_check(herm, 3, {-2.0, 2.0}, {}, {{-1.0, 0.0, 1.5}, {0.2, 0.4, -1.9}}) < 1e-12);
  CHECK(finite_n_conditional_check(OrthoPolyFamily::jacobi(0.5), 4, {-0.2, 0.3}, {-0.9, -0.5, 0.8}, {{0.0}, {0.25}}) <
        1e-10);

  std::mt19937_64 rng(19);
  for (const auto& fam : {herm, OrthoPolyFamily::jacobi(0.5)}) {
    const bool h = fam.kind() == PolyKind::Hermite;
    for (int rep = 0; rep < 50; ++rep) {
      const int n = 2 + rep % 5;
      const int l = 1 + rep % n;
      const Interval interval = h ? Interval{-0.8, 0.6} : Interval{-0.3, 0.4};
      std::vector<double> out;
      while (static_cast<int>(out.size()) < n - l) {
        const double x = sorted_uniform(rng, 1, h ? -3.0 : -0.99, h ? 3.0 : 0.99)[0];
        if (!interval.contains(x)) out.push_back(x);
      }
      std::vector<std::vector<double>> tuples;
      for (int t = 0; t < 4; ++t) tuples.push_back(sorted_uniform(rng, l, interval.lo, interval.hi));
      CHECK(finite_n_conditional_check(fam, n, interval, out, tuples) < 1e-10);
    }
  }
  CHECK_THROWS_AS(finite_n_conditional_check(herm, 4, {-1.0, 1.0}, {2.0}, {{0.0}}), DomainError);
}

TEST_CASE("piecewise isometries") {
  const PiecewiseIsometry t = PiecewiseIsometry::exchange({0.0, 0.5}, {0.5, 1.0});
  CHECK(t(0.2) == doctest::Approx(0.7));
  CHECK(t(0.7) == doctest::Approx(0.2));
  CHECK(t(3.0) == 3.0);
  for (double x : {-1.0, 0.0, 0.1, 0.49, 0.5, 0.93, 2.0}) CHECK(t(t(x)) == doctest::Approx(x).epsilon(1e-15));
  CHECK(t.support().lo == 0.0);
  CHECK(t.support().hi == 1.0);
  CHECK(PiecewiseIsometry().is_identity());
  CHECK_THROWS_AS(PiecewiseIsometry::exchange({0.0, 0.5}, {0.4, 1.0}), DomainError);
  CHECK_THROWS_AS(PiecewiseIsometry({{{0.0, 1.0}, 0.5}}), DomainError);

  Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(20, 0.025, 0.975);
  CHECK(t.maps_grid(g));
  CHECK_FALSE(PiecewiseIsometry::exchange({0.0, 0.5}, {0.51, 1.01}).maps_grid(g));
}

TEST_CASE("quasi-invariance RN") {
  const auto sine = make_sine_kernel();
  const auto lam = LambdaRegularizer::rational();
  const Configuration x({-4.0, 0.1, 0.3, 0.8, 6.0}, kWindow);
  CHECK(log_qi_rn(*sine, lam, PiecewiseIsometry(), x, 15.0) == 0.0);

  // one particle moved 0.1 -> 0.6; the factors of the others and the Vandermonde partner 0.3 -> 0.8 stay consistent
  const PiecewiseIsometry t = PiecewiseIsometry::exchange({0.0, 0.5}, {0.5, 1.0});
  const Configuration y({-4.0, 0.1, 6.0}, kWindow);
  const double expect = 2 * (std::log(std::abs(-4.0 - 0.6)) - std::log(std::abs(-4.0 - 0.1))) +
                        2 * (std::log(std::abs(6.0 - 0.6)) - std::log(std::abs(6.0 - 0.1)));
  CHECK(log_qi_rn(*sine, lam, t, y, 15.0) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("quasi-invariance by quadrature at finite n") {
  const std::vector<Statistic> stats = {
      {"count", [](const Configuration& c) { return static_cast<double>(c.count_in({0.0, 0.5})); }},
      {"bump", [](const Configuration& c) {
         double s = 0.0;
         for (double x : c.points()) s += std::exp(-std::pow((x - 0.3) / 0.3, 2));
         return s;
       }}};
  const auto id = quasi_invariance_quadrature(OrthoPolyFamily::hermite(), 3, PiecewiseIsometry(), stats, 6);
  CHECK(id.max_residual < 1e-12);
  const auto t = PiecewiseIsometry::exchange({0.0, 0.5}, {0.5, 1.0});
  const auto rep = quasi_invariance_quadrature(OrthoPolyFamily::hermite(), 4, t, stats, 8);
  CHECK(rep.max_residual < 1e-6);
  const auto jac = quasi_invariance_quadrature(OrthoPolyFamily::jacobi(0.5), 3,
                                               PiecewiseIsometry::exchange({-0.6, -0.2}, {0.1, 0.5}), stats, 8);
  CHECK(jac.max_residual < 1e-6);
}

TEST_CASE("quasi-invariance Monte Carlo report") {
  const auto sine = make_sine_kernel();
  const DiscretizedKernel dk = discretize(*sine, {-10.0, 10.0}, 200);
  SamplerConfig cfg;
  cfg.seed = 52;
  cfg.chain_length = 2000;
  const auto samples = dpp_sample(dk, cfg).samples;
  const std::vector<Statistic> stats = {
      {"count", [](const Configuration& c) { return static_cast<double>(c.count_in({0.0, 0.5})); }}};
  const QIReport id = quasi_invariance_check(*sine, LambdaRegularizer::rational(), PiecewiseIsometry(), stats, samples);
  CHECK(id.statistics[0].pushforward_mean == doctest::Approx(id.statistics[0].reweighted_mean));
  CHECK(id.pass());
  CHECK_THROWS_AS(quasi_invariance_check(*sine, LambdaRegularizer::rational(), PiecewiseIsometry(), stats,
                                         std::vector<Configuration>(samples.begin(), samples.begin() + 999)),
                  DomainError);
  CHECK_THROWS_AS(quasi_invariance_check(*sine, LambdaRegularizer::rational(),
                                         PiecewiseIsometry::exchange({0.0, 1.0}, {12.0, 13.0}), stats, samples),
                  DomainError);
}

TEST_CASE("conditional Monte Carlo check is vacuous without inside particles") {
  std::vector<Configuration> samples(300, Configuration({-3.0, 2.5}, {-5.0, 5.0}));
  SamplerConfig cfg;
  const ConditionalReport r = conditional_mc_verification(make_sine_kernel(), LambdaRegularizer::zero(), {0.0, 1.0},
                                                          samples, cfg);
  CHECK(r.vacuous);
  CHECK(r.pass());
  CHECK(r.bins.empty());
  CHECK_THROWS_AS(conditional_mc_verification(make_sine_kernel(), LambdaRegularizer::zero(), {4.5, 5.0}, samples, cfg),
                  DomainError);
}
