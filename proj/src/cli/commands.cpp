#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "dppcond/cli.hpp"
#include "dppcond/conditional.hpp"
#include "dppcond/palm.hpp"

namespace dppcond::cli {

const std::vector<CommandInfo>& commands() {
  static const std::vector<CommandInfo> list{
      {"kernel-table", "kernel values on a square grid", "x,y,value"},
      {"sample", "draws from the discretized (Palm) process", "sample,count,x_1,...,x_count"},
      {"psi-scan", "mean and variance of the tail of log Psi beyond R", "radius,mean_log_psi_tail,variance"},
      {"rho-estimate", "Monte Carlo rho ratios from Palm samples",
       "p,q,ratio,std_error,target,mean_psi,median_batch_mean,heavy_tail"},
      {"verify-palm", "finite-n Palm integral identity and derivative decompositions", "check,p,q,residual"},
      {"verify-conditional", "conditional weights: exact finite-n algebra or Monte Carlo regeneration",
       "finite-n: instance,n,l,residual; Monte Carlo: l,outside_class,distance_tercile,count,z_mean,z_spread"},
      {"verify-qi", "quasi-invariance under interval exchanges",
       "exchange,statistic,pushforward,reweighted,std_error,z"},
      {"limits", "scaled Christoffel-Darboux kernels against their limits", "n,max_error,rho_ratio"},
  };
  return list;
}

namespace {

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

struct Criterion {
  std::string name;
  double value = 0.0;
  json tolerance;
  bool pass = false;
};

struct Report {
  std::vector<Criterion> criteria;
  std::ostringstream csv;
  json details = json::object();
  std::vector<std::string> warnings;

  void check(std::string name, double value, json tolerance, bool pass) {
    criteria.push_back({std::move(name), value, std::move(tolerance), pass});
  }
  void below(std::string name, double value, double tol) { check(std::move(name), value, tol, value < tol); }
};

std::vector<double> numbers(const json& j) { return j.get<std::vector<double>>(); }

std::vector<std::pair<double, double>> square(const std::vector<double>& range, int points) {
  if (range.size() != 2 || !(range[1] > range[0]) || points < 2)
    throw ConfigError("field 'experiment.range'/'points': expected [lo, hi] and at least two points");
  std::vector<std::pair<double, double>> g;
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j)
      g.emplace_back(range[0] + (range[1] - range[0]) * i / (points - 1),
                     range[0] + (range[1] - range[0]) * j / (points - 1));
  return g;
}

bool is_cd(const KernelSpec& k) { return k.type == "hermite-cd" || k.type == "jacobi-cd"; }

OrthoPolyFamily family_of(const KernelSpec& k) {
  return k.type == "hermite-cd" ? OrthoPolyFamily::hermite() : OrthoPolyFamily::jacobi(k.s);
}

// interval where random test points keep the correlation determinants well away from underflow
Interval core_range(const ExperimentConfig& cfg, const Kernel& kernel) {
  Interval r = cfg.window;
  const Interval u = kernel.domain();
  if (cfg.kernel.type == "hermite-cd") {
    const double edge = std::sqrt(2.0 * cfg.kernel.n);
    r = {std::max(r.lo, -edge), std::min(r.hi, edge)};
  }
  const double margin = 1e-3 * (1.0 + u.length() * (u.is_finite() ? 1.0 : 0.0));
  if (std::isfinite(u.lo)) r.lo = std::max(r.lo, u.lo + margin);
  if (std::isfinite(u.hi)) r.hi = std::min(r.hi, u.hi - margin);
  if (!(r.hi > r.lo)) throw ConfigError("field 'window': no room inside the kernel domain");
  return r;
}

double admissible_radius(const Interval& window, const Interval& u) {
  double r = std::numeric_limits<double>::infinity();
  if (u.hi > window.hi) r = std::min(r, window.hi);
  if (u.lo < window.lo) r = std::min(r, -window.lo);
  if (!std::isfinite(r)) r = std::max(std::abs(window.lo), std::abs(window.hi));
  return r;
}

std::vector<double> distinct(Rng& rng, int count, Interval range, double gap) {
  std::uniform_real_distribution<double> u(range.lo, range.hi);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<double> v(count);
    for (auto& x : v) x = u(rng);
    bool ok = true;
    for (int i = 0; i < count && ok; ++i)
      for (int j = 0; j < i && ok; ++j) ok = std::abs(v[i] - v[j]) > gap;
    if (ok) return v;
  }
  throw ConfigError("cannot place distinct random points in the window");
}

std::string joined(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + num(v[i]);
  return s;
}

void kernel_table(const ExperimentConfig& cfg, Report& rep) {
  const KernelPtr k = make_kernel(cfg.kernel);
  const auto grid = square(numbers(cfg.experiment["range"]), cfg.experiment["points"].get<int>());
  rep.csv << "x,y,value\n";
  double asym = 0.0;
  for (const auto& [x, y] : grid) {
    const double v = (*k)(x, y);
    asym = std::max(asym, std::abs(v - (*k)(y, x)) / (1.0 + std::abs(v)));
    rep.csv << num(x) << "," << num(y) << "," << num(v) << "\n";
  }
  rep.below("symmetry", asym, 1e-10);
}

void sample(const ExperimentConfig& cfg, Report& rep) {
  KernelPtr k = make_kernel(cfg.kernel);
  const auto palm_at = numbers(cfg.experiment["palm_at"]);
  if (!palm_at.empty()) k = palm_reduce(k, palm_at);
  const DiscretizedKernel dk = make_discretization(*k, cfg);
  const DppSampleSet set = dpp_sample(dk, cfg.sampler);
  rep.csv << "sample,count,points\n";
  double mean = 0.0, m2 = 0.0;
  std::size_t i = 0;
  for (const Configuration& c : set.samples) {
    rep.csv << i << "," << c.size();
    for (double x : c.points()) rep.csv << "," << num(x);
    rep.csv << "\n";
    ++i;
    const double d = double(c.size()) - mean;
    mean += d / double(i);
    m2 += d * (double(c.size()) - mean);
  }
  rep.details["expected_count"] = dk.expected_count();
  rep.details["mean_count"] = mean;
  rep.details["restarts"] = set.restarts;
  rep.details["eigenvalue_clamp"] = dk.clamp_magnitude();
  for (const auto& w : dk.warnings()) rep.warnings.push_back(w);
  if (i > 1) {
    const double se = std::sqrt(m2 / double(i - 1) / double(i));
    const double z = se > 0.0 ? std::abs(mean - dk.expected_count()) / se : std::abs(mean - dk.expected_count());
    rep.below("mean count z-score", z, 4.0);
  }
}

void psi_scan(const ExperimentConfig& cfg, Report& rep) {
  const KernelPtr k = make_kernel(cfg.kernel);
  const json& e = cfg.experiment;
  auto radii = numbers(e["radii"]);
  TruncationSchedule schedule;
  if (radii.empty()) {
    double max_r = e["max_radius"].get<double>();
    if (max_r == 0.0) max_r = 0.5 * admissible_radius(cfg.window, k->domain());
    const int count = e["radius_count"].get<int>();
    const std::string kind = e["schedule"].get<std::string>();
    if (kind == "quartic") {
      schedule = TruncationSchedule::quartic(count, max_r);
    } else if (kind == "geometric") {
      if (count < 2) throw ConfigError("field 'experiment.radius_count': need at least 2");
      for (int i = 0; i < count; ++i) radii.push_back(max_r * std::pow(5.0, double(i) / (count - 1) - 1.0));
      schedule = TruncationSchedule::explicit_radii(radii);
    } else {
      throw ConfigError("field 'experiment.schedule': expected geometric or quartic");
    }
  } else {
    schedule = TruncationSchedule::explicit_radii(radii);
  }
  const DiscretizedKernel dk = make_discretization(*k, cfg);
  const VarianceScan scan = variance_scan(dk, e["p"].get<double>(), e["q"].get<double>(), schedule, cfg.sampler);
  rep.csv << "radius,mean_log_psi_tail,variance\n";
  for (std::size_t i = 0; i < scan.points.size(); ++i)
    rep.csv << num(scan.points[i].first) << "," << num(scan.means[i]) << "," << num(scan.points[i].second) << "\n";
  const auto range = numbers(e["slope_range"]);
  if (range.size() != 2) throw ConfigError("field 'experiment.slope_range': expected [lo, hi]");
  rep.check("variance slope", scan.slope, e["slope_range"], scan.slope >= range[0] && scan.slope <= range[1]);
}

void rho_estimate(const ExperimentConfig& cfg, Report& rep) {
  const KernelPtr k = make_kernel(cfg.kernel);
  const json& e = cfg.experiment;
  const auto ps = numbers(e["p"]);
  const double q = e["q"].get<double>();
  RhoMcOptions opt;
  if (e["radius"].get<double>() > 0.0) opt.radius = e["radius"].get<double>();
  opt.tail_correction = e["tail_correction"].get<bool>();
  opt.batches = e["batches"].get<int>();
  Grid grid;
  if (cfg.grid.spacing == "uniform") {
    grid = Grid::uniform(cfg.window, cfg.grid.n);
  } else if (cfg.grid.exponent == 0.0) {
    grid = discretize_power(*k, cfg.window, cfg.grid.n, cfg.grid.breaks).grid();
  } else {
    grid = Grid::power(cfg.window, cfg.grid.n, cfg.grid.exponent, cfg.grid.breaks);
  }
  const auto est = rho_estimate_mc(k, cfg.lambda, ps, q, cfg.sampler, grid, opt);
  const double rel = e["relative_tolerance"].get<double>();
  const double zmax = e["z_max"].get<double>();
  rep.csv << "p,q,ratio,std_error,target,mean_psi,median_batch_mean,heavy_tail\n";
  for (const RhoEstimate& r : est) {
    const auto lr = k->log_rho_ratio(r.p, r.q);
    const double target = lr ? std::exp(*lr) : std::numeric_limits<double>::quiet_NaN();
    rep.csv << num(r.p) << "," << num(r.q) << "," << num(r.ratio) << "," << num(r.std_error) << "," << num(target)
            << "," << num(r.mean_psi) << "," << num(r.median_batch_mean) << "," << (r.heavy_tail ? 1 : 0) << "\n";
    for (const auto& w : r.warnings) rep.warnings.push_back("p=" + num(r.p) + ": " + w);
    if (lr) {
      const double tol = std::max(rel * target, zmax * r.std_error);
      rep.check("rho ratio p=" + num(r.p) + " q=" + num(r.q), r.ratio, tol, std::abs(r.ratio - target) <= tol);
    }
  }
}

void verify_palm(const ExperimentConfig& cfg, Report& rep) {
  const KernelPtr k = make_kernel(cfg.kernel);
  const json& e = cfg.experiment;
  rep.csv << "check,p,q,residual\n";
  if (is_cd(cfg.kernel)) {
    if (cfg.kernel.n > 4) throw ConfigError("field 'kernel.n': the finite-n Palm integral check needs n <= 4");
    double worst = 0.0;
    for (const auto& pair : e["pairs"]) {
      const auto pq = pair.get<std::vector<double>>();
      if (pq.size() != 2) throw ConfigError("field 'experiment.pairs': expected [p, q] entries");
      const double r = finite_n_palm_integral_check(family_of(cfg.kernel), cfg.kernel.n, pq[0], pq[1],
                                                    e["quad_order"].get<int>());
      worst = std::max(worst, r);
      rep.csv << "palm-integral," << num(pq[0]) << "," << num(pq[1]) << "," << num(r) << "\n";
    }
    rep.below("palm integral residual", worst, e["tolerance"].get<double>());
  }
  const int instances = e["identity_instances"].get<int>();
  const int order = e["identity_order"].get<int>();
  if (order < 1) throw ConfigError("field 'experiment.identity_order': must be positive");
  if (instances > 0) {
    const Interval core = core_range(cfg, *k);
    const LogRhoRatio rho = closed_form_log_rho(k);
    const double radius = admissible_radius(cfg.window, k->domain());
    const LogPsi psi = truncated_log_psi(radius);
    Rng rng = make_stream_rng(cfg.sampler.seed, 0);
    const int extra = is_cd(cfg.kernel) ? std::max(0, cfg.kernel.n - order) : 12;
    double dif = 0.0, phi = 0.0;
    for (int i = 0; i < instances; ++i) {
      const auto pts = distinct(rng, 2 * order + extra, core, 1e-3 * core.length());
      const std::vector<double> p(pts.begin(), pts.begin() + order);
      const std::vector<double> q(pts.begin() + order, pts.begin() + 2 * order);
      const Configuration x(std::vector<double>(pts.begin() + 2 * order, pts.end()), cfg.window);
      const double d = palm_dif_identity_check(*k, rho, psi, p, q, x, radius);
      const RNDerivativeReport rn = rn_derivative_order_l(*k, rho, psi, p, q, x, radius);
      const double f = std::abs(phi_palm_formula(p, q, x, psi) - (rn.log_rn - rn.log_det_ratio - rn.log_rho_ratio));
      dif = std::max(dif, d);
      phi = std::max(phi, f);
      rep.csv << "palm-dif," << joined(p) << "," << joined(q) << "," << num(d) << "\n";
      rep.csv << "phi-palm," << joined(p) << "," << joined(q) << "," << num(f) << "\n";
      if (i == 0)
        rep.details["first_instance"] = {{"log_rn", rn.log_rn},
                                         {"log_det_ratio", rn.log_det_ratio},
                                         {"log_vandermonde_ratio", rn.log_vandermonde_ratio},
                                         {"log_rho_ratio", rn.log_rho_ratio},
                                         {"log_psi", rn.log_psi},
                                         {"radius", rn.radius}};
    }
    const double tol = e["identity_tolerance"].get<double>();
    rep.below("palm-dif residual", dif, tol);
    rep.below("phi-palm residual", phi, tol);
  }
}

Interval interval_field(const json& j, const std::string& field) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2 || !(v[1] > v[0])) throw ConfigError("field '" + field + "': expected [lo, hi] with lo < hi");
  return {v[0], v[1]};
}

std::string resolved_mode(const ExperimentConfig& cfg, const std::string& exact) {
  const std::string mode = cfg.experiment["mode"].get<std::string>();
  if (mode == "auto") return is_cd(cfg.kernel) ? exact : "mc";
  if (mode != exact && mode != "mc") throw ConfigError("field 'experiment.mode': expected auto, " + exact + " or mc");
  if (mode == exact && !is_cd(cfg.kernel))
    throw ConfigError("field 'experiment.mode': " + exact + " needs a hermite-cd or jacobi-cd kernel");
  return mode;
}

void verify_conditional(const ExperimentConfig& cfg, Report& rep) {
  const KernelPtr k = make_kernel(cfg.kernel);
  const json& e = cfg.experiment;
  const Interval in = interval_field(e["interval"], "experiment.interval");
  if (resolved_mode(cfg, "finite-n") == "finite-n") {
    const int n = cfg.kernel.n;
    if (n < 2 || n > 10) throw ConfigError("field 'kernel.n': the finite-n check needs 2 <= n <= 10");
    const Interval core = core_range(cfg, *k);
    if (!core.contains(in)) throw ConfigError("field 'experiment.interval': must lie inside the kernel support");
    Rng rng = make_stream_rng(cfg.sampler.seed, 0);
    std::uniform_real_distribution<double> u(core.lo, core.hi);
    rep.csv << "instance,n,l,residual\n";
    double worst = 0.0;
    const int instances = e["instances"].get<int>();
    for (int i = 0; i < instances; ++i) {
      const int l = 1 + i % (n - 1);
      std::vector<double> outside;
      while (static_cast<int>(outside.size()) < n - l) {
        const double x = u(rng);
        if (!in.contains(x)) outside.push_back(x);
      }
      std::vector<std::vector<double>> tuples;
      for (int t = 0; t < 4; ++t) tuples.push_back(distinct(rng, l, in, 1e-6 * in.length()));
      const double r = finite_n_conditional_check(family_of(cfg.kernel), n, in, outside, tuples);
      worst = std::max(worst, r);
      rep.csv << i << "," << n << "," << l << "," << num(r) << "\n";
    }
    rep.below("finite-n conditional residual", worst, e["tolerance"].get<double>());
    return;
  }
  const DiscretizedKernel dk = make_discretization(*k, cfg);
  const auto samples = dpp_sample(dk, cfg.sampler).samples;
  ConditionalMcOptions opt;
  opt.regeneration_sweeps = e["regeneration_sweeps"].get<int>();
  opt.min_bin = e["min_bin"].get<std::size_t>();
  opt.tail_correction = e["tail_correction"].get<bool>();
  const ConditionalReport r = conditional_mc_verification(k, cfg.lambda, in, samples, cfg.sampler, opt);
  rep.csv << "l,outside_class,distance_tercile,count,z_mean,z_spread\n";
  for (const auto& b : r.bins)
    rep.csv << b.l << "," << b.outside_class << "," << b.distance_tercile << "," << b.count << "," << num(b.z_mean)
            << "," << num(b.z_spread) << "\n";
  rep.details["samples"] = r.samples;
  rep.details["excluded_samples"] = r.excluded_samples;
  rep.details["populated_bins"] = r.bins.size();
  if (r.vacuous) rep.warnings.push_back("no bin reached the minimum size; the check is vacuous");
  const double need = e["min_fraction"].get<double>();
  rep.check("fraction of z-scores within 3", r.fraction_within, need, r.fraction_within >= need);
}

std::vector<Statistic> qi_statistics(Interval first) {
  const double c = first.midpoint();
  const double w = first.length();
  auto bump = [c, w](const Configuration& x) {
    double s = 0.0;
    for (double t : x.points()) s += std::exp(-std::pow((t - c) / w, 2));
    return s;
  };
  return {{"count", [first](const Configuration& x) { return double(x.count_in(first)); }},
          {"bump", bump},
          {"exp(-bump)", [bump](const Configuration& x) { return std::exp(-bump(x)); }}};
}

void verify_qi(const ExperimentConfig& cfg, Report& rep) {
  const KernelPtr k = make_kernel(cfg.kernel);
  const json& e = cfg.experiment;
  std::vector<std::pair<Interval, PiecewiseIsometry>> maps;
  for (const auto& x : e["exchanges"]) {
    const auto v = x.get<std::vector<double>>();
    if (v.size() != 4) throw ConfigError("field 'experiment.exchanges': expected [a_lo, a_hi, b_lo, b_hi] entries");
    try {
      maps.emplace_back(Interval{v[0], v[1]}, PiecewiseIsometry::exchange({v[0], v[1]}, {v[2], v[3]}));
    } catch (const DomainError& err) {
      throw ConfigError(std::string("field 'experiment.exchanges': ") + err.what());
    }
  }
  rep.csv << "exchange,statistic,pushforward,reweighted,std_error,z\n";
  if (resolved_mode(cfg, "quadrature") == "quadrature") {
    if (cfg.kernel.n > 4) throw ConfigError("field 'kernel.n': the quadrature check needs n <= 4");
    double worst = 0.0;
    for (std::size_t i = 0; i < maps.size(); ++i) {
      const auto stats = qi_statistics(maps[i].first);
      const auto r = quasi_invariance_quadrature(family_of(cfg.kernel), cfg.kernel.n, maps[i].second, stats,
                                                 e["per_cell"].get<int>());
      for (std::size_t s = 0; s < stats.size(); ++s)
        rep.csv << i << "," << stats[s].name << "," << num(r.pushforward[s]) << "," << num(r.reweighted[s]) << ",0,0\n";
      worst = std::max(worst, r.max_residual);
    }
    rep.below("quadrature residual", worst, e["tolerance"].get<double>());
    return;
  }
  const DiscretizedKernel dk = make_discretization(*k, cfg);
  const auto samples = dpp_sample(dk, cfg.sampler).samples;
  const double zmax = e["z_max"].get<double>();
  const Interval u = k->domain();
  const double radius = admissible_radius(cfg.window, u);
  const Interval inner{std::max(-radius, u.lo), std::min(radius, u.hi)};
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const PiecewiseIsometry& t = maps[i].second;
    if (!t.maps_grid(dk.grid().points))
      rep.warnings.push_back("exchange " + std::to_string(i) + " does not map the sampling grid onto itself");
    TailModel tail;
    if (e["tail_correction"].get<bool>()) tail = TailModel(*k, *k, cfg.lambda, inner, t.support());
    const auto stats = qi_statistics(maps[i].first);
    const QIReport r = quasi_invariance_check(*k, cfg.lambda, t, stats, samples, tail.empty() ? nullptr : &tail);
    double worst = 0.0;
    for (const auto& s : r.statistics) {
      rep.csv << i << "," << s.name << "," << num(s.pushforward_mean) << "," << num(s.reweighted_mean) << ","
              << num(s.std_error) << "," << num(s.z) << "\n";
      worst = std::max(worst, std::abs(s.z));
    }
    rep.below("max |z| exchange " + std::to_string(i), worst, zmax);
  }
}

void limits(const ExperimentConfig& cfg, Report& rep) {
  const json& e = cfg.experiment;
  const std::string fam = e["family"].get<std::string>();
  if (fam != "hermite" && fam != "jacobi") throw ConfigError("field 'experiment.family': expected hermite or jacobi");
  const double s = e["s"].get<double>();
  const auto ns = e["ns"].get<std::vector<int>>();
  if (ns.empty()) throw ConfigError("field 'experiment.ns': empty");
  const auto grid = square(numbers(e["range"]), e["points"].get<int>());
  const auto pair = numbers(e["rho_pair"]);
  if (pair.size() != 2) throw ConfigError("field 'experiment.rho_pair': expected [p, q]");
  const bool herm = fam == "hermite";
  const RhoLimitSequence seq = rho_finite_n_limit(herm ? PolyKind::Hermite : PolyKind::Jacobi, s, ns, pair[0], pair[1]);
  rep.csv << "n,max_error,rho_ratio\n";
  std::vector<double> errs;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const ScaledKernel k = herm ? ScaledKernel::hermite_bulk(ns[i]) : ScaledKernel::jacobi_hard_edge(ns[i], s);
    double err = 0.0;
    for (const auto& [x, y] : grid)
      err = std::max(err, std::abs(k(x, y) - (herm ? sine_eval(x, y) : bessel_kernel_eval({s}, x, y))));
    errs.push_back(err);
    rep.csv << ns[i] << "," << num(err) << "," << num(seq.estimates[i].ratio) << "\n";
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < errs.size(); ++i) decreasing = decreasing && errs[i] < errs[i - 1];
  rep.details["rho_extrapolated"] = seq.extrapolated;
  rep.below("error at largest n", errs.back(), e["tolerance"].get<double>());
  rep.check("error decreasing in n", decreasing ? 1.0 : 0.0, 1.0, decreasing);
}

void dispatch(const ExperimentConfig& cfg, Report& rep) {
  const std::string& c = cfg.command;
  if (c == "kernel-table") return kernel_table(cfg, rep);
  if (c == "sample") return sample(cfg, rep);
  if (c == "psi-scan") return psi_scan(cfg, rep);
  if (c == "rho-estimate") return rho_estimate(cfg, rep);
  if (c == "verify-palm") return verify_palm(cfg, rep);
  if (c == "verify-conditional") return verify_conditional(cfg, rep);
  if (c == "verify-qi") return verify_qi(cfg, rep);
  if (c == "limits") return limits(cfg, rep);
  throw ConfigError("unknown command '" + c + "'");
}

}  // namespace

int run(const ExperimentConfig& cfg, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  Report rep;
  int code = kPass;
  std::string error;
  try {
    dispatch(cfg, rep);
  } catch (const ConfigError& e) {
    code = kConfigError;
    error = e.what();
  } catch (const SingularConfiguration& e) {
    code = kNumericalError;
    error = e.what();
  } catch (const DomainError& e) {
    code = kConfigError;
    error = e.what();
  } catch (const json::exception& e) {
    code = kConfigError;
    error = std::string("config: ") + e.what();
  } catch (const NumericalError& e) {
    code = kNumericalError;
    error = e.what();
  }
  if (code == kPass)
    for (const auto& c : rep.criteria)
      if (!c.pass) code = kCriterionFailed;

  json summary;
  summary["command"] = cfg.command;
  summary["config"] = cfg.resolved;
  summary["seed"] = cfg.sampler.seed;
  summary["criteria"] = json::array();
  for (const auto& c : rep.criteria)
    summary["criteria"].push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
  summary["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  summary["details"] = rep.details;
  summary["warnings"] = rep.warnings;
  summary["exit_code"] = code;
  if (!error.empty()) summary["error"] = error;

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  const std::filesystem::path dir(cfg.out_dir);
  if (code != kConfigError && code != kNumericalError) {
    std::ofstream csv(dir / (cfg.command + ".csv"));
    json echo = cfg.resolved;
    echo.erase("output");
    csv << "# config: " << echo.dump() << "\n" << rep.csv.str();
  }
  std::ofstream(dir / (cfg.command + ".json")) << summary.dump(2) << "\n";

  if (!error.empty()) log << "error: " << error << "\n";
  for (const auto& w : rep.warnings) log << "warning: " << w << "\n";
  for (const auto& c : rep.criteria)
    log << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << num(c.value) << " (tolerance " << c.tolerance.dump()
        << ")\n";
  return code;
}

}  // namespace dppcond::cli
