#include <fstream>
#include <sstream>

#include "dppcond/cli.hpp"

namespace dppcond::cli {

namespace {

json base_defaults() {
  return json::parse(R"({
    "kernel": {"type": "sine", "s": 0.0, "n": 4},
    "window": [-15.0, 15.0],
    "grid": {"n": 300, "spacing": "uniform", "exponent": 0.0, "breaks": []},
    "lambda": {"type": "none", "x": [], "y": []},
    "sampler": {"seed": 20240601, "chain_length": 10000, "burn_in": 10000, "proposal_scale": 0.1,
                "streams": 1, "thin": 10},
    "output": {"dir": "."}
  })");
}

json experiment_defaults(const std::string& command) {
  if (command == "kernel-table") return json::parse(R"({"range": [-2.0, 2.0], "points": 21})");
  if (command == "sample") return json::parse(R"({"palm_at": []})");
  if (command == "psi-scan")
    return json::parse(R"({"p": 0.5, "q": -0.5, "radii": [], "radius_count": 8, "max_radius": 0.0, "schedule": "geometric",
                           "slope_range": [-2.5, -1.5]})");
  if (command == "rho-estimate")
    return json::parse(R"({"p": [0.7, 1.2], "q": 0.2, "radius": 0.0, "tail_correction": true, "batches": 20,
                           "relative_tolerance": 0.1, "z_max": 3.0})");
  if (command == "verify-palm")
    return json::parse(R"({"pairs": [[0.5, -0.5], [1.0, 0.0], [-0.7, 0.4]], "quad_order": 24, "tolerance": 1e-6,
                           "identity_instances": 100, "identity_order": 2, "identity_tolerance": 1e-10})");
  if (command == "verify-conditional")
    return json::parse(R"({"mode": "auto", "interval": [0.0, 1.0], "instances": 50, "tolerance": 1e-10,
                           "regeneration_sweeps": 300, "min_bin": 100, "tail_correction": true,
                           "min_fraction": 0.95})");
  if (command == "verify-qi")
    return json::parse(R"({"mode": "auto", "exchanges": [[0.0, 0.5, 0.5, 1.0], [-1.0, -0.5, 0.5, 1.0]],
                           "per_cell": 10, "tolerance": 1e-6, "z_max": 3.0, "tail_correction": true})");
  if (command == "limits")
    return json::parse(R"({"family": "hermite", "s": 0.0, "ns": [25, 50, 100, 200], "range": [-2.0, 2.0],
                           "points": 41, "tolerance": 1e-2, "rho_pair": [1.0, 0.0]})");
  throw ConfigError("unknown command '" + command + "'");
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return !(a.is_number_integer() && b.is_number_float());
  return a.type() == b.type();
}

// user values over defaults; every user key must exist in the defaults with a compatible type
json merge_known(const json& defaults, const json& user, const std::string& path) {
  if (!user.is_object()) throw ConfigError("field '" + path + "': expected an object");
  json out = defaults;
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!defaults.contains(it.key())) throw ConfigError("field '" + key + "': unknown key");
    const json& d = defaults[it.key()];
    if (d.is_object()) {
      out[it.key()] = merge_known(d, it.value(), key);
    } else if (!same_kind(d, it.value())) {
      throw ConfigError("field '" + key + "': expected " + std::string(d.type_name()) + ", got " +
                        std::string(it.value().type_name()));
    } else {
      out[it.key()] = it.value();
    }
  }
  return out;
}

std::vector<double> number_list(const json& j, const std::string& field) {
  std::vector<double> v;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError("field '" + field + "': expected numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError("field '" + field + "': " + what);
}

}  // namespace

json parse_config_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    const auto pos = msg.find(": ", msg.find("column"));
    if (pos != std::string::npos) msg = msg.substr(pos + 2);
    std::ostringstream os;
    os << source << ":" << line << ":" << col << ": " << msg;
    throw ConfigError(os.str());
  }
}

void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "': expected key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &config;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].empty()) throw ConfigError("override '" + assignment + "': empty key segment");
    if (!node->is_object()) throw ConfigError("override '" + assignment + "': '" + parts[i - 1] + "' is not an object");
    if (i + 1 == parts.size()) {
      (*node)[parts[i]] = value;
    } else {
      if (!node->contains(parts[i])) (*node)[parts[i]] = json::object();
      node = &(*node)[parts[i]];
    }
  }
}

ExperimentConfig resolve_config(const std::string& command, const json& user) {
  json defaults = base_defaults();
  defaults["experiment"] = experiment_defaults(command);
  ExperimentConfig cfg;
  cfg.command = command;
  cfg.resolved = merge_known(defaults, user.is_null() ? json::object() : user, "");
  const json& r = cfg.resolved;

  const json& k = r["kernel"];
  cfg.kernel.type = k["type"].get<std::string>();
  cfg.kernel.s = k["s"].get<double>();
  cfg.kernel.n = k["n"].get<int>();
  const std::string& kt = cfg.kernel.type;
  require(kt == "sine" || kt == "bessel" || kt == "hermite-cd" || kt == "jacobi-cd", "kernel.type",
          "expected sine, bessel, hermite-cd or jacobi-cd");
  if (kt == "bessel") require(cfg.kernel.s > -1.0, "kernel.s", "must exceed -1");
  if (kt == "jacobi-cd") require(cfg.kernel.s > -1.0, "kernel.s", "must exceed -1");
  if (kt == "hermite-cd" || kt == "jacobi-cd") require(cfg.kernel.n >= 1, "kernel.n", "must be positive");

  const auto w = number_list(r["window"], "window");
  require(w.size() == 2 && w[1] > w[0], "window", "expected [lo, hi] with lo < hi");
  cfg.window = {w[0], w[1]};

  const json& g = r["grid"];
  cfg.grid.n = g["n"].get<int>();
  cfg.grid.spacing = g["spacing"].get<std::string>();
  cfg.grid.exponent = g["exponent"].get<double>();
  cfg.grid.breaks = number_list(g["breaks"], "grid.breaks");
  require(cfg.grid.n >= 16, "grid.n", "must be at least 16");
  require(cfg.grid.spacing == "uniform" || cfg.grid.spacing == "power", "grid.spacing", "expected uniform or power");
  require(cfg.grid.exponent == 0.0 || cfg.grid.exponent >= 1.0, "grid.exponent", "expected 0 (auto) or >= 1");

  const json& l = r["lambda"];
  const std::string lt = l["type"].get<std::string>();
  if (lt == "none") {
    cfg.lambda = LambdaRegularizer::zero();
  } else if (lt == "rational") {
    cfg.lambda = LambdaRegularizer::rational();
  } else if (lt == "table") {
    try {
      cfg.lambda = LambdaRegularizer::table(number_list(l["x"], "lambda.x"), number_list(l["y"], "lambda.y"));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("field 'lambda': ") + e.what());
    }
  } else {
    throw ConfigError("field 'lambda.type': expected none, rational or table");
  }

  const json& s = r["sampler"];
  cfg.sampler.seed = s["seed"].get<std::uint64_t>();
  cfg.sampler.chain_length = s["chain_length"].get<int>();
  cfg.sampler.burn_in = s["burn_in"].get<int>();
  cfg.sampler.proposal_scale = s["proposal_scale"].get<double>();
  cfg.sampler.streams = s["streams"].get<int>();
  cfg.sampler.thin = s["thin"].get<int>();
  try {
    cfg.sampler.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("field 'sampler': ") + e.what());
  }

  cfg.experiment = r["experiment"];
  cfg.out_dir = r["output"]["dir"].get<std::string>();
  return cfg;
}

ExperimentConfig load_config(const std::string& command, const std::string& path,
                             const std::vector<std::string>& overrides) {
  json user = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    user = parse_config_text(buf.str(), path);
    if (!user.is_object()) throw ConfigError(path + ": top level must be an object");
  }
  for (const auto& o : overrides) apply_override(user, o);
  return resolve_config(command, user);
}

KernelPtr make_kernel(const KernelSpec& spec) {
  if (spec.type == "sine") return make_sine_kernel();
  if (spec.type == "bessel") return make_bessel_kernel(spec.s);
  if (spec.type == "hermite-cd") return make_cd_kernel(OrthoPolyFamily::hermite(), spec.n);
  if (spec.type == "jacobi-cd") return make_cd_kernel(OrthoPolyFamily::jacobi(spec.s), spec.n);
  throw ConfigError("field 'kernel.type': unknown kernel '" + spec.type + "'");
}

DiscretizedKernel make_discretization(const Kernel& kernel, const ExperimentConfig& cfg) {
  if (cfg.grid.spacing == "uniform") return discretize(kernel, Grid::uniform(cfg.window, cfg.grid.n));
  if (cfg.grid.exponent == 0.0) return discretize_power(kernel, cfg.window, cfg.grid.n, cfg.grid.breaks);
  return discretize(kernel, Grid::power(cfg.window, cfg.grid.n, cfg.grid.exponent, cfg.grid.breaks));
}

}  // namespace dppcond::cli
