#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dppcond/cli.hpp"

namespace cli = dppcond::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dppcond_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int tool(const std::string& args) {
  const int status = std::system((std::string(DPPCOND_TOOL) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string error_of(const std::string& command, const cli::json& user) {
  try {
    cli::resolve_config(command, user);
  } catch (const cli::ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("every command resolves with defaults") {
  for (const auto& info : cli::commands()) {
    CAPTURE(info.name);
    const auto cfg = cli::resolve_config(info.name, cli::json::object());
    CHECK(cfg.command == info.name);
    CHECK(cfg.kernel.type == "sine");
    CHECK_FALSE(info.csv_columns.empty());
  }
  CHECK_THROWS_AS(cli::resolve_config("no-such-command", cli::json::object()), cli::ConfigError);
}

TEST_CASE("config errors name the field") {
  CHECK(error_of("sample", cli::json::parse(R"({"kernel": {"typo": 1}})")) == "field 'kernel.typo': unknown key");
  CHECK(error_of("sample", cli::json::parse(R"({"grid": {"n": "many"}})")).find("field 'grid.n'") == 0);
  CHECK(error_of("sample", cli::json::parse(R"({"grid": {"n": 4.5}})")).find("field 'grid.n'") == 0);
  CHECK(error_of("sample", cli::json::parse(R"({"window": [3, 1]})")).find("field 'window'") == 0);
  CHECK(error_of("sample", cli::json::parse(R"({"kernel": {"type": "airy"}})")).find("field 'kernel.type'") == 0);
  CHECK(error_of("sample", cli::json::parse(R"({"lambda": {"type": "table", "x": [1], "y": [1]}})"))
            .find("field 'lambda'") == 0);
  CHECK(error_of("psi-scan", cli::json::parse(R"({"experiment": {"pairs": []}})")) ==
        "field 'experiment.pairs': unknown key");
  // integers are accepted where reals are expected
  CHECK(error_of("sample", cli::json::parse(R"({"window": [-5, 5], "kernel": {"s": 1}})")).empty());
}

TEST_CASE("syntax errors report line and column") {
  try {
    cli::parse_config_text("{\n  \"kernel\": {\"type\": \"sine\",}\n}", "bad.json");
    FAIL("expected a parse error");
  } catch (const cli::ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.rfind("bad.json:2:", 0) == 0);
  }
  CHECK(cli::parse_config_text("{\"a\": 1} // trailing comment", "ok.json")["a"] == 1);
}

TEST_CASE("overrides") {
  cli::json j = cli::json::object();
  cli::apply_override(j, "sampler.seed=7");
  cli::apply_override(j, "kernel.type=bessel");
  cli::apply_override(j, "window=[0, 50]");
  cli::apply_override(j, "experiment.p=[2.0]");
  CHECK(j["sampler"]["seed"] == 7);
  CHECK(j["kernel"]["type"] == "bessel");
  CHECK(j["window"][1] == 50);
  const auto cfg = cli::resolve_config("rho-estimate", j);
  CHECK(cfg.sampler.seed == 7);
  CHECK(cfg.kernel.type == "bessel");
  CHECK(cfg.window.hi == 50.0);
  CHECK_THROWS_AS(cli::apply_override(j, "no-equals-sign"), cli::ConfigError);
  CHECK_THROWS_AS(cli::apply_override(j, "sampler..seed=1"), cli::ConfigError);
  CHECK_THROWS_AS(cli::apply_override(j, "sampler.seed.x=1"), cli::ConfigError);
}

TEST_CASE("verify-palm on the Hermite ensemble passes") {
  const fs::path dir = scratch("palm");
  auto cfg = cli::load_config("verify-palm", "",
                              {"kernel.type=hermite-cd", "kernel.n=3", "output.dir=" + cli::json(dir.string()).dump()});
  std::ostringstream log;
  CHECK(cli::run(cfg, log) == cli::kPass);
  const auto summary = cli::json::parse(slurp(dir / "verify-palm.json"));
  CHECK(summary["command"] == "verify-palm");
  CHECK(summary["exit_code"] == 0);
  REQUIRE_FALSE(summary["criteria"].empty());
  for (const auto& c : summary["criteria"]) {
    CHECK(c["pass"] == true);
    CHECK(c.contains("value"));
    CHECK(c.contains("tolerance"));
  }
  CHECK(summary.contains("wall_time_s"));
  CHECK(summary["config"]["kernel"]["n"] == 3);
  CHECK(slurp(dir / "verify-palm.csv").rfind("# config: ", 0) == 0);
}

TEST_CASE("same config and seed give byte-identical CSV") {
  const std::vector<std::string> base = {"window=[-5, 5]", "grid.n=100", "sampler.chain_length=200",
                                         "sampler.streams=2", "sampler.seed=123"};
  std::vector<std::string> csv;
  for (const std::string name : {"det_a", "det_b"}) {
    const fs::path dir = scratch(name);
    auto overrides = base;
    overrides.push_back("output.dir=" + cli::json(dir.string()).dump());
    std::ostringstream log;
    REQUIRE(cli::run(cli::load_config("sample", "", overrides), log) == cli::kPass);
    csv.push_back(slurp(dir / "sample.csv"));
  }
  CHECK(csv[0].size() > 100);
  CHECK(csv[0] == csv[1]);
}

TEST_CASE("runtime domain errors map to exit 2") {
  const fs::path dir = scratch("domain");
  // the window does not fit inside the Bessel domain
  auto cfg = cli::load_config("sample", "", {"kernel.type=bessel", "output.dir=" + cli::json(dir.string()).dump()});
  std::ostringstream log;
  CHECK(cli::run(cfg, log) == cli::kConfigError);
  CHECK(cli::json::parse(slurp(dir / "sample.json")).contains("error"));
}

TEST_CASE("executable exit codes") {
  const fs::path dir = scratch("exe");
  std::ofstream(dir / "bad.json") << "{\n  \"grid\": {\"n\": 300,,}\n}\n";
  std::ofstream(dir / "unknown.json") << R"({"sampler": {"sed": 1}})";
  std::ofstream(dir / "good.json") << R"({"kernel": {"type": "hermite-cd", "n": 3}})";
  const std::string out = " -o " + (dir / "out").string();
  CHECK(tool("verify-palm -c " + (dir / "bad.json").string() + out) == 2);
  CHECK(tool("verify-palm -c " + (dir / "unknown.json").string() + out) == 2);
  CHECK(tool("verify-palm -c " + (dir / "missing.json").string() + out) == 2);
  CHECK(tool("verify-palm --bogus-flag") == 2);
  CHECK(tool("verify-palm -c " + (dir / "good.json").string() + out) == 0);
  CHECK(tool("kernel-table -s kernel.type=jacobi-cd -s kernel.n=5 -s 'experiment.range=[-0.9, 0.9]'" + out) == 0);
  CHECK(fs::exists(dir / "out" / "kernel-table.csv"));
}
