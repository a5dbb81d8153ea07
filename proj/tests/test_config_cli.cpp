#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "mechsim/config_io.hpp"
#include "mechsim/schemes.hpp"
#include "scc_fixtures.hpp"

using namespace mechsim;

namespace {

struct CliResult {
  int exit_code;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string tmp = "cli_out.txt";
  const std::string cmd = std::string(MECHSIM_CLI_PATH) + " " + args + " > " + tmp + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(tmp);
  std::stringstream ss;
  ss << in.rdbuf();
  std::remove(tmp.c_str());
  return {WEXITSTATUS(status), ss.str()};
}

bool models_equal(const Model& a, const Model& b) {
  if (a.env.agent_names != b.env.agent_names) return false;
  if (a.env.type_names != b.env.type_names) return false;
  if (a.env.states != b.env.states) return false;
  if (a.env.alternative_names != b.env.alternative_names) return false;
  if (a.env.utility != b.env.utility) return false;
  if (a.scf.has_value() != b.scf.has_value()) return false;
  if (a.scf) {
    for (size_t s = 0; s < a.scf->by_state.size(); ++s) {
      if (!outcome_close(a.scf->by_state[s], b.scf->by_state[s], 0.0)) return false;
    }
  }
  if (a.scheme.has_value() != b.scheme.has_value()) return false;
  if (a.scheme) {
    for (size_t s = 0; s < a.scheme->table.size(); ++s) {
      for (size_t i = 0; i < a.scheme->table[s].size(); ++i) {
        for (size_t t = 0; t < a.scheme->table[s][i].size(); ++t) {
          if (!outcome_close(a.scheme->table[s][i][t], b.scheme->table[s][i][t], 0.0)) return false;
        }
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("model round-trips through JSON") {
  const Model preset = bilateral_trade_preset();
  const Model reloaded = load_model(to_json(preset));
  CHECK(models_equal(preset, reloaded));
}

TEST_CASE("the bundled config equals the built-in preset") {
  const Model bundled = load_model_file(std::string(MECHSIM_CONFIG_DIR) + "/bilateral_trade.json");
  CHECK(models_equal(bilateral_trade_preset(), bundled));
}

TEST_CASE("config errors carry key context") {
  nlohmann::json j = to_json(bilateral_trade_preset());
  j["states"] = nlohmann::json::array();
  CHECK_THROWS_WITH_AS(load_model(j), "'states' must be nonempty", ConfigError);

  nlohmann::json missing = to_json(bilateral_trade_preset());
  missing["scf"].erase("L,L");
  CHECK_THROWS_AS(load_model(missing), ConfigError);

  nlohmann::json bad_lottery = to_json(bilateral_trade_preset());
  bad_lottery["scf"]["L,L"]["lottery"] = {{"no_such_alternative", 1.0}};
  CHECK_THROWS_AS(load_model(bad_lottery), ConfigError);
}

TEST_CASE("cli: validate on the preset reports the worked inequalities and exits 2") {
  const CliResult r = run_cli("--preset bilateral validate");
  // the social choice rule is not monotonic, so full validation fails by design
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("4 >= 2") != std::string::npos);
  CHECK(r.output.find("-1 > -2") != std::string::npos);
  CHECK(r.output.find("10 >= 8") != std::string::npos);
  CHECK(r.output.find("4 > 2") != std::string::npos);
  CHECK(r.output.find("5 > 0") != std::string::npos);
  CHECK(r.output.find("Maskin monotonicity") != std::string::npos);
  CHECK(r.output.find("FAILS") != std::string::npos);
}

TEST_CASE("cli: validate with a broken dictator lottery lists the violated pair") {
  Model broken = bilateral_trade_preset();
  broken.lotteries->table[0][1] = broken.lotteries->table[0][0];
  const std::string path = "broken_model.json";
  {
    std::ofstream out(path);
    out << to_json(broken).dump();
  }
  const CliResult r = run_cli("--config " + path + " validate");
  std::remove(path.c_str());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("VIOLATED") != std::string::npos);
}

TEST_CASE("cli: solve-ce per state matches the analysis") {
  const CliResult good = run_cli("--preset bilateral solve-ce --state L,H");
  CHECK(good.exit_code == 0);
  CHECK(good.output.find("implemented: true") != std::string::npos);

  const CliResult bad = run_cli("--preset bilateral solve-ce --state H,L");
  CHECK(bad.exit_code == 3);
  CHECK(bad.output.find("implemented: false") != std::string::npos);
}

TEST_CASE("cli: simulate is reproducible and honors MECHSIM_SEED") {
  const std::string args = "--preset bilateral simulate --state L,H --iterations 300 "
                           "--seed 11 --inertia --out trace_a.csv";
  const CliResult a = run_cli(args);
  CHECK(a.exit_code == 0);
  const CliResult b = run_cli("--preset bilateral simulate --state L,H --iterations 300 "
                              "--seed 11 --inertia --out trace_b.csv");
  CHECK(b.exit_code == 0);
  std::ifstream fa("trace_a.csv"), fb("trace_b.csv");
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(sa.str().find("period,agent,message_index,prob") == 0);
  std::remove("trace_a.csv");
  std::remove("trace_b.csv");

  // the env var overrides --seed: same output as running with --seed 11
  const int status = std::system((std::string("MECHSIM_SEED=11 ") + MECHSIM_CLI_PATH +
                                  " --preset bilateral simulate --state L,H --iterations 300 "
                                  "--seed 999 --inertia --out trace_c.csv > /dev/null 2>&1")
                                     .c_str());
  CHECK(WEXITSTATUS(status) == 0);
  std::ifstream fc("trace_c.csv");
  std::stringstream sc;
  sc << fc.rdbuf();
  CHECK(sc.str() == sa.str());
  std::remove("trace_c.csv");
}

TEST_CASE("cli: pipeline on the preset halts at validate with a manifest") {
  const CliResult r = run_cli("--preset bilateral pipeline --out-dir pipe_out");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("halted at stage validate") != std::string::npos);
  std::ifstream manifest("pipe_out/manifest.json");
  REQUIRE(manifest.good());
  nlohmann::json m;
  manifest >> m;
  REQUIRE(m.contains("outputs"));
  REQUIRE(!m["outputs"].empty());
  CHECK(m["outputs"][0].contains("sha256"));
  CHECK(m["outputs"][0]["sha256"].get<std::string>().size() == 64);
  [[maybe_unused]] const int cleanup = std::system("rm -rf pipe_out");
}

TEST_CASE("cli: pipeline runs to completion on an implementable rule") {
  // a monotonic single-lie variant: restrict the preset to the two states the
  // mechanism implements, so every stage passes
  Model m = bilateral_trade_preset();
  Model restricted;
  restricted.env = m.env;
  restricted.env.states = {{0, 0}, {1, 0}};  // (H,H), (L,H)
  Scf f;
  f.by_state = {m.scf->at(1), m.scf->at(3)};
  restricted.scf = f;
  ChallengeScheme x = trivial_scheme(restricted.env, f);
  // the buyer's test allocation against a reported high valuation
  x.table[0][0][1] = m.scheme->at(1, 0, 1);
  restricted.scheme = std::move(x);
  restricted.lotteries = m.lotteries;
  const std::string path = "restricted_model.json";
  {
    std::ofstream out(path);
    out << to_json(restricted).dump();
  }
  const CliResult r =
      run_cli("--config " + path + " pipeline --out-dir pipe_ok --iterations 400 --seeds 2 --inertia");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("pipeline complete") != std::string::npos);
  nlohmann::json manifest;
  {
    std::ifstream in("pipe_ok/manifest.json");
    REQUIRE(in.good());
    in >> manifest;
  }
  REQUIRE(manifest["outputs"].size() > 3);

  // reproducibility: the same config and seeds give identical content hashes
  const CliResult again =
      run_cli("--config " + path + " pipeline --out-dir pipe_ok2 --iterations 400 --seeds 2 --inertia");
  CHECK(again.exit_code == 0);
  nlohmann::json manifest2;
  {
    std::ifstream in("pipe_ok2/manifest.json");
    REQUIRE(in.good());
    in >> manifest2;
  }
  REQUIRE(manifest["outputs"].size() == manifest2["outputs"].size());
  for (size_t k = 0; k < manifest["outputs"].size(); ++k) {
    CHECK(manifest["outputs"][k]["sha256"] == manifest2["outputs"][k]["sha256"]);
  }
  std::remove(path.c_str());
  [[maybe_unused]] const int cleanup = std::system("rm -rf pipe_ok pipe_ok2");
}

TEST_CASE("cli: scc mode verifies the single-state correspondence end to end") {
  const testing::SccFixture fx = testing::scc_single_state_instance();
  Model model;
  model.env = fx.env;
  model.scc = fx.F;
  model.scc_scheme = fx.scheme;
  model.lotteries = fx.lotteries;
  const std::string path = "scc_model.json";
  {
    std::ofstream out(path);
    out << to_json(model).dump();
  }
  const CliResult v = run_cli("--config " + path + " --scc validate");
  CHECK(v.exit_code == 0);

  const CliResult r = run_cli("--config " + path + " --scc solve-ce --all-states --tol 1e-6");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("implemented: true") != std::string::npos);

  const CliResult b = run_cli("--config " + path + " --scc build-mechanism");
  CHECK(b.exit_code == 0);
  CHECK(b.output.find("epsilon=") != std::string::npos);
  std::remove(path.c_str());
}
