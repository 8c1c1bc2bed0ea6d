#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / "epsnet_cli_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out = scratch_dir() / ("out_" + std::to_string(counter++) + ".txt");
  const std::string cmd =
      std::string(EPSNET_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream is(out);
  std::stringstream ss;
  ss << is.rdbuf();
  res.output = ss.str();
  return res;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("help lists every subcommand and flag") {
  const RunResult res = run_cli("--help");
  REQUIRE(res.exit_code == 0);
  for (const char* sub : {"select", "verify", "experiment", "gen"})
    REQUIRE(res.output.find(sub) != std::string::npos);

  const RunResult sel = run_cli("select --help");
  REQUIRE(sel.exit_code == 0);
  for (const char* flag : {"--space", "--kernel", "--theta", "--k", "--mode",
                           "--max-iterations", "--oracle", "--ts-rounds",
                           "--seed", "--out"})
    REQUIRE(sel.output.find(flag) != std::string::npos);

  const RunResult exp = run_cli("experiment --help");
  REQUIRE(exp.exit_code == 0);
  for (const char* flag : {"--seed", "--scale", "--reps", "--out", "--replay",
                           "--timings", "--threads", "--set"})
    REQUIRE(exp.output.find(flag) != std::string::npos);
}

TEST_CASE("select returns distinct indices as json") {
  const fs::path out = scratch_dir() / "sel.json";
  const RunResult res = run_cli(
      "select --space grid:0:2:15 --kernel rbf:1.0 --k 5 --mode distinct "
      "--seed 7 --out " + out.string());
  REQUIRE(res.exit_code == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  REQUIRE(j["chosen"].size() == 5);
  std::set<int> distinct(j["chosen"].begin(), j["chosen"].end());
  REQUIRE(distinct.size() == 5);
}

TEST_CASE("iterations mode records the full trace") {
  const fs::path out = scratch_dir() / "trace.json";
  const RunResult res = run_cli(
      "select --space orthonormal:8 --k 10000 --mode iterations --seed 1 --out " +
      out.string());
  REQUIRE(res.exit_code == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  REQUIRE(j["trace"].size() == 10000);
  REQUIRE(j["iterations_used"] == 10000);
}

TEST_CASE("example1 fixture config selects a1 and a3") {
  const fs::path cfg = fs::path(EPSNET_CONFIG_DIR) / "example1.cfg";
  const RunResult res = run_cli("select --config " + cfg.string());
  REQUIRE(res.exit_code == 0);
  const nlohmann::json j = nlohmann::json::parse(res.output);
  const std::set<int> chosen(j["chosen"].begin(), j["chosen"].end());
  REQUIRE(chosen == std::set<int>{0, 2});

  // explicit flags override config values
  const RunResult over = run_cli("select --config " + cfg.string() + " --k 1");
  REQUIRE(over.exit_code == 0);
  REQUIRE(nlohmann::json::parse(over.output)["chosen"].size() == 1);

  // json configs work the same way
  const fs::path jcfg = scratch_dir() / "example1.json";
  std::ofstream os(jcfg);
  os << R"({"space": "example1", "theta": "example1", "k": 2, "mode": "distinct", "seed": 7})";
  os.close();
  const RunResult jres = run_cli("select --config " + jcfg.string());
  REQUIRE(jres.exit_code == 0);
  REQUIRE(nlohmann::json::parse(jres.output)["chosen"].size() == 2);
}

TEST_CASE("unknown config keys are rejected") {
  const fs::path cfg = scratch_dir() / "bad.cfg";
  std::ofstream os(cfg);
  os << "space=example1\nk=2\nseed=1\nnot_a_flag=1\n";
  os.close();
  REQUIRE(run_cli("select --config " + cfg.string()).exit_code == 1);
}

TEST_CASE("incomplete distinct-count runs exit with code 2") {
  const RunResult res = run_cli(
      "select --space example1 --theta example1 --k 3 --mode distinct "
      "--max-iterations 50 --seed 5");
  REQUIRE(res.exit_code == 2);
}

TEST_CASE("verify lemma_maxq reports the frozen maximum") {
  const RunResult res = run_cli("verify lemma_maxq --m 4 --k 3 --seed 1");
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output.find("0.421875") != std::string::npos);
}

TEST_CASE("verify lemma1 passes at the documented sizes") {
  const RunResult res = run_cli("verify lemma1 --eps 0.2 --k 30 --runs 2000 --seed 3");
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output.find("\"passed\": true") != std::string::npos);
}

TEST_CASE("verify thm2 holds on the sphere preset") {
  const RunResult res =
      run_cli("verify thm2 --preset sphere:0.05 --c 3 --seed 5 --reps 2 --scale 10");
  REQUIRE(res.exit_code == 0);
}

TEST_CASE("verify rejects unknown checks") {
  REQUIRE(run_cli("verify nonsense --seed 1").exit_code == 1);
}

TEST_CASE("gen emits deterministic action CSVs") {
  const fs::path a = scratch_dir() / "a.csv";
  const fs::path b = scratch_dir() / "b.csv";
  REQUIRE(run_cli("gen --space grid:0:2:5 --out " + a.string()).exit_code == 0);
  REQUIRE(run_cli("gen --space grid:0:2:5 --out " + b.string()).exit_code == 0);
  const std::string text = slurp(a);
  REQUIRE(text.substr(0, 7) == "idx,x0\n");
  REQUIRE(text == slurp(b));

  const fs::path k = scratch_dir() / "k.csv";
  REQUIRE(run_cli("gen --space grid:0:2:3 --kernel rbf:1.0 --out " + a.string() +
                  " --kernel-out " + k.string())
              .exit_code == 0);
  REQUIRE(slurp(k).find("1,") != std::string::npos);
}

TEST_CASE("experiment requires a seed") {
  REQUIRE(run_cli("experiment sphere --out " +
                  (scratch_dir() / "noseed").string())
              .exit_code == 1);
}

TEST_CASE("experiments replay byte-identically from their manifest") {
  const fs::path dir1 = scratch_dir() / "exp1";
  const fs::path dir2 = scratch_dir() / "exp2";
  const RunResult first = run_cli(
      "experiment sphere --seed 3 --scale 100 --reps 2 "
      "--set spreads=0.01,0.5 --set points_per=30 --out " + dir1.string());
  REQUIRE(first.exit_code == 0);
  const RunResult second = run_cli("experiment sphere --replay " +
                                   (dir1 / "manifest.json").string() + " --out " +
                                   dir2.string());
  REQUIRE(second.exit_code == 0);
  REQUIRE(slurp(dir1 / "results.csv") == slurp(dir2 / "results.csv"));
  REQUIRE(!slurp(dir1 / "results.csv").empty());
}
