// Drives the installed CLI binary end to end: exit codes, output files, the
// config-echo round trip, and sweep behavior. The binary path comes from the
// build system via LTVSTAB_CLI_PATH.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args) {
  const fs::path dir = fs::temp_directory_path() / "ltvstab_cli_capture";
  fs::create_directories(dir);
  const fs::path capture = dir / "stdout.txt";
  const std::string command =
      std::string(LTVSTAB_CLI_PATH) + " " + args + " > " + capture.string() + " 2>/dev/null";
  const int raw = std::system(command.c_str());
  std::ifstream in(capture);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return {WEXITSTATUS(raw), buffer.str()};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ltvstab_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("analyze emits the spectrum report") {
  const auto dir = fresh_dir("analyze");
  const auto result =
      run_cli("analyze --builtin example1 --horizon 2000 --out " + dir.string());
  CHECK(result.exit_code == 0);
  const json report = json::parse(read_file(dir / "analyze.json"));
  CHECK(report["exponents"][0].get<double>() == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(report["exponents"][1].get<double>() == doctest::Approx(-0.1).epsilon(1e-6));
  CHECK(report["N1"].get<int>() == 1);
  CHECK(report["converged"].get<bool>());
  const json echoed = json::parse(result.stdout_text);
  CHECK(echoed["horizon"].get<int>() == 2000);
}

TEST_CASE("limits prints thresholds, with and without a channel") {
  const auto dir = fresh_dir("limits");
  const auto bare = run_cli("limits --builtin example1 --out " + dir.string());
  CHECK(bare.exit_code == 0);
  const json report = json::parse(bare.stdout_text);
  CHECK(report["p_star"].get<double>() == doctest::Approx(0.0952).epsilon(2e-3));
  CHECK(report["lhs"].is_null());

  const auto with_channel =
      run_cli("limits --builtin example1 --bernoulli 0.11 --out " + dir.string());
  const json verdict = json::parse(with_channel.stdout_text);
  CHECK(verdict["satisfied"].get<bool>());
  CHECK(verdict["lhs"].get<double>() == doctest::Approx(0.851).epsilon(5e-3));
  CHECK(verdict["sigma_star"].get<double>() > 0.0);
}

TEST_CASE("exit codes distinguish config errors") {
  CHECK(run_cli("limits --builtin example9").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("simulate --builtin example1 --horizon 50").exit_code == 2);  // channel missing
  const auto dir = fresh_dir("badsys");
  {
    std::ofstream out(dir / "bad.json");
    out << R"({"kind": "periodic", "A": [[1, 2]], "B": [[1]]})";
  }
  CHECK(run_cli("analyze --system " + (dir / "bad.json").string()).exit_code == 2);
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("simulate writes the ensemble CSV with mandatory header") {
  const auto dir = fresh_dir("simulate");
  const auto result = run_cli(
      "simulate --builtin example1 --bernoulli 0.2 --horizon 60 --realizations 100 "
      "--oracle --out " + dir.string());
  CHECK(result.exit_code == 0);
  const std::string csv = read_file(dir / "ensemble.csv");
  CHECK(csv.rfind("t,msq,oracle,flagged_count\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 62);  // header + 61 rows
}

TEST_CASE("config echo replays byte-for-byte") {
  SUBCASE("analyze") {
    const auto dir1 = fresh_dir("replay_a1");
    const auto dir2 = fresh_dir("replay_a2");
    CHECK(run_cli("analyze --builtin example2 --horizon 3000 --out " + dir1.string()).exit_code == 0);
    CHECK(run_cli("analyze --config " + (dir1 / "analyze.config.json").string() + " --out " +
                  dir2.string())
              .exit_code == 0);
    CHECK(read_file(dir1 / "analyze.json") == read_file(dir2 / "analyze.json"));
  }
  SUBCASE("simulate, including noise and oracle columns") {
    const auto dir1 = fresh_dir("replay_s1");
    const auto dir2 = fresh_dir("replay_s2");
    CHECK(run_cli("simulate --builtin example1 --bernoulli 0.12 --horizon 80 --realizations 50 "
                  "--noise-variance 1 --oracle --seed 7 --out " + dir1.string())
              .exit_code == 0);
    CHECK(run_cli("simulate --config " + (dir1 / "simulate.config.json").string() + " --out " +
                  dir2.string())
              .exit_code == 0);
    CHECK(read_file(dir1 / "ensemble.csv") == read_file(dir2 / "ensemble.csv"));
  }
  SUBCASE("file-defined system is inlined into the echo") {
    const auto dir1 = fresh_dir("replay_f1");
    const auto dir2 = fresh_dir("replay_f2");
    {
      std::ofstream out(dir1 / "sys.json");
      out << R"({"kind": "periodic", "A": [[[2.0, 0.0], [0.0, 0.5]]], "B": [[[1.0], [1.0]]]})";
    }
    CHECK(run_cli("synthesize --system " + (dir1 / "sys.json").string() +
                  " --bernoulli 0.9 --horizon 40 --out " + dir1.string())
              .exit_code == 0);
    fs::remove(dir1 / "sys.json");  // replay must not need the original file
    CHECK(run_cli("synthesize --config " + (dir1 / "synthesize.config.json").string() + " --out " +
                  dir2.string())
              .exit_code == 0);
    CHECK(read_file(dir1 / "gains.csv") == read_file(dir2 / "gains.csv"));
    CHECK(read_file(dir1 / "riccati.json") == read_file(dir2 / "riccati.json"));
  }
}

TEST_CASE("sweep flips the analytic verdict once, within a grid step of p*") {
  const auto dir = fresh_dir("sweep");
  const auto result = run_cli(
      "sweep --builtin example1 --param p --min 0.02 --max 0.30 --steps 29 --out " + dir.string());
  CHECK(result.exit_code == 0);
  std::ifstream in(dir / "sweep.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "p,mu,sigma2,lhs,satisfied,beta_hat,stable");
  std::vector<double> grid;
  std::vector<int> satisfied;
  while (std::getline(in, line)) {
    std::stringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() == 7);
    grid.push_back(std::stod(fields[0]));
    satisfied.push_back(std::stoi(fields[4]));
  }
  REQUIRE(grid.size() == 29);
  int flips = 0;
  std::size_t flip_at = 0;
  for (std::size_t i = 1; i < satisfied.size(); ++i) {
    if (satisfied[i] != satisfied[i - 1]) {
      ++flips;
      flip_at = i;
    }
  }
  CHECK(flips == 1);
  const double p_star = 0.09516258196404048;
  const double step = grid[1] - grid[0];
  CHECK(grid[flip_at - 1] <= p_star + 1e-12);
  CHECK(grid[flip_at] >= p_star - step);
  CHECK(grid[flip_at] - p_star <= step + 1e-12);
}

TEST_CASE("verify certifies a comfortably stabilizable channel") {
  const auto dir = fresh_dir("verify");
  const auto good = run_cli("verify --builtin example1 --bernoulli 0.5 --horizon 150 "
                            "--truncation 150 --out " + dir.string());
  CHECK(good.exit_code == 0);
  const json report = json::parse(good.stdout_text);
  CHECK(report["certified"].get<bool>());
  CHECK_FALSE(report["diverged"].get<bool>());

  // below the threshold the series never settles at short truncations ...
  const auto bad = run_cli("verify --builtin example1 --bernoulli 0.05 --horizon 150 "
                           "--truncation 150 --out " + dir.string());
  CHECK(bad.exit_code == 0);
  const json bad_report = json::parse(bad.stdout_text);
  CHECK_FALSE(bad_report["certified"].get<bool>());
  CHECK_FALSE(bad_report["series_converged"].get<bool>());

  // ... and blows through the overflow guard at longer ones
  const auto diverged = run_cli("verify --builtin example1 --bernoulli 0.05 --horizon 2000 "
                                "--truncation 2000 --out " + dir.string());
  CHECK(diverged.exit_code == 0);
  const json diverged_report = json::parse(diverged.stdout_text);
  CHECK(diverged_report["diverged"].get<bool>());
  CHECK_FALSE(diverged_report["certified"].get<bool>());
}
