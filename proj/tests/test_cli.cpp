#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kSpecs = COPULA_SPECS_DIR;

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("copula_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const fs::path out = scratch() / "stdout.txt";
  const std::string cmd =
      env + " " + COPULA_CLI_PATH + " " + args + " > " + out.string() + " 2> " + (scratch() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  std::ifstream f(out);
  std::stringstream ss;
  ss << f.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string spec(const std::string& name) { return (kSpecs / name).string(); }

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("check") {
  auto r = run("check " + spec("A3.json") + " --property si1");
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["si"] == true);
  r = run("check " + spec("A3.json") + " --property si2");
  CHECK(r.code == 1);
  const json v = json::parse(r.out);
  CHECK(v["witness"].size() == 3);
  CHECK(v["max_violation"].get<double>() > 0.3);
  CHECK(run("check " + spec("pi.json") + " --property idempotent").code == 0);
  CHECK(run("check " + spec("A3.json") + " --property idempotent").code == 1);
  CHECK(run("check " + spec("cminus.json") + " --property nqd").code == 0);
  CHECK(run("check " + spec("cminus.json") + " --property complete-dependence").code == 0);
  CHECK(run("check " + spec("pi.json") + " --property complete-dependence").code == 1);
  CHECK(run("check " + spec("cminus.json") + " --property sd1").code == 0);
  CHECK(run("check " + spec("A3.csv") + " --property si1").code == 0);
}

TEST_CASE("input errors exit with 2") {
  CHECK(run("check " + spec("missing.json") + " --property si1").code == 2);
  CHECK(run("check " + spec("A3.json") + " --property bogus").code == 2);
  const fs::path bad = scratch() / "bad.json";
  std::ofstream(bad) << R"({"type": "checkerboard", "matrix": [[0.9, 0.1], [0.2, 0.8]]})";
  CHECK(run("check " + bad.string() + " --property si1").code == 2);
  std::ofstream(scratch() / "broken.json") << "{not json";
  CHECK(run("check " + (scratch() / "broken.json").string() + " --property si1").code == 2);
  CHECK(run("product " + spec("clayton_2.json") + " " + spec("A3.json") + " " +
            (scratch() / "p.json").string(), "COPULA_GRID_CAP=100").code == 2);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("product") {
  const fs::path out = scratch() / "sq.json";
  auto r = run("product " + spec("A3.json") + " " + spec("A3.json") + " " + out.string() + " --oracle");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["oracle"]["max_discrepancy"].get<double>() <= 1e-12);
  const json sq = json::parse(read_file(out));
  const double expected[3][3] = {{4.0 / 9, 2.0 / 9, 1.0 / 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, {2.0 / 9, 4.0 / 9, 1.0 / 3}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(sq["matrix"][i][j].get<double>() - expected[i][j]) <= 1e-15);

  REQUIRE(run("product " + spec("cplus.json") + " " + spec("A3.json") + " " + out.string()).code == 0);
  CHECK(json::parse(read_file(out)) == json::parse(read_file(kSpecs / "A3.json")));
  REQUIRE(run("product " + spec("pi.json") + " " + spec("clayton_2.json") + " " + out.string()).code == 0);
  CHECK(json::parse(read_file(out))["type"] == "product");
}

TEST_CASE("iterate") {
  const fs::path dir = scratch() / "iter";
  auto r = run("iterate " + spec("A3.json") + " " + dir.string() + " --tol 1e-8 --max-iter 200");
  REQUIRE(r.code == 0);
  const json rep = json::parse(read_file(dir / "report.json"));
  CHECK(rep["n_steps"].get<int>() <= 60);
  CHECK(rep["intervals"] == json::parse("[[0.0, 1.0]]"));
  const std::string csv = read_file(dir / "steps.csv");
  CHECK(csv.rfind("step,d_inf_gap,d1_gap\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == rep["n_steps"].get<int>() + 1);

  r = run("iterate " + spec("cplus.json") + " " + dir.string());
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["n_steps"] == 1);
  CHECK(json::parse(r.out)["intervals"].empty());

  r = run("iterate " + spec("ordinal_sum_two_blocks.json") + " " + dir.string());
  CHECK(r.code == 0);
  CHECK(json::parse(r.out)["n_steps"] == 1);
  CHECK(json::parse(read_file(dir / "report.json"))["limit"] ==
        json::parse(read_file(kSpecs / "ordinal_sum_two_blocks.json")));

  CHECK(run("iterate " + spec("A3_transposed.json") + " " + dir.string()).code == 1);
  CHECK(run("iterate " + spec("A3.json") + " " + dir.string() + " --tol 1e-14 --max-iter 5").code == 3);
}

TEST_CASE("derivative trace") {
  const fs::path csv = scratch() / "trace.csv";
  REQUIRE(run("derivative-trace " + spec("A3.json") + " " + csv.string() +
              " --component 1 --at 0.3333333333333333 --points 3").code == 0);
  CHECK(read_file(csv) == "u,d1\n0.16666666666666666,0.66666666666666663\n0.5,0.33333333333333331\n0.83333333333333337,0\n");
  REQUIRE(run("derivative-trace " + spec("A3.json") + " " + csv.string() +
              " --component 2 --at 0.3333333333333333 --points 3").code == 0);
  CHECK(read_file(csv) == "v,d2\n0.16666666666666666,0.66666666666666663\n0.5,0\n0.83333333333333337,0.33333333333333331\n");
  REQUIRE(run("derivative-trace " + spec("pi.json") + " " + csv.string() + " --at 0.5 --points 5").code == 0);
  std::istringstream lines(read_file(csv));
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(line.substr(line.find(',') + 1) == "0.5");
  }
  CHECK(rows == 5);
}

TEST_CASE("decompose") {
  auto intervals = [](const Run& r) { return json::parse(r.out)["intervals"]; };
  const auto two = run("decompose " + spec("ordinal_sum_two_blocks.json"));
  REQUIRE(two.code == 0);
  REQUIRE(intervals(two).size() == 2);
  CHECK(std::abs(intervals(two)[0][1].get<double>() - 1.0 / 3) <= 1e-12);
  CHECK(std::abs(intervals(two)[1][0].get<double>() - 5.0 / 6) <= 1e-12);
  const auto upper = run("decompose " + spec("ordinal_sum_upper_block.json"));
  REQUIRE(upper.code == 0);
  CHECK(intervals(upper).size() == 1);
  const auto sixths = run("decompose " + spec("ordinal_sum_sixths.json"));
  REQUIRE(sixths.code == 0);
  CHECK(intervals(sixths).size() == 6);
  CHECK(intervals(run("decompose " + spec("cplus.json"))).empty());
  CHECK(intervals(run("decompose " + spec("pi.json"))) == json::parse("[[0.0, 1.0]]"));
  CHECK(run("decompose " + spec("A3.json")).code == 1);
}

TEST_CASE("metric") {
  auto value = [](const Run& r) { return json::parse(r.out)["value"].get<double>(); };
  const auto sob = run("metric " + spec("pi.json") + " --metric sobolev-diag");
  REQUIRE(sob.code == 0);
  CHECK(std::abs(value(sob) - 2.0 / 3) <= 1e-9);
  CHECK(json::parse(sob.out)["n_nodes"] == 1025);
  CHECK(std::abs(value(run("metric " + spec("pi.json") + " " + spec("cplus.json") + " --metric d1")) - 1.0 / 3) <= 1e-6);
  CHECK(value(run("metric " + spec("A3.json") + " " + spec("A3.json") + " --metric dinf")) == 0.0);
  CHECK(std::abs(value(run("metric " + spec("pi.json") + " " + spec("cminus.json"))) - 0.25) <= 1e-6);
}

TEST_CASE("identical invocations give identical output") {
  const fs::path a = scratch() / "a", b = scratch() / "b";
  REQUIRE(run("iterate " + spec("A3.json") + " " + a.string()).code == 0);
  REQUIRE(run("iterate " + spec("A3.json") + " " + b.string()).code == 0);
  CHECK(read_file(a / "report.json") == read_file(b / "report.json"));
  CHECK(read_file(a / "steps.csv") == read_file(b / "steps.csv"));
  const auto m1 = run("metric " + spec("clayton_2.json") + " " + spec("gumbel_ev_3.json") + " --metric d1");
  const auto m2 = run("metric " + spec("clayton_2.json") + " " + spec("gumbel_ev_3.json") + " --metric d1");
  CHECK(m1.out == m2.out);
}
