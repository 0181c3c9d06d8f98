#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const std::string kCli = ICTMDP_CLI_PATH;
const std::string kData = ICTMDP_DATA_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ictmdp_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  const fs::path dir = scratch("io");
  const std::string cmd = kCli + " " + args + " > " + (dir / "out").string() + " 2> " + (dir / "err").string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir / "out"), slurp(dir / "err")};
}

std::string data(const std::string& name) { return kData + "/" + name; }

}  // namespace

TEST_CASE("validate shipped examples") {
  const auto r = run("validate --model " + data("two_state.yaml"));
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j["status"] == "complete");
  CHECK(j["violations"].empty());
}

TEST_CASE("solve the two-state impulse example") {
  const auto dir = scratch("solve");
  const auto r = run("solve --model " + data("two_state_impulse.yaml") + " --out " + dir.string());
  REQUIRE(r.code == 0);
  const auto j = Json::parse(slurp(dir / "report.json"));
  CHECK(j == Json::parse(r.out));
  const auto& s1 = j["result"]["states"][1];
  CHECK(s1["state"] == "s1");
  CHECK(std::abs(s1["value"].get<double>() - 0.3) <= 1e-9);
  CHECK(s1["mode"] == "impulsive");
  CHECK(s1["impulsive_action"] == "reset");
  const std::string csv = slurp(dir / "values.csv");
  CHECK(csv.rfind("state,value,mode,gradual_action,impulsive_action\n", 0) == 0);
  CHECK(csv.find(",impulsive,wait,reset") != std::string::npos);
}

TEST_CASE("epidemic solve on the static desk instance") {
  const auto r = run("epidemic-solve --params " + data("desk_epidemic_static.yaml"));
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out);
  CHECK(j["result"]["c_star"] == 1);
  CHECK(j["result"]["lambda_star"].get<double>() == doctest::Approx(5.0 / 11.0));
}

TEST_CASE("epidemic sweep") {
  const auto dir = scratch("sweep");
  const auto r = run("epidemic-sweep --params " + data("desk_epidemic_static.yaml") +
                     " --lambdas 0.2,0.5 --out " + dir.string());
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "sweep.csv").rfind("lambda,c_star,lambda_star,v_residual\n0.2,1,", 0) == 0);
  const auto j = Json::parse(r.out);
  CHECK(j["result"]["sweep"][1]["c_star"] == "inf");
}

TEST_CASE("exit codes and error records") {
  SUBCASE("parse error") {
    const auto dir = scratch("bad");
    std::ofstream(dir / "bad.yaml") << "states: [a, b\n";
    const auto r = run("validate --model " + (dir / "bad.yaml").string());
    CHECK(r.code == 2);
    const auto j = Json::parse(r.err);
    CHECK(j["status"] == "error");
    CHECK(j["code"] == 2);
    CHECK(j["kind"] == "parse");
  }
  SUBCASE("validation failure") {
    const auto dir = scratch("invalid");
    std::string text = slurp(data("two_state.yaml"));
    text.replace(text.find("cost: 1.0"), 9, "cost: 2.0");
    std::ofstream(dir / "m.yaml") << text;
    const auto v = run("validate --model " + (dir / "m.yaml").string());
    CHECK(v.code == 3);
    const auto j = Json::parse(v.out);
    CHECK(j["status"] == "invalid");
    CHECK(j["violations"][0]["rule"] == "gradual_cost_bound");
    const auto s = run("solve --model " + (dir / "m.yaml").string() + " --out " + (dir / "o").string());
    CHECK(s.code == 3);
    CHECK(Json::parse(s.err)["kind"] == "validation");
    CHECK_FALSE(fs::exists(dir / "o" / "report.json"));
  }
  SUBCASE("unknown command and missing inputs") {
    CHECK(run("bogus").code == 2);
    CHECK(run("solve").code == 2);
    CHECK(run("simulate --model " + data("two_state.yaml")).code == 2);
    CHECK(run("simulate --model " + data("two_state.yaml") + " --x0 nowhere --reps 10").code == 2);
  }
  SUBCASE("strict ratio check rejects the birth-death desk instance") {
    const auto dir = scratch("strict");
    std::string text = slurp(data("desk_epidemic.yaml"));
    text.replace(text.find("require_monotone_ratios: false"), 30, "require_monotone_ratios: true");
    std::ofstream(dir / "p.yaml") << text;
    const auto r = run("epidemic-solve --params " + (dir / "p.yaml").string());
    CHECK(r.code == 3);
  }
}

TEST_CASE("same config and seed give byte-identical artifacts") {
  const auto a = scratch("rep_a");
  const auto b = scratch("rep_b");
  const std::string args = "simulate --model " + data("two_state_impulse.yaml") +
                           " --x0 s1 --reps 500 --seed 99 --threads 3 --out ";
  REQUIRE(run(args + a.string()).code == 0);
  REQUIRE(run(args + b.string()).code == 0);
  for (const char* f : {"report.json", "trajectory.csv"}) {
    CHECK(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }

  // A config file is equivalent to the same flags.
  const auto c = scratch("rep_c");
  std::ofstream(c / "run.ini") << "model = \"" << data("two_state_impulse.yaml")
                                 << "\"\nx0 = s1\nreps = 500\nseed = 99\nthreads = 1\n";
  const auto r = run("simulate --config " + (c / "run.ini").string() + " --out " + (c / "o").string());
  REQUIRE(r.code == 0);
  CHECK(Json::parse(slurp(c / "o" / "report.json"))["result"] ==
        Json::parse(slurp(a / "report.json"))["result"]);
}

TEST_CASE("dynkin check on the two-state model") {
  const auto r = run("dynkin-check --model " + data("two_state.yaml") + " --x0 s1 --reps 2000 --t 1");
  REQUIRE(r.code == 0);
  const auto j = Json::parse(r.out)["result"];
  CHECK(std::abs(j["diff"].get<double>()) <= 3.0 * j["std_error"].get<double>() + 1e-12);
}
