#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include <json.hpp>

#include "nctails/io.hpp"
#include "nctails/stats.hpp"

namespace fs = std::filesystem;
using nctails::io::read_text_file;
using nctails::io::write_text_file;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" NCTAILS_CLI "' " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("nctails_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const char* kConfig = R"({
  "name": "cli",
  "blocks": [{"d": 1, "singular_values": [3]}, {"d": 2, "singular_values": [2, 1]}],
  "trials": 20000,
  "seed": 11,
  "checks": ["variance_identity", "theorem21"]
})";

double field(const std::string& out, const std::string& key) {
  const auto pos = out.find(key + "=");
  REQUIRE(pos != std::string::npos);
  return std::stod(out.substr(pos + key.size() + 1));
}

}  // namespace

TEST_CASE("kfunc") {
  const auto dir = scratch_dir("kfunc");
  write_text_file(dir / "a.txt", "# a = (1, 1, 1)\n1\n1\n1\n");
  const Run r = run("kfunc " + q(dir / "a.txt") + " --t 0,1,2");
  CHECK(r.status == 0);
  std::istringstream lines(r.out);
  std::string header, row0, row1, row2;
  std::getline(lines, header);
  std::getline(lines, row0);
  std::getline(lines, row1);
  std::getline(lines, row2);
  CHECK(header == "t,k_exact,k_holmstedt");
  CHECK(row0.rfind("0,0,", 0) == 0);
  // K(1) = ||min(|a|, mu)||_1 + ||(|a| - mu)_+||_2 with mu solving ||min(|a|, mu)||_2 = 1, so mu = 1/sqrt(3).
  CHECK(row1.rfind("1,", 0) == 0);
  CHECK(std::stod(row1.substr(2)) == doctest::Approx(std::sqrt(3.0)));
  CHECK(row2.rfind("2,3,", 0) == 0);

  write_text_file(dir / "b.txt", "2\n1\n");
  const Run r2 = run("kfunc " + q(dir / "b.txt") + " --t 1 --out " + q(dir / "k.csv"));
  CHECK(r2.status == 0);
  const std::string csv = read_text_file(dir / "k.csv");
  // K(1) = ||a||_2.
  CHECK(csv.find("\n1,2.23606797749979,") != std::string::npos);
}

TEST_CASE("kfunc errors") {
  const auto dir = scratch_dir("kfunc_err");
  const Run missing = run("kfunc " + q(dir / "nope.txt") + " --t 1");
  CHECK(missing.status == 3);
  CHECK(missing.out.find("nope.txt") != std::string::npos);

  write_text_file(dir / "bad.txt", "1\nx\n");
  const Run bad = run("kfunc " + q(dir / "bad.txt") + " --t 1");
  CHECK(bad.status == 2);
  CHECK(bad.out.find("line 2") != std::string::npos);

  write_text_file(dir / "ok.txt", "1\n");
  CHECK(run("kfunc " + q(dir / "ok.txt")).status == 2);
  CHECK(run("kfunc " + q(dir / "ok.txt") + " --t -1").status == 2);
}

TEST_CASE("simulate is deterministic and matches the variance identity") {
  const auto dir = scratch_dir("simulate");
  write_text_file(dir / "cfg.json", kConfig);
  for (const char* kind : {"epsilon", "gauss"}) {
    CAPTURE(kind);
    const Run a = run("simulate " + q(dir / "cfg.json") + " --kind " + kind + " --out " + q(dir / "a.csv"));
    const Run b = run("simulate " + q(dir / "cfg.json") + " --kind " + kind + " --workers 3 --out " + q(dir / "b.csv"));
    REQUIRE(a.status == 0);
    REQUIRE(b.status == 0);
    CHECK(a.out == b.out);
    CHECK(read_text_file(dir / "a.csv") == read_text_file(dir / "b.csv"));
    CHECK(field(a.out, "std") == doctest::Approx(std::sqrt(19.0)).epsilon(0.05));
    const auto meta = nlohmann::json::parse(read_text_file(dir / "a.meta.json"));
    CHECK(meta["kind"] == kind);
    CHECK(meta["seed"] == 11);
    CHECK(meta["trials"] == 20000);
  }
  const Run other = run("simulate " + q(dir / "cfg.json") + " --kind epsilon --seed 12 --trials 100");
  CHECK(other.status == 0);
  CHECK(other.out.find("trials=100") != std::string::npos);

  CHECK(run("simulate " + q(dir / "cfg.json") + " --kind bogus").status == 2);
  CHECK(run("simulate " + q(dir / "cfg.json")).status == 2);
}

TEST_CASE("seed falls back to NC_TAILS_SEED") {
  const auto dir = scratch_dir("seed");
  auto cfg = nlohmann::json::parse(kConfig);
  cfg.erase("seed");
  write_text_file(dir / "cfg.json", cfg.dump());
  const std::string sim = "simulate " + q(dir / "cfg.json") + " --kind epsilon --trials 1000";
  CHECK(run(sim).status == 2);
  const Run a = run(sim, "NC_TAILS_SEED=0x1f");
  const Run b = run(sim + " --seed 31");
  CHECK(a.status == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("verify") {
  const auto dir = scratch_dir("verify");
  write_text_file(dir / "cfg.json", kConfig);
  const Run ok = run("verify " + q(dir / "cfg.json") + " --report " + q(dir / "rep"));
  CHECK(ok.status == 0);
  CHECK(ok.out.find("PASS variance_identity") != std::string::npos);
  CHECK(ok.out.find("PASS theorem21") != std::string::npos);
  CHECK(fs::exists(dir / "rep" / "report.json"));
  CHECK(fs::exists(dir / "rep" / "theorem21_plot.tsv"));

  const Run again = run("verify " + q(dir / "cfg.json") + " --workers 2 --report " + q(dir / "rep2"));
  CHECK(again.status == 0);
  CHECK(read_text_file(dir / "rep" / "report.json") == read_text_file(dir / "rep2" / "report.json"));

  auto tight = nlohmann::json::parse(kConfig);
  tight["tolerances"] = {{"alpha_max", 1.0001}};
  write_text_file(dir / "tight.json", tight.dump());
  const Run fail = run("verify " + q(dir / "tight.json") + " --report " + q(dir / "rep3"));
  CHECK(fail.status == 1);
  CHECK(fail.out.find("FAIL theorem21") != std::string::npos);

  write_text_file(dir / "blocker", "x");
  CHECK(run("verify " + q(dir / "cfg.json") + " --report " + q(dir / "blocker" / "sub")).status == 3);

  auto bad = nlohmann::json::parse(kConfig);
  bad["checks"] = {"nosuch"};
  write_text_file(dir / "bad.json", bad.dump());
  const Run cfg_err = run("verify " + q(dir / "bad.json") + " --report " + q(dir / "rep4"));
  CHECK(cfg_err.status == 2);
  CHECK(cfg_err.out.find("checks[0]") != std::string::npos);
}

TEST_CASE("verify on the bundled commutative scenario") {
  const auto dir = scratch_dir("verify_commutative");
  const Run r = run("verify '" NCTAILS_SCENARIO_DIR "/commutative.json' --report " + q(dir / "rep"));
  CHECK(r.status == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("norms") {
  const auto dir = scratch_dir("norms");
  std::string constant = "trial,value\n";
  for (int i = 0; i < 100; ++i) constant += std::to_string(i) + ",-2\n";
  write_text_file(dir / "c.csv", constant);
  const Run r = run("norms " + q(dir / "c.csv") + " --orlicz-p 1,2 --pnorms 1,3 --lorentz 2 inf --orlicz-lorentz 4 2");
  REQUIRE(r.status == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "norm,param,value,reliable");
  std::getline(lines, line);
  CHECK(line.rfind("orlicz_exp,1,", 0) == 0);
  CHECK(std::stod(line.substr(13)) == doctest::Approx(2.0 / std::log(2.0)));
  std::getline(lines, line);
  CHECK(std::stod(line.substr(13)) == doctest::Approx(2.0 / std::sqrt(std::log(2.0))));
  CHECK(r.out.find("p,1,2,1") != std::string::npos);
  CHECK(r.out.find("p,3,2,0") != std::string::npos);
  CHECK(r.out.find("lorentz,2:inf,20,1") != std::string::npos);

  // Standard normal values: (E|g|^p)^(1/p) for p = 2 is 1.
  std::string gauss = "value\n";
  for (int i = 1; i < 2000; ++i) gauss += std::to_string(nctails::stats::normal_quantile(i / 2000.0)) + "\n";
  write_text_file(dir / "g.csv", gauss);
  const Run g = run("norms " + q(dir / "g.csv") + " --pnorms 2");
  CHECK(g.status == 0);
  const auto pos = g.out.find("p,2,");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(g.out.substr(pos + 4)) == doctest::Approx(1.0).epsilon(0.02));

  CHECK(run("norms " + q(dir / "c.csv") + " --lorentz 0 2").status == 2);
  CHECK(run("norms " + q(dir / "c.csv") + " --orlicz-p -1").status == 2);
  CHECK(run("norms " + q(dir / "missing.csv") + " --pnorms 1").status == 3);
}

TEST_CASE("help and usage") {
  CHECK(run("--help").status == 0);
  for (const char* sub : {"kfunc", "simulate", "verify", "norms"}) {
    CAPTURE(sub);
    const Run r = run(std::string(sub) + " --help");
    CHECK(r.status == 0);
    CHECK(r.out.find("Usage") != std::string::npos);
  }
  CHECK(run("").status == 2);
  CHECK(run("nosuch").status == 2);
}
