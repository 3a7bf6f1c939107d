#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

const fs::path kDir = fs::temp_directory_path() / "entlab_cli_test";

struct Run {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  fs::create_directories(kDir);
  const fs::path o = kDir / "stdout.txt", e = kDir / "stderr.txt";
  const std::string cmd = std::string(ENTLAB_CLI) + " " + args + " >" + o.string() + " 2>" + e.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(o), slurp(e)};
}

std::string path(const char* name) { return (kDir / name).string(); }

void write(const char* name, const std::string& text) {
  fs::create_directories(kDir);
  std::ofstream(kDir / name) << text;
}

std::string pure_state(const char* labels, const char* dims, const std::vector<int>& support) {
  // Equal superposition of the listed basis indices.
  int d = 1;
  for (const auto& x : Json::parse(dims)) d *= x.get<int>();
  Json re = Json::array(), im = Json::array();
  const double a = 1.0 / static_cast<double>(support.size());
  for (int i = 0; i < d; ++i) {
    Json r = Json::array(), z = Json::array();
    for (int k = 0; k < d; ++k) {
      const bool on = std::count(support.begin(), support.end(), i) && std::count(support.begin(), support.end(), k);
      r.push_back(on ? a : 0.0);
      z.push_back(0.0);
    }
    re.push_back(r);
    im.push_back(z);
  }
  return Json{{"labels", Json::parse(labels)}, {"dims", Json::parse(dims)}, {"re", re}, {"im", im}}.dump();
}

double value_of(const Run& r) { return Json::parse(r.out)["value"].get<double>(); }

Json strip_timestamp(Json j) {
  j["header"].erase("timestamp");
  return j;
}

}  // namespace

TEST_CASE("gen is reproducible") {
  const Run a = run("gen --kind ginibre --dims A=2,B=2,C=2 --seed 7 --out " + path("g1.json"));
  const Run b = run("gen --kind ginibre --dims A=2,B=2,C=2 --seed 7 --out " + path("g2.json"));
  CHECK(a.code == 0);
  CHECK(b.code == 0);
  CHECK(a.out.rfind("digest ", 0) == 0);
  CHECK(a.out == b.out);
  CHECK(slurp(path("g1.json")) == slurp(path("g2.json")));
  const Run c = run("gen --kind ginibre --dims A=2,B=2,C=2 --seed 8 --out " + path("g3.json"));
  CHECK(c.out != a.out);
}

TEST_CASE("gen samplers feed eval") {
  REQUIRE(run("gen --kind separable --dims A=2,B=2 --seed 3 --out " + path("sep.json")).code == 0);
  const Run e = run("eval --quantity E --state " + path("sep.json"));
  REQUIRE(e.code == 0);
  CHECK(value_of(e) <= 1e-4);
  REQUIRE(run("gen --kind ppt --dims A=2,B=2 --seed 3 --out " + path("ppt.json")).code == 0);
  const Run p = run("eval --quantity PT_MIN --state " + path("ppt.json"));
  REQUIRE(p.code == 0);
  CHECK(value_of(p) >= -1e-12);
}

TEST_CASE("eval quantities") {
  write("ghz.json", pure_state(R"(["A","B","C"])", "[2,2,2]", {0, 7}));
  write("bell.json", pure_state(R"(["A","B"])", "[2,2]", {0, 3}));
  const Run c = run("eval --quantity CQMI --state " + path("ghz.json") + " --a A --b B --c C");
  REQUIRE(c.code == 0);
  CHECK(std::abs(value_of(c) - std::log(2.0)) <= 1e-10);
  const Run d = run("eval --quantity D --state " + path("g1.json") + " --sigma " + path("g1.json"));
  REQUIRE(d.code == 0);
  CHECK(std::abs(value_of(d)) <= 1e-12);
  const Run e = run("eval --quantity E --state " + path("bell.json"));
  REQUIRE(e.code == 0);
  CHECK(std::abs(value_of(e) - std::log(2.0)) <= 2e-3);
  const Json j = Json::parse(e.out);
  CHECK(j["direction"] == "upper");
  CHECK(j.contains("witness"));
  CHECK(run("eval --quantity D --state " + path("ghz.json") + " --sigma " + path("bell.json")).code == 2);
  CHECK(run("eval --quantity NOPE --state " + path("bell.json")).code == 2);
}

TEST_CASE("check and sweep exit codes") {
  CHECK(run("check --check ssa --state " + path("ghz.json")).code == 0);
  const Run s = run("sweep --check 'gt_multi(4,2)' --trials 100 --format csv");
  CHECK(s.code == 0);
  std::stringstream rows(s.out);
  std::string header, row;
  std::getline(rows, header);
  std::getline(rows, row);
  CHECK(header == "check,trials,min_gap,p05_gap,violations");
  // "id",trials,min_gap,p05_gap,violations
  std::stringstream fields(row.substr(row.rfind('"') + 2));
  std::string trials, min_gap;
  std::getline(fields, trials, ',');
  std::getline(fields, min_gap, ',');
  CHECK(trials == "100");
  CHECK(std::stod(min_gap) >= -1e-7);
  CHECK(run("check --check no_such_check").code == 2);
  CHECK(run("sweep --check ssa --trials 0").code == 2);
  CHECK(run("check --check ssa --bogus").code == 2);
}

TEST_CASE("malformed input names the offending field") {
  write("bad.json", R"({"labels":["A","B","C"],"dims":[2,2,2],"re":[[1]],"im":[[0]]})");
  const Run r = run("check --check ssa --state " + path("bad.json"));
  CHECK(r.code == 2);
  CHECK(r.err.find("'re'") != std::string::npos);
  write("wrong.json", pure_state(R"(["X","Y","Z"])", "[2,2,2]", {0, 7}));
  CHECK(run("check --check ssa --state " + path("wrong.json")).code == 2);
}

TEST_CASE("reports are reproducible modulo timestamp; config mirrors flags") {
  const Run a = run("check --check cemi_ppt --seed 5 --trial 2");
  const Run b = run("check --check cemi_ppt --seed 5 --trial 2");
  REQUIRE(a.code == 0);
  const Json ja = Json::parse(a.out), jb = Json::parse(b.out);
  CHECK(ja["header"].contains("timestamp"));
  CHECK(strip_timestamp(ja).dump() == strip_timestamp(jb).dump());
  CHECK(ja["header"]["config"]["seed"] == 5);
  CHECK(ja["report"]["check"] == "cemi_ppt");

  write("cfg.json", R"({"check":"cemi_ppt","seed":5,"trial":2})");
  const Run c = run("check --config " + path("cfg.json"));
  REQUIRE(c.code == 0);
  CHECK(strip_timestamp(Json::parse(c.out))["report"].dump() == ja["report"].dump());
  const Run d = run("check --config " + path("cfg.json") + " --seed 6");
  CHECK(Json::parse(d.out)["header"]["config"]["seed"] == 6);
  write("badcfg.json", R"({"check":"ssa","colour":"red"})");
  const Run e = run("check --config " + path("badcfg.json"));
  CHECK(e.code == 2);
  CHECK(e.err.find("colour") != std::string::npos);
  write("negcfg.json", R"({"check":"ssa","trials":-3})");
  CHECK(run("sweep --config " + path("negcfg.json")).code == 2);
}

TEST_CASE("gen --check round-trips through check --input") {
  REQUIRE(run("gen --check locc1_dpi --seed 2 --trial 1 --out " + path("in.json")).code == 0);
  const Run a = run("check --check locc1_dpi --seed 2 --trial 1 --input " + path("in.json"));
  const Run b = run("check --check locc1_dpi --seed 2 --trial 1");
  REQUIRE(a.code == 0);
  CHECK(Json::parse(a.out)["report"]["gap"] == Json::parse(b.out)["report"]["gap"]);
}
