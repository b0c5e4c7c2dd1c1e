#include <cstdlib>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

using namespace inkpark;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli_dispatch(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// A small cohort with its feature CSVs, shared by the tests below.
const testutil::TempDir& workspace() {
  static testutil::TempDir dir("cli");
  static bool ready = false;
  if (!ready) {
    const std::string data = (dir / "data").string();
    REQUIRE(run({"synth", "--preset", "separable", "--n-pd", "4", "--n-hc", "4", "--seed", "42", "--out", data}).code == 0);
    REQUIRE(run({"extract", "--manifest", data + "/manifest.json", "--out", (dir / "feats").string()}).code == 0);
    ready = true;
  }
  return dir;
}

std::string csv(int task) { return (workspace() / "feats").string() + "/task" + std::to_string(task) + ".csv"; }

std::vector<std::string> fast_eval(std::vector<std::string> extra) {
  std::vector<std::string> a{"evaluate", "--cv", "loocv", "--selection", "topk", "--k-percent", "2", "--budget", "4",
                             "--trees", "10", "--inner-folds", "2"};
  a.insert(a.end(), extra.begin(), extra.end());
  return a;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("synth then extract gives one CSV per task") {
    const auto& dir = workspace();
    for (int task = 1; task <= 8; ++task) CHECK(std::filesystem::exists(dir / ("feats/task" + std::to_string(task) + ".csv")));
    CHECK(std::filesystem::exists(dir / "feats/task3.provenance.json"));
    CHECK(std::filesystem::exists(dir / "data/cohort_spec.json"));
    const json spec = json::parse(testutil::slurp(dir / "data/cohort_spec.json"));
    CHECK(spec.at("seed") == 42);
  }

  TEST_CASE("evaluate twice gives byte-identical reports, at any job count") {
    const auto& dir = workspace();
    const std::string a = (dir / "r_a.json").string(), b = (dir / "r_b.json").string(), c = (dir / "r_c.json").string();
    REQUIRE(run(fast_eval({"--features", csv(1), "--seed", "7", "--jobs", "1", "--out", a})).code == 0);
    REQUIRE(run(fast_eval({"--features", csv(1), "--seed", "7", "--jobs", "1", "--out", b})).code == 0);
    REQUIRE(run(fast_eval({"--features", csv(1), "--seed", "7", "--jobs", "3", "--out", c})).code == 0);
    const std::string ta = testutil::slurp(a);
    CHECK(ta == testutil::slurp(b));
    CHECK(ta == testutil::slurp(c));
    const json rep = json::parse(ta);
    CHECK(rep.at("config").at("seed") == 7);
    CHECK(rep.at("config").at("seed_source") == "flag");
    CHECK(rep.at("self_check") == "passed");
    CHECK(rep.at("tasks").at(0).at("predictions").size() == 8);
  }

  TEST_CASE("stdout carries the report when no --out is given") {
    const Run r = run(fast_eval({"--features", csv(2), "--seed", "1"}));
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out).at("kind") == "evaluate");
  }

  TEST_CASE("ensemble over three reports lists member weights") {
    const auto& dir = workspace();
    std::vector<std::string> reports;
    for (int task : {1, 2, 3}) {
      const std::string p = (dir / ("ens_t" + std::to_string(task) + ".json")).string();
      REQUIRE(run(fast_eval({"--features", csv(task), "--seed", "5", "--out", p})).code == 0);
      reports.push_back(p);
    }
    std::vector<std::string> args{"ensemble", "--reports"};
    args.insert(args.end(), reports.begin(), reports.end());
    args.insert(args.end(), {"--mode", "top3"});
    const Run r = run(args);
    REQUIRE(r.code == 0);
    const json rep = json::parse(r.out);
    const json& members = rep.at("ensemble").at("members");
    REQUIRE(members.size() == 3);
    for (const auto& m : members) {
      CHECK(m.contains("weight"));
      CHECK(m.at("weight").get<double>() == doctest::Approx(m.at("accuracy").get<double>() / 100));
    }
    CHECK(run(args).out == r.out);

    const Run table = run({"report", "--reports", reports[0]});
    REQUIRE(table.code == 0);
    CHECK(table.out.rfind("report\tkind\ttask", 0) == 0);
  }

  TEST_CASE("unknown flags and bad values exit 1 with usage on stderr") {
    const Run r = run({"evaluate", "--no-such-flag"});
    CHECK(r.code == 1);
    CHECK(r.out.empty());
    CHECK(!r.err.empty());
    CHECK(run({"evaluate", "--features", csv(1), "--cv", "bootstrap"}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({}).code == 1);
    CHECK(run({"--help"}).code == 0);
  }

  TEST_CASE("missing input files exit 1") {
    CHECK(run({"evaluate", "--features", "/nonexistent/task1.csv"}).code == 1);
    CHECK(run({"extract", "--manifest", "/nonexistent/manifest.json", "--out", "/tmp/x"}).code == 1);
    CHECK(run({"ensemble", "--reports", "/nonexistent/r.json"}).code == 1);
  }

  TEST_CASE("seed falls back to INKPARK_SEED, then 0") {
    ::setenv("INKPARK_SEED", "1234", 1);
    const Run env = run(fast_eval({"--features", csv(4)}));
    ::unsetenv("INKPARK_SEED");
    REQUIRE(env.code == 0);
    const json e = json::parse(env.out);
    CHECK(e.at("config").at("seed") == 1234);
    CHECK(e.at("config").at("seed_source") == "env");

    const Run none = run(fast_eval({"--features", csv(4)}));
    REQUIRE(none.code == 0);
    CHECK(json::parse(none.out).at("config").at("seed") == 0);

    ::setenv("INKPARK_SEED", "not-a-number", 1);
    const Run bad = run(fast_eval({"--features", csv(4)}));
    ::unsetenv("INKPARK_SEED");
    CHECK(bad.code == 1);
  }

  TEST_CASE("train writes a model document") {
    const Run r = run({"train", "--features", csv(1), "--selection", "topk", "--k-percent", "1", "--budget", "4",
                       "--trees", "10", "--inner-folds", "2", "--seed", "3"});
    REQUIRE(r.code == 0);
    const json m = json::parse(r.out);
    CHECK(m.at("format") == "inkpark-model/1");
    CHECK(m.contains("svm"));
    CHECK(m.contains("zscore"));
  }
}
