#include <doctest.h>

#include "skm/cli.hpp"
#include "skm/harness.hpp"
#include "support.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace skm;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Value of a "key: value" line.
std::string field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  }
  return {};
}

std::string fx(const char* name) { return test::fixture(name).string(); }

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  const Result unknown = run({"gain", "--m", "10", "--n", "2", "--bogus", "1"});
  CHECK(unknown.code == kExitUsage);
  CHECK(unknown.err.find("--bogus") != std::string::npos);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(run({"generate", "--family", "gaussian", "--n", "3", "--out", "x"}).code == kExitUsage);
  CHECK(run({"generate", "--family", "cubic", "--m", "3", "--n", "3", "--out", "x"}).code == kExitUsage);
  CHECK(run({"gain", "--m", "ten", "--n", "2"}).code == kExitUsage);
}

TEST_CASE("--help on every subcommand") {
  const std::vector<std::pair<std::string, std::vector<std::string>>> expected{
      {"generate", {"--family", "--m", "--n", "--lo", "--hi", "--seed", "--out"}},
      {"solve",
       {"--in", "--beta", "--lambda", "--halting", "--threshold", "--seed", "--max-iterations", "--check-interval",
        "--time-limit", "--track-satisfied", "--trace-out", "--x-out"}},
      {"certify", {"--in", "--beta", "--lambda", "--seed", "--L2"}},
      {"sweep",
       {"--in", "--betas", "--lambdas", "--trials", "--halting", "--threshold", "--seed", "--max-iterations",
        "--check-interval", "--time-limit", "--jobs", "--out", "--aggregate-out", "--plot-out"}},
      {"gain", {"--m", "--n", "--s", "--c", "--C"}},
      {"convert", {"--mps", "--pstar", "--out"}},
      {"compare-bk",
       {"--family", "--m", "--n", "--lo", "--hi", "--seed", "--trials", "--betas", "--block-sizes", "--lambda",
        "--threshold", "--max-iterations", "--time-limit", "--out"}},
  };
  for (const auto& [cmd, flags] : expected) {
    CAPTURE(cmd);
    const Result r = run({cmd, "--help"});
    CHECK(r.code == kExitOk);
    for (const auto& flag : flags) {
      CAPTURE(flag);
      CHECK(r.out.find(flag) != std::string::npos);
    }
  }
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("generate") {
  test::TempDir dir("gen");
  const std::string a = (dir / "a.skm").string(), b = (dir / "b.skm").string();
  const Result first = run({"generate", "--family", "gaussian", "--m", "100", "--n", "10", "--seed", "7", "--out", a});
  const Result second = run({"generate", "--family", "gaussian", "--m", "100", "--n", "10", "--seed", "7", "--out", b});
  REQUIRE(first.code == kExitOk);
  REQUIRE(second.code == kExitOk);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a + ".witness") == slurp(b + ".witness"));
  CHECK(first.out == second.out);
  CHECK(field(first.out, "m") == "100");
  CHECK(field(first.out, "witness max violation") == "0");
  CHECK(field(first.out, "row norm range").front() == '[');

  const Result corr = run({"generate", "--family", "correlated", "--m", "50", "--n", "5", "--lo", "0.9", "--hi",
                           "1.0", "--seed", "3", "--out", a});
  CHECK(corr.code == kExitOk);
  CHECK(field(corr.out, "single-signed rows") == "yes");

  CHECK(run({"generate", "--family", "correlated", "--m", "5", "--n", "2", "--lo", "1", "--hi", "1", "--out", a}).code ==
        kExitUsage);
  CHECK(run({"generate", "--family", "gaussian", "--m", "5", "--n", "2", "--out", (dir / "no" / "x").string()}).code ==
        kExitRuntime);
}

TEST_CASE("solve") {
  const Result r = run({"solve", "--in", fx("tiny_feasible.skm"), "--beta", "4", "--lambda", "1"});
  REQUIRE(r.code == kExitOk);
  CHECK(field(r.out, "halted_reason") == "converged");
  CHECK(std::stod(field(r.out, "final_residual")) <= kDefaultResidualThreshold);

  const std::vector<std::string> args{"solve", "--in", fx("tiny_feasible.skm"), "--beta", "2", "--lambda", "1.5",
                                      "--seed", "11"};
  CHECK(field(run(args).out, "iterations") == field(run(args).out, "iterations"));

  CHECK(run({"solve", "--in", fx("tiny_feasible.skm"), "--lambda", "2.5"}).code == kExitUsage);
  CHECK(run({"solve", "--in", fx("tiny_feasible.skm"), "--beta", "5"}).code == kExitUsage);
  CHECK(run({"solve", "--in", fx("tiny_feasible.skm"), "--halting", "sometimes"}).code == kExitUsage);
  CHECK(run({"solve", "--in", fx("does_not_exist.skm")}).code == kExitRuntime);
  CHECK(run({"solve", "--in", fx("malformed.skm")}).code == kExitRuntime);

  const Result capped = run({"solve", "--in", fx("infeasible_2d.skm"), "--max-iterations", "30"});
  CHECK(capped.code == kExitOk);
  CHECK(field(capped.out, "halted_reason") == "iteration-cap");
  CHECK(field(capped.out, "iterations") == "30");

  test::TempDir dir("solve");
  const std::string trace = (dir / "trace.csv").string(), x = (dir / "x.vec").string();
  const Result traced = run({"solve", "--in", fx("tiny_feasible.skm"), "--halting", "relative-residual", "--threshold",
                             "0.5", "--track-satisfied", "--trace-out", trace, "--x-out", x});
  CHECK(traced.code == kExitOk);
  CHECK(slurp(trace).rfind(std::string(kTraceCsvHeader), 0) == 0);
  CHECK(slurp(x).rfind("skm-vector v1 2", 0) == 0);
}

TEST_CASE("certify") {
  const Result ok = run({"certify", "--in", fx("certify_feasible.skm"), "--seed", "1"});
  CHECK(ok.code == kExitOk);
  CHECK(std::stod(field(ok.out, "theta")) < std::stod(field(ok.out, "threshold")));
  CHECK(field(ok.out, "verdict").rfind("feasible", 0) == 0);

  const Result origin = run({"certify", "--in", fx("certify_origin.skm")});
  CHECK(origin.code == kExitOk);
  CHECK(field(origin.out, "iterations") == "0");

  for (const char* name : {"infeasible_1d.skm", "infeasible_2d.skm"}) {
    for (const char* seed : {"0", "1", "2"}) {
      const Result r = run({"certify", "--in", fx(name), "--seed", seed, "--lambda", "1.5"});
      CHECK(r.code == kExitNoCertificate);
      CHECK_FALSE(field(r.out, "failure_probability_bound").empty());
      CHECK(field(r.out, "iterations") == field(r.out, "iteration_bound"));
    }
  }
  const Result one_d = run({"certify", "--in", fx("infeasible_1d.skm")});
  CHECK(field(one_d.out, "sigma") == "6");

  CHECK(run({"certify", "--in", fx("noninteger.skm")}).code == kExitRuntime);
  CHECK(run({"certify", "--in", fx("certify_feasible.skm"), "--lambda", "2"}).code == kExitUsage);
  CHECK(run({"certify", "--in", fx("certify_feasible.skm"), "--L2", "-1"}).code == kExitUsage);
  CHECK(run({"certify", "--in", fx("certify_feasible.skm"), "--L2", "3"}).code == kExitOk);
}

TEST_CASE("sweep") {
  test::TempDir dir("sweep");
  const std::string in = (dir / "g.skm").string();
  REQUIRE(run({"generate", "--family", "gaussian", "--m", "60", "--n", "5", "--seed", "2", "--out", in}).code ==
          kExitOk);
  const std::string csv = (dir / "runs.csv").string(), agg = (dir / "agg.csv").string(),
                    svg = (dir / "plot.svg").string();
  const Result r = run({"sweep", "--in", in, "--betas", "1,6,60", "--lambdas", "1,1.5", "--trials", "2", "--out", csv,
                        "--aggregate-out", agg, "--plot-out", svg, "--jobs", "2"});
  REQUIRE(r.code == kExitOk);
  std::ifstream runs(csv);
  CHECK(read_sweep_csv(runs).size() == 12);
  CHECK(slurp(agg).rfind(std::string(kAggregateCsvHeader), 0) == 0);
  CHECK(slurp(svg).find("<svg") != std::string::npos);
  CHECK(r.out.find("median_seconds") != std::string::npos);

  CHECK(run({"sweep", "--in", in, "--betas", "61"}).code == kExitUsage);
  CHECK(run({"sweep", "--in", in, "--trials", "0"}).code == kExitUsage);
}

TEST_CASE("gain") {
  const Result zero = run({"gain", "--m", "200", "--n", "10", "--c", "1", "--C", "100", "--s", "0"});
  REQUIRE(zero.code == kExitOk);
  CHECK(field(zero.out, "optimal_beta") == "1");

  const Result half = run({"gain", "--m", "200", "--n", "10", "--c", "1", "--C", "100", "--s", "100"});
  REQUIRE(half.code == kExitOk);
  std::istringstream table(half.out);
  std::string line;
  double g1 = 0, g10 = 0;
  while (std::getline(table, line)) {
    std::istringstream row(line);
    std::size_t beta = 0;
    double g = 0;
    if (row >> beta >> g) {
      if (beta == 1) g1 = g;
      if (beta == 10) g10 = g;
    }
  }
  CHECK(g1 == doctest::Approx(0.5 / 110));
  CHECK(g10 > g1);
  CHECK(run({"gain", "--m", "10", "--n", "2", "--s", "11"}).code == kExitUsage);
}

TEST_CASE("convert") {
  test::TempDir dir("convert");
  const std::string out = (dir / "lp.skm").string();
  const Result r = run({"convert", "--mps", fx("tiny_lp.mps"), "--out", out});
  REQUIRE(r.code == kExitOk);
  CHECK(field(r.out, "stacked") == "7 x 2");
  CHECK(field(r.out, "p_star") == "5");
  CHECK(slurp(out).rfind("skm-problem v1 7 2", 0) == 0);

  const Result explicit_star = run({"convert", "--mps", fx("eq_only.mps"), "--pstar", "3", "--out", out});
  CHECK(explicit_star.code == kExitOk);
  CHECK(field(explicit_star.out, "stacked") == "8 x 3");
  CHECK(run({"convert", "--mps", fx("eq_only.mps"), "--out", out}).code == kExitUsage);

  for (const char* bad : {"ranges.mps", "unknown_section.mps", "duplicate_entry.mps", "empty_columns.mps"}) {
    const Result e = run({"convert", "--mps", fx(bad), "--pstar", "0", "--out", out});
    CHECK(e.code == kExitRuntime);
    CHECK(e.err.find("line") != std::string::npos);
  }
}

TEST_CASE("compare-bk") {
  test::TempDir dir("bk");
  const std::string csv = (dir / "cmp.csv").string();
  const Result r = run({"compare-bk", "--m", "200", "--n", "10", "--trials", "2", "--betas", "1,20", "--block-sizes",
                        "10,20", "--out", csv});
  REQUIRE(r.code == kExitOk);
  const std::string faster = field(r.out, "faster");
  CHECK((faster == "bk" || faster == "skm"));
  CHECK(slurp(csv).rfind(std::string(kComparisonCsvHeader), 0) == 0);
  CHECK(run({"compare-bk", "--m", "20", "--block-sizes", "21"}).code == kExitUsage);
}
