#include <doctest.h>

#include "skm/harness.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

using namespace skm;

namespace {

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double median(std::vector<double> v) { return summarize(std::move(v)).median; }

SweepSpec small_spec() {
  SweepSpec spec;
  spec.beta_grid = {1, 10, 60};
  spec.lambda_grid = {1.0, 1.6};
  spec.trials = 3;
  spec.seed_base = 500;
  return spec;
}

}  // namespace

TEST_CASE("summarize") {
  const Summary one = summarize({4.0});
  CHECK(one.median == 4.0);
  CHECK(one.mean == 4.0);
  CHECK(one.stddev == 0.0);
  const Summary four = summarize({4, 1, 3, 2});
  CHECK(four.median == 2.5);
  CHECK(four.mean == 2.5);
  CHECK(four.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(summarize({}).median == 0.0);
}

TEST_CASE("sweep spec validation") {
  SweepSpec spec = small_spec();
  CHECK_NOTHROW(validate(spec, 60));
  CHECK_THROWS(validate(spec, 59));
  spec.trials = 0;
  CHECK_THROWS(validate(spec, 60));
  spec = small_spec();
  spec.lambda_grid = {};
  CHECK_THROWS(validate(spec, 60));
  spec = small_spec();
  spec.lambda_grid = {2.5};
  CHECK_THROWS(validate(spec, 60));
  spec = small_spec();
  spec.jobs = 0;
  CHECK_THROWS(validate(spec, 60));
}

TEST_CASE("run_sweep") {
  const GeneratedProblem g = gen_gaussian(60, 6, 17);
  const SweepSpec spec = small_spec();
  const SweepResult r = run_sweep(g.problem, spec);
  REQUIRE(r.records.size() == 3 * 2 * 3);
  REQUIRE(r.aggregates.size() == 6);

  SUBCASE("layout and seeds") {
    std::size_t i = 0;
    for (std::size_t beta : spec.beta_grid) {
      for (double lambda : spec.lambda_grid) {
        for (std::size_t t = 0; t < spec.trials; ++t, ++i) {
          CHECK(r.records[i].beta == beta);
          CHECK(r.records[i].lambda == lambda);
          CHECK(r.records[i].trial == t);
          CHECK(r.records[i].seed == 500 + t);
          CHECK(r.records[i].halted_reason == HaltReason::Converged);
          CHECK(r.records[i].final_residual <= kDefaultResidualThreshold);
        }
      }
    }
  }

  SUBCASE("re-running reproduces everything but timings") {
    SweepSpec parallel = spec;
    parallel.jobs = 3;
    for (const SweepResult& again : {run_sweep(g.problem, spec), run_sweep(g.problem, parallel)}) {
      REQUIRE(again.records.size() == r.records.size());
      for (std::size_t i = 0; i < r.records.size(); ++i) {
        CHECK(again.records[i].iterations == r.records[i].iterations);
        CHECK(again.records[i].final_residual == r.records[i].final_residual);
      }
    }
  }

  SUBCASE("Motzkin trials agree") {
    for (const auto& rec : r.records) {
      if (rec.beta != 60) continue;
      const auto& first = *std::find_if(r.records.begin(), r.records.end(), [&](const SweepRecord& o) {
        return o.beta == 60 && o.lambda == rec.lambda;
      });
      CHECK(rec.iterations == first.iterations);
    }
  }

  SUBCASE("aggregates are recomputable") {
    for (const auto& a : r.aggregates) {
      std::vector<double> secs, its, res;
      for (const auto& rec : r.records) {
        if (rec.beta != a.beta || rec.lambda != a.lambda) continue;
        secs.push_back(rec.wall_seconds);
        its.push_back(static_cast<double>(rec.iterations));
        res.push_back(rec.final_residual);
      }
      CHECK(a.trials == 3);
      const Summary s = summarize(secs), i = summarize(its), f = summarize(res);
      CHECK(a.wall_seconds.median == doctest::Approx(s.median).epsilon(1e-12));
      CHECK(a.wall_seconds.mean == doctest::Approx(s.mean).epsilon(1e-12));
      CHECK(a.wall_seconds.stddev == doctest::Approx(s.stddev).epsilon(1e-12));
      CHECK(a.iterations.mean == doctest::Approx(i.mean).epsilon(1e-12));
      CHECK(a.final_residual.median == doctest::Approx(f.median).epsilon(1e-12));
    }
  }

  SUBCASE("single trial aggregates equal the record") {
    SweepSpec single = spec;
    single.trials = 1;
    const SweepResult one = run_sweep(g.problem, single);
    for (std::size_t i = 0; i < one.records.size(); ++i) {
      CHECK(one.aggregates[i].wall_seconds.median == one.records[i].wall_seconds);
      CHECK(one.aggregates[i].iterations.mean == static_cast<double>(one.records[i].iterations));
      CHECK(one.aggregates[i].final_residual.stddev == 0.0);
    }
  }

  SUBCASE("timeouts are recorded, not thrown") {
    SweepSpec tight = spec;
    tight.beta_grid = {1};
    tight.lambda_grid = {1.0};
    tight.trials = 1;
    tight.halting = IterationCapOnly{};
    tight.max_iterations = std::numeric_limits<std::size_t>::max() / 4;
    tight.time_limit_seconds = 0.02;
    const SweepResult t = run_sweep(g.problem, tight);
    CHECK(t.records[0].halted_reason == HaltReason::Timeout);
  }
}

TEST_CASE("sweep CSV") {
  const GeneratedProblem g = gen_gaussian(40, 4, 2);
  SweepSpec spec;
  spec.beta_grid = {1, 40};
  spec.lambda_grid = {1.25};
  spec.trials = 2;
  const SweepResult r = run_sweep(g.problem, spec);

  std::stringstream buf;
  write_sweep_csv(buf, r.records);
  CHECK(first_line(buf.str()) == kSweepCsvHeader);
  CHECK(kSweepCsvHeader == "beta,lambda,trial,seed,iterations,wall_seconds,final_residual,halted_reason");
  const auto back = read_sweep_csv(buf);
  REQUIRE(back.size() == r.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].beta == r.records[i].beta);
    CHECK(back[i].lambda == r.records[i].lambda);
    CHECK(back[i].trial == r.records[i].trial);
    CHECK(back[i].seed == r.records[i].seed);
    CHECK(back[i].iterations == r.records[i].iterations);
    CHECK(back[i].wall_seconds == r.records[i].wall_seconds);
    CHECK(back[i].final_residual == r.records[i].final_residual);
    CHECK(back[i].halted_reason == r.records[i].halted_reason);
  }

  std::istringstream bad_header("beta,lambda\n1,1\n");
  CHECK_THROWS_AS(read_sweep_csv(bad_header), ParseError);
  std::istringstream short_row(std::string(kSweepCsvHeader) + "\n1,1,0,0\n");
  CHECK_THROWS_AS(read_sweep_csv(short_row), ParseError);

  std::stringstream agg;
  write_aggregate_csv(agg, r.aggregates);
  const std::string agg_text = agg.str();
  CHECK(first_line(agg_text) == kAggregateCsvHeader);
  CHECK(std::count(agg_text.begin(), agg_text.end(), '\n') == 3);

  test::TempDir dir("csv");
  emit_csv(r, dir / "sweep.csv");
  std::ifstream in(dir / "sweep.csv");
  CHECK(read_sweep_csv(in).size() == 4);
  CHECK_THROWS_AS(emit_csv(SweepResult{}, dir / "empty.csv"), std::invalid_argument);
  CHECK_THROWS_AS(emit_csv(r, dir / "missing" / "sweep.csv"), IoError);

  emit_plot(r, dir / "sweep.svg");
  const std::string svg = slurp(dir / "sweep.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("lambda=1.25") != std::string::npos);
  CHECK(svg.rfind("</svg>") != std::string::npos);
  CHECK_THROWS_AS(emit_plot(SweepResult{}, dir / "x.svg"), std::invalid_argument);
}

TEST_CASE("trace CSV and SVG") {
  const GeneratedProblem g = gen_gaussian(30, 3, 6);
  SkmConfig cfg;
  cfg.beta = 5;
  cfg.track_satisfied = true;
  const RunTrace t = skm_solve(g.problem, cfg);
  std::stringstream buf;
  write_trace_csv(buf, t);
  const std::string text = buf.str();
  CHECK(first_line(text) == kTraceCsvHeader);
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == t.records.size() + 1);

  std::ostringstream svg;
  write_svg(svg, Chart{"a < b & c", "x", "y", true, true, {ChartSeries{"s", {{1, 1}, {10, 0.1}, {100, 0.0}}}}});
  CHECK(svg.str().find("a &lt; b &amp; c") != std::string::npos);
  CHECK(svg.str().find("<polyline") != std::string::npos);
}

TEST_CASE("residual curves") {
  const GeneratedProblem g = gen_gaussian(400, 20, 3);
  const Vector x0 = Vector::Zero(20);

  SUBCASE("beta = m does not depend on the seed") {
    std::vector<SkmConfig> cfgs;
    for (std::uint64_t seed : {1, 2, 3}) {
      SkmConfig c;
      c.beta = 400;
      c.seed = seed;
      cfgs.push_back(c);
    }
    const auto curves = residual_curves(g.problem, cfgs, x0);
    for (const auto& c : curves) {
      REQUIRE(c.points.size() == curves[0].points.size());
      for (std::size_t i = 0; i < c.points.size(); ++i) {
        CHECK(c.points[i].residual_norm == curves[0].points[i].residual_norm);
      }
    }
    CHECK(curves[0].by_iteration().size() == curves[0].points.size());
    CHECK(curves[0].by_time().back().second == curves[0].points.back().residual_norm);
    CHECK(curves[0].points[0].satisfied_fraction == -1.0);

    test::TempDir dir("curves");
    emit_plot(curves, dir / "curves.svg");
    CHECK(slurp(dir / "curves.svg").find("beta=400") != std::string::npos);
    CHECK_THROWS_AS(emit_plot(std::vector<ResidualCurve>{}, dir / "x.svg"), std::invalid_argument);
  }

  SUBCASE("larger samples reduce the residual faster per iteration") {
    const std::vector<std::size_t> betas{1, 40, 400};
    const std::vector<std::size_t> checkpoints{25, 50, 100, 200};
    std::vector<std::vector<std::vector<double>>> at(betas.size(), std::vector<std::vector<double>>(checkpoints.size()));
    for (std::size_t b = 0; b < betas.size(); ++b) {
      std::vector<SkmConfig> cfgs;
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SkmConfig c;
        c.beta = betas[b];
        c.seed = seed;
        c.halting = IterationCapOnly{};
        c.max_iterations = 200;
        cfgs.push_back(c);
      }
      for (const auto& curve : residual_curves(g.problem, cfgs, x0)) {
        for (std::size_t k = 0; k < checkpoints.size(); ++k) at[b][k].push_back(curve.points[checkpoints[k]].residual_norm);
      }
    }
    for (std::size_t k = 0; k < checkpoints.size(); ++k) {
      CHECK(median(at[2][k]) <= median(at[1][k]));
      CHECK(median(at[1][k]) <= median(at[0][k]));
    }
  }

  SUBCASE("satisfied fraction rises in the long run") {
    const std::vector<std::size_t> checkpoints{0, 100, 200, 400, 800};
    std::vector<std::vector<double>> at(checkpoints.size());
    std::vector<SkmConfig> cfgs;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      SkmConfig c;
      c.beta = 20;
      c.lambda = 1.6;
      c.seed = seed;
      c.track_satisfied = true;
      c.halting = IterationCapOnly{};
      c.max_iterations = 800;
      cfgs.push_back(c);
    }
    for (const auto& curve : residual_curves(g.problem, cfgs, x0)) {
      for (std::size_t k = 0; k < checkpoints.size(); ++k) at[k].push_back(curve.points[checkpoints[k]].satisfied_fraction);
    }
    for (std::size_t k = 1; k < checkpoints.size(); ++k) CHECK(median(at[k]) >= median(at[k - 1]));
  }
}

TEST_CASE("compare_block_kaczmarz") {
  const EqualitySystem eq = gen_gaussian_equalities(120, 8, 4);
  std::vector<SkmConfig> skm(2);
  skm[0].beta = 1;
  skm[0].seed = 10;
  skm[1].beta = 24;
  skm[1].lambda = 1.2;
  std::vector<BlockConfig> bk(1);
  bk[0].block_size = 12;
  bk[0].seed = 70;
  const ComparisonTable table = compare_block_kaczmarz(eq.a, eq.b, skm, bk, 3);
  REQUIRE(table.records.size() == 9);
  CHECK(table.records[0].method == Method::Skm);
  CHECK(table.records[1].seed == 11);
  CHECK(table.records[8].method == Method::BlockKaczmarz);
  CHECK(table.records[8].parameter == 12);
  CHECK(table.records[8].seed == 72);
  for (const auto& r : table.records) {
    CHECK(r.halted_reason == HaltReason::Converged);
    CHECK(r.final_residual <= kDefaultResidualThreshold);
  }
  CHECK(table.best_median_seconds(Method::Skm) ==
        std::min(table.median_seconds(Method::Skm, 1), table.median_seconds(Method::Skm, 24)));
  CHECK(std::isfinite(table.best_median_seconds(Method::BlockKaczmarz)));
  CHECK_THROWS(table.median_seconds(Method::BlockKaczmarz, 5));
  CHECK(to_string(Method::Skm) == "skm");
  CHECK(to_string(Method::BlockKaczmarz) == "bk");

  std::stringstream buf;
  write_comparison_csv(buf, table);
  CHECK(first_line(buf.str()) == kComparisonCsvHeader);

  SUBCASE("non-converged runs count as infinitely slow") {
    std::vector<BlockConfig> capped(1);
    capped[0].block_size = 1;
    capped[0].max_iterations = 3;
    const ComparisonTable t = compare_block_kaczmarz(eq.a, eq.b, {}, capped, 2);
    CHECK(t.median_seconds(Method::BlockKaczmarz, 1) == std::numeric_limits<double>::infinity());
    CHECK_THROWS(t.best_median_seconds(Method::Skm));
  }
}
