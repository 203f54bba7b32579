#include "skm/cli.hpp"

#include "skm/harness.hpp"
#include "skm/problems.hpp"
#include "skm/solvers.hpp"
#include "skm/theory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>

namespace skm {

namespace {

/// Flag values that parse but violate a documented constraint.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct HaltingFlags {
  std::string kind = "residual";
  std::optional<double> threshold;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--halting", kind, "Halting rule")
        ->check(CLI::IsMember({"residual", "relative-residual", "relative-max-violation", "cap"}))
        ->capture_default_str();
    cmd->add_option("--threshold", threshold,
                    "Halting threshold (default 2^-14 for residual, 0.01 for the relative rules)");
  }

  HaltingRule rule() const {
    HaltingRule r;
    if (kind == "residual") {
      r = ResidualNorm{threshold.value_or(kDefaultResidualThreshold)};
    } else if (kind == "relative-residual") {
      r = RelativeResidualNorm{threshold.value_or(0.01)};
    } else if (kind == "relative-max-violation") {
      r = RelativeMaxViolation{threshold.value_or(0.01)};
    } else {
      r = IterationCapOnly{};
    }
    try {
      validate(r);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return r;
  }
};

void require_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda <= 2.0)) throw UsageError("--lambda must lie in (0, 2]");
}

void require_beta(std::size_t beta, Index m) {
  if (beta < 1 || static_cast<Index>(beta) > m) {
    throw UsageError("--beta must lie in [1, m] with m = " + std::to_string(m));
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

FeasibilityProblem load_problem(const std::string& path) {
  auto in = open_input(path);
  return read_problem(in);
}

// generate

struct GenerateFlags {
  std::string family;
  Index m = 0;
  Index n = 0;
  double lo = 0.9;
  double hi = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_generate(const GenerateFlags& f, std::ostream& out) {
  if (f.family == "correlated" && !(f.lo < f.hi)) throw UsageError("--lo must be below --hi");
  const GeneratedProblem g =
      f.family == "gaussian" ? gen_gaussian(f.m, f.n, f.seed) : gen_correlated(f.m, f.n, f.lo, f.hi, f.seed);
  {
    auto file = open_output(f.out);
    write_problem(file, g.problem);
    if (!file.flush()) throw IoError("write failed for '" + f.out + "'");
  }
  {
    auto file = open_output(f.out + ".witness");
    write_vector(file, g.witness);
    if (!file.flush()) throw IoError("write failed for '" + f.out + ".witness'");
  }
  const auto& norms = g.problem.row_norms();
  out << "family: " << f.family << '\n'
      << "m: " << g.problem.rows() << '\n'
      << "n: " << g.problem.cols() << '\n'
      << "row norm range: [" << format_double(norms.minCoeff()) << ", " << format_double(norms.maxCoeff()) << "]\n"
      << "witness max violation: " << format_double(max_violation(g.problem, g.witness)) << '\n';
  if (f.family == "correlated") {
    const DenseMatrix& a = g.problem.a();
    bool single_signed = true;
    for (Index i = 0; i < a.rows(); ++i) {
      single_signed = single_signed && ((a.row(i).array() > 0).all() || (a.row(i).array() < 0).all());
    }
    out << "single-signed rows: " << (single_signed ? "yes" : "no") << '\n';
    if (!single_signed) throw std::runtime_error("correlated rows are not single-signed");
  }
  return kExitOk;
}

// solve

struct SolveFlags {
  std::string in;
  std::size_t beta = 1;
  double lambda = 1.0;
  HaltingFlags halting;
  std::uint64_t seed = 0;
  std::size_t max_iterations = kDefaultMaxIterations;
  std::size_t check_interval = 1;
  double time_limit = 0.0;
  bool track_satisfied = false;
  std::string trace_out;
  std::string x_out;
};

int cmd_solve(const SolveFlags& f, std::ostream& out) {
  require_lambda(f.lambda);
  const HaltingRule rule = f.halting.rule();
  const FeasibilityProblem p = load_problem(f.in);
  require_beta(f.beta, p.rows());

  SkmConfig cfg;
  cfg.beta = f.beta;
  cfg.lambda = f.lambda;
  cfg.max_iterations = f.max_iterations;
  cfg.halting = rule;
  cfg.seed = f.seed;
  cfg.track_satisfied = f.track_satisfied;
  cfg.check_interval = f.check_interval;
  cfg.time_limit_seconds = f.time_limit;
  const RunTrace trace = skm_solve(p, cfg);

  if (!f.trace_out.empty()) {
    auto file = open_output(f.trace_out);
    write_trace_csv(file, trace);
  }
  if (!f.x_out.empty()) {
    auto file = open_output(f.x_out);
    write_vector(file, trace.x);
  }
  out << "m: " << p.rows() << '\n'
      << "n: " << p.cols() << '\n'
      << "beta: " << cfg.beta << '\n'
      << "lambda: " << format_double(cfg.lambda) << '\n'
      << "seed: " << cfg.seed << '\n'
      << "iterations: " << trace.iterations << '\n'
      << "final_residual: " << format_double(trace.final_residual()) << '\n'
      << "max_violation: " << format_double(trace.records.empty() ? 0.0 : trace.records.back().max_violation) << '\n'
      << "wall_seconds: " << format_double(trace.wall_seconds) << '\n'
      << "halted_reason: " << to_string(trace.reason) << '\n';
  return kExitOk;
}

// certify

struct CertifyFlags {
  std::string in;
  std::size_t beta = 1;
  double lambda = 1.0;
  std::uint64_t seed = 0;
  std::optional<double> l2;
};

int cmd_certify(const CertifyFlags& f, std::ostream& out) {
  require_lambda(f.lambda);
  if (f.lambda >= 2.0) throw UsageError("--lambda must be below 2 for a finite iteration bound");
  if (f.l2 && !(*f.l2 > 0.0)) throw UsageError("--L2 must be positive");

  RawSystem raw;
  {
    auto in = open_input(f.in);
    raw = read_raw_system(in);
  }
  const EncodingLength enc = encoding_length(raw.a, raw.b);
  const FeasibilityProblem p(raw.a, raw.b);
  require_beta(f.beta, p.rows());
  const FeasibilityProblem normalized = normalize_system(p);

  const double l2 = f.l2 ? *f.l2 : hoffman_from_equalities(normalized.a()).l2;
  const auto m = static_cast<std::size_t>(normalized.rows());
  const auto n = static_cast<std::size_t>(normalized.cols());
  const std::size_t bound = iteration_bound(enc, n, m, f.lambda, l2);
  const double threshold = certificate_threshold(enc);

  SkmConfig cfg;
  cfg.beta = f.beta;
  cfg.lambda = f.lambda;
  cfg.max_iterations = bound;
  cfg.halting = CertificateFound{threshold};
  cfg.seed = f.seed;
  const RunTrace trace = skm_solve(normalized, cfg);
  CertificateReport report = certificate_check(normalized, trace.x, enc);
  report.iteration_bound = bound;
  report.failure_probability_bound = failure_probability_bound(enc, n, m, f.lambda, l2, bound);

  out << "sigma: " << format_double(enc.sigma) << '\n'
      << "threshold: " << format_double(report.threshold) << '\n'
      << "L2: " << format_double(l2) << '\n'
      << "iteration_bound: " << bound << '\n'
      << "iterations: " << trace.iterations << '\n'
      << "theta: " << format_double(report.theta) << '\n';
  if (report.is_certificate) {
    out << "verdict: feasible (certificate found)\n";
    return kExitOk;
  }
  out << "verdict: no certificate within the iteration bound\n"
      << "failure_probability_bound: " << format_double(report.failure_probability_bound) << '\n';
  return kExitNoCertificate;
}

// sweep

struct SweepFlags {
  std::string in;
  std::vector<std::size_t> betas{1};
  std::vector<double> lambdas{1.0};
  std::size_t trials = 1;
  HaltingFlags halting;
  std::uint64_t seed = 0;
  std::size_t max_iterations = kDefaultMaxIterations;
  std::size_t check_interval = 0;
  double time_limit = kDefaultTimeLimitSeconds;
  std::size_t jobs = 1;
  std::string out;
  std::string aggregate_out;
  std::string plot_out;
};

int cmd_sweep(const SweepFlags& f, std::ostream& out) {
  for (const double lambda : f.lambdas) require_lambda(lambda);
  if (f.trials == 0 || f.jobs == 0) throw UsageError("--trials and --jobs must be positive");
  const HaltingRule rule = f.halting.rule();
  const FeasibilityProblem p = load_problem(f.in);
  for (const std::size_t beta : f.betas) require_beta(beta, p.rows());

  SweepSpec spec;
  spec.beta_grid = f.betas;
  spec.lambda_grid = f.lambdas;
  spec.trials = f.trials;
  spec.halting = rule;
  spec.time_limit_seconds = f.time_limit;
  spec.seed_base = f.seed;
  spec.max_iterations = f.max_iterations;
  spec.check_interval = f.check_interval;
  spec.jobs = f.jobs;
  const SweepResult result = run_sweep(p, spec);

  if (!f.out.empty()) emit_csv(result, f.out);
  if (!f.aggregate_out.empty()) {
    auto file = open_output(f.aggregate_out);
    write_aggregate_csv(file, result.aggregates);
  }
  if (!f.plot_out.empty()) emit_plot(result, f.plot_out);

  out << "beta  lambda  trials  median_seconds  median_iterations  median_residual\n";
  for (const auto& a : result.aggregates) {
    out << a.beta << "  " << format_double(a.lambda) << "  " << a.trials << "  "
        << format_double(a.wall_seconds.median) << "  " << format_double(a.iterations.median) << "  "
        << format_double(a.final_residual.median) << '\n';
  }
  return kExitOk;
}

// gain

struct GainFlags {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t s = 0;
  double c = 1.0;
  double overhead = 0.0;
};

int cmd_gain(const GainFlags& f, std::ostream& out) {
  const GainModel model{f.m, f.n, f.s, f.c, f.overhead};
  try {
    validate(model);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  out << "beta  gain\n";
  for (std::size_t beta = 1; beta <= f.m; ++beta) out << beta << "  " << format_double(gain(model, beta)) << '\n';
  out << "optimal_beta: " << optimal_beta(model) << '\n';
  return kExitOk;
}

// convert

struct ConvertFlags {
  std::string mps;
  std::optional<double> pstar;
  std::string out;
};

int cmd_convert(const ConvertFlags& f, std::ostream& out) {
  LpInstance lp;
  {
    auto in = open_input(f.mps);
    lp = parse_mps(in);
  }
  std::optional<double> pstar = f.pstar;
  if (!pstar) {
    const std::string sidecar = f.mps + ".json";
    std::ifstream meta(sidecar);
    if (!meta) throw UsageError("--pstar is required when '" + sidecar + "' is absent");
    const auto doc = nlohmann::json::parse(meta);
    if (!doc.contains("p_star") || !doc["p_star"].is_number()) {
      throw std::runtime_error("sidecar '" + sidecar + "' has no numeric p_star");
    }
    pstar = doc["p_star"].get<double>();
  }
  const FeasibilityProblem p = lp_to_feasibility(lp, pstar);
  {
    auto file = open_output(f.out);
    write_problem(file, p);
    if (!file.flush()) throw IoError("write failed for '" + f.out + "'");
  }
  out << "name: " << lp.name << '\n'
      << "equalities: " << lp.a_eq.rows() << '\n'
      << "inequalities: " << lp.inequalities.size() << '\n'
      << "columns: " << lp.c.size() << '\n'
      << "p_star: " << format_double(*pstar) << '\n'
      << "stacked: " << p.rows() << " x " << p.cols() << '\n';
  if (p.dropped_zero_rows() > 0) out << "dropped zero rows: " << p.dropped_zero_rows() << '\n';
  return kExitOk;
}

// compare-bk

struct CompareFlags {
  std::string family = "gaussian";
  Index m = 2000;
  Index n = 50;
  double lo = 1.0;
  double hi = 1.0 + 1e-16;
  std::uint64_t seed = 0;
  std::size_t trials = 10;
  std::vector<std::size_t> betas{50};
  std::vector<std::size_t> block_sizes{50};
  double lambda = 1.0;
  std::optional<double> threshold;
  std::size_t max_iterations = kDefaultMaxIterations;
  double time_limit = kDefaultTimeLimitSeconds;
  std::string out;
};

int cmd_compare_bk(const CompareFlags& f, std::ostream& out) {
  require_lambda(f.lambda);
  if (f.trials == 0) throw UsageError("--trials must be positive");
  if (f.family == "correlated" && !(f.lo < f.hi)) throw UsageError("--lo must be below --hi");
  const double threshold = f.threshold.value_or(kDefaultResidualThreshold);
  if (!(threshold > 0.0)) throw UsageError("--threshold must be positive");
  const EqualitySystem sys = f.family == "gaussian" ? gen_gaussian_equalities(f.m, f.n, f.seed)
                                                    : gen_correlated_equalities(f.m, f.n, f.lo, f.hi, f.seed);
  for (const std::size_t beta : f.betas) require_beta(beta, 2 * f.m);
  for (const std::size_t size : f.block_sizes) {
    if (size < 1 || static_cast<Index>(size) > f.m) throw UsageError("--block-sizes must lie in [1, m]");
  }

  std::vector<SkmConfig> skm_cfgs;
  for (const std::size_t beta : f.betas) {
    SkmConfig cfg;
    cfg.beta = beta;
    cfg.lambda = f.lambda;
    cfg.halting = ResidualNorm{threshold};
    cfg.max_iterations = f.max_iterations;
    cfg.seed = f.seed;
    cfg.check_interval = 0;
    cfg.time_limit_seconds = f.time_limit;
    skm_cfgs.push_back(cfg);
  }
  std::vector<BlockConfig> bk_cfgs;
  for (const std::size_t size : f.block_sizes) {
    BlockConfig cfg;
    cfg.block_size = size;
    cfg.lambda = f.lambda;
    cfg.halting = ResidualNorm{threshold};
    cfg.max_iterations = f.max_iterations;
    cfg.seed = f.seed;
    cfg.check_interval = 0;
    cfg.time_limit_seconds = f.time_limit;
    bk_cfgs.push_back(cfg);
  }
  const ComparisonTable table = compare_block_kaczmarz(sys.a, sys.b, skm_cfgs, bk_cfgs, f.trials);
  if (!f.out.empty()) {
    auto file = open_output(f.out);
    write_comparison_csv(file, table);
  }
  out << "method  parameter  median_seconds\n";
  for (const std::size_t beta : f.betas) {
    out << "skm  " << beta << "  " << format_double(table.median_seconds(Method::Skm, beta)) << '\n';
  }
  for (const std::size_t size : f.block_sizes) {
    out << "bk  " << size << "  " << format_double(table.median_seconds(Method::BlockKaczmarz, size)) << '\n';
  }
  const double skm_best = table.best_median_seconds(Method::Skm);
  const double bk_best = table.best_median_seconds(Method::BlockKaczmarz);
  out << "faster: " << (bk_best < skm_best ? "bk" : "skm") << '\n';
  return kExitOk;
}

std::string usage_failure(const CLI::App* app, const CLI::Error& e) {
  // Report against the deepest subcommand that was reached.
  const CLI::App* target = app;
  while (true) {
    const auto subs = target->get_subcommands();
    if (subs.empty()) break;
    target = subs.front();
  }
  return std::string("error: ") + e.what() + "\n\n" + target->help();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sampling Kaczmarz-Motzkin solver for linear feasibility problems", "skm"};
  app.failure_message(usage_failure);
  app.require_subcommand(1);

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "Write a seeded random instance and its witness");
  generate->add_option("--family", gen.family, "Instance family")
      ->required()
      ->check(CLI::IsMember({"gaussian", "correlated"}));
  generate->add_option("--m", gen.m, "Number of constraints")->required()->check(CLI::PositiveNumber);
  generate->add_option("--n", gen.n, "Number of variables")->required()->check(CLI::PositiveNumber);
  generate->add_option("--lo", gen.lo, "Correlated family: lower entry bound")->capture_default_str();
  generate->add_option("--hi", gen.hi, "Correlated family: upper entry bound")->capture_default_str();
  generate->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  generate->add_option("--out", gen.out, "Instance path; the witness goes to <out>.witness")->required();

  SolveFlags solve;
  auto* solve_cmd = app.add_subcommand("solve", "Run SKM on an instance");
  solve_cmd->add_option("--in", solve.in, "Instance path")->required();
  solve_cmd->add_option("--beta", solve.beta, "Sample size")->capture_default_str();
  solve_cmd->add_option("--lambda", solve.lambda, "Projection parameter in (0, 2]")->capture_default_str();
  solve.halting.add_to(solve_cmd);
  solve_cmd->add_option("--seed", solve.seed, "Random seed")->capture_default_str();
  solve_cmd->add_option("--max-iterations", solve.max_iterations, "Iteration cap")->capture_default_str();
  solve_cmd->add_option("--check-interval", solve.check_interval, "Iterations between halting checks (0 = m/beta)")
      ->capture_default_str();
  solve_cmd->add_option("--time-limit", solve.time_limit, "Wall-clock limit in seconds (0 = none)")
      ->capture_default_str();
  solve_cmd->add_flag("--track-satisfied", solve.track_satisfied, "Record satisfied-constraint counts");
  solve_cmd->add_option("--trace-out", solve.trace_out, "Write the residual trace as CSV");
  solve_cmd->add_option("--x-out", solve.x_out, "Write the final iterate");

  CertifyFlags cert;
  auto* certify = app.add_subcommand("certify", "Search for a certificate of feasibility on integer data");
  certify->add_option("--in", cert.in, "Integer instance path")->required();
  certify->add_option("--beta", cert.beta, "Sample size")->capture_default_str();
  certify->add_option("--lambda", cert.lambda, "Projection parameter in (0, 2)")->capture_default_str();
  certify->add_option("--seed", cert.seed, "Random seed")->capture_default_str();
  certify->add_option("--L2", cert.l2, "Hoffman constant (default 1/sigma_min of the normalized matrix)");

  SweepFlags sw;
  auto* sweep = app.add_subcommand("sweep", "Time-to-threshold over a (beta, lambda) grid");
  sweep->add_option("--in", sw.in, "Instance path")->required();
  sweep->add_option("--betas", sw.betas, "Comma-separated sample sizes")->delimiter(',')->capture_default_str();
  sweep->add_option("--lambdas", sw.lambdas, "Comma-separated projection parameters")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--trials", sw.trials, "Trials per cell")->capture_default_str();
  sw.halting.add_to(sweep);
  sweep->add_option("--seed", sw.seed, "Seed of trial 0; trial t uses seed + t")->capture_default_str();
  sweep->add_option("--max-iterations", sw.max_iterations, "Iteration cap")->capture_default_str();
  sweep->add_option("--check-interval", sw.check_interval, "Iterations between halting checks (0 = m/beta)")
      ->capture_default_str();
  sweep->add_option("--time-limit", sw.time_limit, "Per-run wall-clock limit in seconds")->capture_default_str();
  sweep->add_option("--jobs", sw.jobs, "Threads running trials")->capture_default_str();
  sweep->add_option("--out", sw.out, "Per-run CSV");
  sweep->add_option("--aggregate-out", sw.aggregate_out, "Per-cell summary CSV");
  sweep->add_option("--plot-out", sw.plot_out, "SVG plot of median time against beta");

  GainFlags gf;
  auto* gain_cmd = app.add_subcommand("gain", "Tabulate the gain model and its optimal beta");
  gain_cmd->add_option("--m", gf.m, "Number of constraints")->required();
  gain_cmd->add_option("--n", gf.n, "Number of variables")->required();
  gain_cmd->add_option("--s", gf.s, "Satisfied constraints")->capture_default_str();
  gain_cmd->add_option("--c", gf.c, "Per-entry cost")->capture_default_str();
  gain_cmd->add_option("--C", gf.overhead, "Per-iteration overhead")->capture_default_str();

  ConvertFlags cv;
  auto* convert = app.add_subcommand("convert", "Turn an MPS linear program into a feasibility instance");
  convert->add_option("--mps", cv.mps, "MPS file")->required();
  convert->add_option("--pstar", cv.pstar, "Optimal value (default: p_star from <mps>.json)");
  convert->add_option("--out", cv.out, "Instance path")->required();

  CompareFlags cmp;
  auto* compare = app.add_subcommand("compare-bk", "Compare SKM with block Kaczmarz on a generated equality system");
  compare->add_option("--family", cmp.family, "Instance family")
      ->check(CLI::IsMember({"gaussian", "correlated"}))
      ->capture_default_str();
  compare->add_option("--m", cmp.m, "Number of equations")->check(CLI::PositiveNumber)->capture_default_str();
  compare->add_option("--n", cmp.n, "Number of variables")->check(CLI::PositiveNumber)->capture_default_str();
  compare->add_option("--lo", cmp.lo, "Correlated family: lower entry bound")->capture_default_str();
  compare->add_option("--hi", cmp.hi, "Correlated family: upper entry bound")->capture_default_str();
  compare->add_option("--seed", cmp.seed, "Instance seed and seed of trial 0")->capture_default_str();
  compare->add_option("--trials", cmp.trials, "Trials per setting")->capture_default_str();
  compare->add_option("--betas", cmp.betas, "Comma-separated SKM sample sizes")
      ->delimiter(',')
      ->capture_default_str();
  compare->add_option("--block-sizes", cmp.block_sizes, "Comma-separated block sizes")
      ->delimiter(',')
      ->capture_default_str();
  compare->add_option("--lambda", cmp.lambda, "Projection parameter")->capture_default_str();
  compare->add_option("--threshold", cmp.threshold, "Residual threshold (default 2^-14)");
  compare->add_option("--max-iterations", cmp.max_iterations, "Iteration cap")->capture_default_str();
  compare->add_option("--time-limit", cmp.time_limit, "Per-run wall-clock limit in seconds")->capture_default_str();
  compare->add_option("--out", cmp.out, "Per-run CSV");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate) return cmd_generate(gen, out);
    if (*solve_cmd) return cmd_solve(solve, out);
    if (*certify) return cmd_certify(cert, out);
    if (*sweep) return cmd_sweep(sw, out);
    if (*gain_cmd) return cmd_gain(gf, out);
    if (*convert) return cmd_convert(cv, out);
    if (*compare) return cmd_compare_bk(cmp, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace skm
