#pragma once

// Experiment orchestration: (β, λ) sweeps with time-to-threshold records,
// residual and satisfied-fraction curves, and block Kaczmarz comparisons,
// plus their CSV and SVG outputs.

#include "skm/problems.hpp"
#include "skm/solvers.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace skm {

inline constexpr double kDefaultTimeLimitSeconds = 300.0;

struct SweepSpec {
  std::vector<std::size_t> beta_grid;
  std::vector<double> lambda_grid;
  std::size_t trials = 1;
  HaltingRule halting = ResidualNorm{};
  double time_limit_seconds = kDefaultTimeLimitSeconds;
  std::uint64_t seed_base = 0;
  std::size_t max_iterations = kDefaultMaxIterations;
  /// Passed to SkmConfig::check_interval; 0 amortizes the residual pass.
  std::size_t check_interval = 0;
  /// Trials run on this many threads.
  std::size_t jobs = 1;
  /// Starting point; empty means the zero vector.
  Vector x0;
};

void validate(const SweepSpec& spec, Index m);

struct SweepRecord {
  std::size_t beta = 0;
  double lambda = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  double wall_seconds = 0.0;
  double final_residual = 0.0;
  HaltReason halted_reason = HaltReason::IterationCap;
};

struct Summary {
  double median = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for one value
};

Summary summarize(std::vector<double> values);

struct CellAggregate {
  std::size_t beta = 0;
  double lambda = 0.0;
  std::size_t trials = 0;
  Summary wall_seconds;
  Summary iterations;
  Summary final_residual;
};

struct SweepResult {
  std::vector<SweepRecord> records;      // cell-major, then trial
  std::vector<CellAggregate> aggregates;  // one per (β, λ) cell
};

/// Aggregates records per (β, λ) in first-appearance order.
std::vector<CellAggregate> aggregate(const std::vector<SweepRecord>& records);

/// Trial t of every cell uses seed seed_base + t. Only the solve loop is
/// timed. A run that exceeds the time limit is recorded with reason timeout.
SweepResult run_sweep(const FeasibilityProblem& p, const SweepSpec& spec);

struct CurvePoint {
  std::size_t iteration = 0;
  double seconds = 0.0;
  double residual_norm = 0.0;
  /// s_k / m, or −1 when not tracked.
  double satisfied_fraction = -1.0;
};

struct ResidualCurve {
  SkmConfig config;
  std::vector<CurvePoint> points;

  std::vector<std::pair<double, double>> by_iteration() const;
  std::vector<std::pair<double, double>> by_time() const;
};

/// One run per config from the shared x0, keeping every trace record.
std::vector<ResidualCurve> residual_curves(const FeasibilityProblem& p, const std::vector<SkmConfig>& configs,
                                           const Vector& x0);

enum class Method { Skm, BlockKaczmarz };
std::string_view to_string(Method method);

struct ComparisonRecord {
  Method method = Method::Skm;
  /// β for SKM, block size for block Kaczmarz.
  std::size_t parameter = 0;
  double lambda = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  double wall_seconds = 0.0;
  double final_residual = 0.0;
  HaltReason halted_reason = HaltReason::IterationCap;
};

struct ComparisonTable {
  std::vector<ComparisonRecord> records;

  /// Median wall time over the trials of one (method, parameter) setting.
  double median_seconds(Method method, std::size_t parameter) const;
  /// Smallest median wall time over every setting of a method; runs that
  /// did not converge count as +∞.
  double best_median_seconds(Method method) const;
};

/// SKM runs on [A; −A] x ≤ [b; −b]; block Kaczmarz runs on Ax = b. Both
/// report the equality residual ‖Ax − b‖₂ (equal to ‖(Ãx − b̃)⁺‖₂ for the
/// stacked form). Trial t uses the config's seed + t.
ComparisonTable compare_block_kaczmarz(const DenseMatrix& a, const Vector& b, const std::vector<SkmConfig>& skm_cfgs,
                                       const std::vector<BlockConfig>& bk_cfgs, std::size_t trials);

// Outputs.

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kSweepCsvHeader =
    "beta,lambda,trial,seed,iterations,wall_seconds,final_residual,halted_reason";
inline constexpr std::string_view kAggregateCsvHeader =
    "beta,lambda,trials,median_seconds,mean_seconds,std_seconds,median_iterations,mean_iterations,"
    "std_iterations,median_residual";
inline constexpr std::string_view kComparisonCsvHeader =
    "method,parameter,lambda,trial,seed,iterations,wall_seconds,final_residual,halted_reason";
inline constexpr std::string_view kTraceCsvHeader = "iteration,residual_norm,max_violation,satisfied,elapsed_seconds";

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_sweep_csv(std::istream& in);
void write_aggregate_csv(std::ostream& out, const std::vector<CellAggregate>& aggregates);
void write_comparison_csv(std::ostream& out, const ComparisonTable& table);
void write_trace_csv(std::ostream& out, const RunTrace& trace);

/// Writes the per-run records. Throws std::invalid_argument on an empty
/// result and IoError when the path cannot be written.
void emit_csv(const SweepResult& result, const std::filesystem::path& path);

struct ChartSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = true;
  std::vector<ChartSeries> series;
};

/// Standalone SVG line chart. Non-positive values are skipped on log axes.
void write_svg(std::ostream& out, const Chart& chart);

/// Median wall time against β, one line per λ, log-scale time axis.
void emit_plot(const SweepResult& result, const std::filesystem::path& path);
/// Residual against iteration, one line per curve, log-scale residual axis.
void emit_plot(const std::vector<ResidualCurve>& curves, const std::filesystem::path& path);

}  // namespace skm
