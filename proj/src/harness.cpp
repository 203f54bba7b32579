#include "skm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

namespace skm {

void validate(const SweepSpec& spec, Index m) {
  if (spec.beta_grid.empty() || spec.lambda_grid.empty()) throw std::invalid_argument("sweep: empty β or λ grid");
  if (spec.trials == 0) throw std::invalid_argument("sweep: trials must be positive");
  if (!(spec.time_limit_seconds >= 0.0)) throw std::invalid_argument("sweep: time limit must be non-negative");
  if (spec.jobs == 0) throw std::invalid_argument("sweep: jobs must be positive");
  SkmConfig probe;
  probe.halting = spec.halting;
  for (const std::size_t beta : spec.beta_grid) {
    for (const double lambda : spec.lambda_grid) {
      probe.beta = beta;
      probe.lambda = lambda;
      validate(probe, m);
    }
  }
}

Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  s.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double sq = 0.0;
    for (const double v : values) sq += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(sq / static_cast<double>(n - 1));
  }
  return s;
}

std::vector<CellAggregate> aggregate(const std::vector<SweepRecord>& records) {
  std::vector<std::pair<std::size_t, double>> order;
  std::map<std::pair<std::size_t, double>, std::vector<const SweepRecord*>> cells;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.beta, r.lambda);
    auto& bucket = cells[key];
    if (bucket.empty()) order.push_back(key);
    bucket.push_back(&r);
  }
  std::vector<CellAggregate> out;
  out.reserve(order.size());
  for (const auto& key : order) {
    const auto& bucket = cells[key];
    std::vector<double> secs, its, res;
    for (const auto* r : bucket) {
      secs.push_back(r->wall_seconds);
      its.push_back(static_cast<double>(r->iterations));
      res.push_back(r->final_residual);
    }
    out.push_back({key.first, key.second, bucket.size(), summarize(std::move(secs)), summarize(std::move(its)),
                   summarize(std::move(res))});
  }
  return out;
}

namespace {

/// Runs task(i) for i in [0, count) on up to `jobs` threads.
template <typename Task>
void parallel_for(std::size_t count, std::size_t jobs, Task&& task) {
  jobs = std::min(jobs, count);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          task(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

SweepResult run_sweep(const FeasibilityProblem& p, const SweepSpec& spec) {
  validate(spec, p.rows());
  const Vector x0 = spec.x0.size() == 0 ? Vector::Zero(p.cols()) : spec.x0;
  if (x0.size() != p.cols()) throw DimensionError("sweep: x0 length does not match the problem");

  SweepResult result;
  for (const std::size_t beta : spec.beta_grid) {
    for (const double lambda : spec.lambda_grid) {
      for (std::size_t t = 0; t < spec.trials; ++t) {
        SweepRecord r;
        r.beta = beta;
        r.lambda = lambda;
        r.trial = t;
        r.seed = spec.seed_base + t;
        result.records.push_back(r);
      }
    }
  }

  parallel_for(result.records.size(), spec.jobs, [&](std::size_t i) {
    SweepRecord& r = result.records[i];
    SkmConfig cfg;
    cfg.beta = r.beta;
    cfg.lambda = r.lambda;
    cfg.max_iterations = spec.max_iterations;
    cfg.halting = spec.halting;
    cfg.seed = r.seed;
    cfg.check_interval = spec.check_interval;
    cfg.time_limit_seconds = spec.time_limit_seconds;
    const RunTrace trace = skm_solve(p, cfg, x0);
    r.iterations = trace.iterations;
    r.wall_seconds = trace.wall_seconds;
    r.final_residual = trace.final_residual();
    r.halted_reason = trace.reason;
  });
  result.aggregates = aggregate(result.records);
  return result;
}

std::vector<std::pair<double, double>> ResidualCurve::by_iteration() const {
  std::vector<std::pair<double, double>> out;
  out.reserve(points.size());
  for (const auto& pt : points) out.emplace_back(static_cast<double>(pt.iteration), pt.residual_norm);
  return out;
}

std::vector<std::pair<double, double>> ResidualCurve::by_time() const {
  std::vector<std::pair<double, double>> out;
  out.reserve(points.size());
  for (const auto& pt : points) out.emplace_back(pt.seconds, pt.residual_norm);
  return out;
}

std::vector<ResidualCurve> residual_curves(const FeasibilityProblem& p, const std::vector<SkmConfig>& configs,
                                           const Vector& x0) {
  std::vector<ResidualCurve> curves;
  curves.reserve(configs.size());
  const double m = static_cast<double>(p.rows());
  for (const auto& cfg : configs) {
    const RunTrace trace = skm_solve(p, cfg, x0);
    ResidualCurve curve{cfg, {}};
    curve.points.reserve(trace.records.size());
    for (const auto& rec : trace.records) {
      const double fraction = rec.satisfied ? static_cast<double>(*rec.satisfied) / m : -1.0;
      curve.points.push_back({rec.iteration, rec.elapsed_seconds, rec.residual_norm, fraction});
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

std::string_view to_string(Method method) { return method == Method::Skm ? "skm" : "bk"; }

double ComparisonTable::median_seconds(Method method, std::size_t parameter) const {
  std::vector<double> secs;
  for (const auto& r : records) {
    if (r.method != method || r.parameter != parameter) continue;
    secs.push_back(r.halted_reason == HaltReason::Converged ? r.wall_seconds
                                                            : std::numeric_limits<double>::infinity());
  }
  if (secs.empty()) throw std::invalid_argument("comparison: no records for that setting");
  return summarize(std::move(secs)).median;
}

double ComparisonTable::best_median_seconds(Method method) const {
  double best = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& r : records) {
    if (r.method != method) continue;
    any = true;
    best = std::min(best, median_seconds(method, r.parameter));
  }
  if (!any) throw std::invalid_argument("comparison: no records for that method");
  return best;
}

ComparisonTable compare_block_kaczmarz(const DenseMatrix& a, const Vector& b, const std::vector<SkmConfig>& skm_cfgs,
                                       const std::vector<BlockConfig>& bk_cfgs, std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("comparison: trials must be positive");
  const FeasibilityProblem stacked = stack_equalities(a, b);
  const Vector x0 = Vector::Zero(a.cols());
  ComparisonTable table;
  for (const auto& base : skm_cfgs) {
    for (std::size_t t = 0; t < trials; ++t) {
      SkmConfig cfg = base;
      cfg.seed = base.seed + t;
      const RunTrace trace = skm_solve(stacked, cfg, x0);
      table.records.push_back({Method::Skm, cfg.beta, cfg.lambda, t, cfg.seed, trace.iterations, trace.wall_seconds,
                               trace.final_residual(), trace.reason});
    }
  }
  for (const auto& base : bk_cfgs) {
    for (std::size_t t = 0; t < trials; ++t) {
      BlockConfig cfg = base;
      cfg.seed = base.seed + t;
      const RunTrace trace = block_kaczmarz_solve(a, b, cfg, x0);
      table.records.push_back({Method::BlockKaczmarz, cfg.block_size, cfg.lambda, t, cfg.seed, trace.iterations,
                               trace.wall_seconds, trace.final_residual(), trace.reason});
    }
  }
  return table;
}

}  // namespace skm
