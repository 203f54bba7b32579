#include "skm/solvers.hpp"

#include "halting.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace skm {

namespace detail {

std::optional<HaltReason> HaltingMonitor::check(const Measurement& m) {
  if (!initial_) initial_ = m;
  return std::visit(
      [&](const auto& rule) -> std::optional<HaltReason> {
        using R = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<R, ResidualNorm>) {
          if (m.residual_norm <= rule.threshold) return HaltReason::Converged;
        } else if constexpr (std::is_same_v<R, RelativeResidualNorm>) {
          if (initial_->residual_norm == 0.0 || m.residual_norm <= rule.threshold * initial_->residual_norm) {
            return HaltReason::Converged;
          }
        } else if constexpr (std::is_same_v<R, RelativeMaxViolation>) {
          if (initial_->max_violation == 0.0 || m.max_violation <= rule.threshold * initial_->max_violation) {
            return HaltReason::Converged;
          }
        } else if constexpr (std::is_same_v<R, CertificateFound>) {
          if (m.max_violation < rule.threshold) return HaltReason::CertificateFound;
        }
        return std::nullopt;
      },
      rule_);
}

}  // namespace detail

namespace {

using detail::HaltingMonitor;
using detail::Measurement;
using detail::Stopwatch;

double threshold_of(const HaltingRule& rule) {
  return std::visit(
      [](const auto& r) -> double {
        if constexpr (requires { r.threshold; }) {
          return r.threshold;
        } else {
          return 1.0;
        }
      },
      rule);
}

std::size_t resolve_interval(std::size_t requested, Index m, std::size_t beta) {
  if (requested != 0) return requested;
  const auto rows = static_cast<std::size_t>(m);
  return (rows + beta - 1) / beta;
}

/// Iteration kernel shared by skm_step and skm_solve.
class SkmKernel {
public:
  SkmKernel(const FeasibilityProblem& p, std::size_t beta, double lambda)
      : p_(p), beta_(beta), lambda_(lambda), sampler_(beta < static_cast<std::size_t>(p.rows())
                                                          ? static_cast<std::size_t>(p.rows())
                                                          : 0) {}

  /// raw, when given, must hold A·x − b for the current x.
  Selection select(const Vector& x, Rng& rng, const Vector* raw) const {
    const Index m = p_.rows();
    if (beta_ == static_cast<std::size_t>(m)) {
      Selection best{0, raw ? (*raw)(0) : p_.row_value(0, x)};
      for (Index i = 1; i < m; ++i) {
        const double v = raw ? (*raw)(i) : p_.row_value(i, x);
        if (v > best.violation) best = {i, v};
      }
      return best;
    }
    const auto& perm = sampler_.draw(beta_, rng);
    std::span<const std::size_t> tau(perm.data(), beta_);
    return select_max_violation(p_, x, tau);
  }

  Selection step(Vector& x, Rng& rng, const Vector* raw) const {
    const Selection s = select(x, rng, raw);
    if (s.violation > 0.0) {
      const double norm = p_.row_norms()(s.row);
      x.noalias() -= (lambda_ * s.violation / (norm * norm)) * p_.a().row(s.row).transpose();
    }
    return s;
  }

private:
  const FeasibilityProblem& p_;
  std::size_t beta_;
  double lambda_;
  mutable SubsetSampler sampler_;
};

}  // namespace

std::string_view to_string(HaltReason reason) {
  switch (reason) {
    case HaltReason::Converged: return "converged";
    case HaltReason::CertificateFound: return "certificate";
    case HaltReason::IterationCap: return "iteration-cap";
    case HaltReason::Timeout: return "timeout";
  }
  return "unknown";
}

std::optional<HaltReason> parse_halt_reason(std::string_view text) {
  for (auto r : {HaltReason::Converged, HaltReason::CertificateFound, HaltReason::IterationCap,
                 HaltReason::Timeout}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

void validate(const HaltingRule& rule) {
  if (std::holds_alternative<IterationCapOnly>(rule)) return;
  const double t = threshold_of(rule);
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("halting threshold must be positive and finite");
  }
}

void validate(const SkmConfig& cfg, Index m) {
  if (cfg.beta < 1 || cfg.beta > static_cast<std::size_t>(m)) {
    throw std::invalid_argument("beta=" + std::to_string(cfg.beta) + " must lie in [1, m=" + std::to_string(m) +
                                "]");
  }
  if (!(cfg.lambda > 0.0 && cfg.lambda <= 2.0)) {
    throw std::invalid_argument("lambda=" + std::to_string(cfg.lambda) + " must lie in (0, 2]");
  }
  if (cfg.time_limit_seconds < 0.0) {
    throw std::invalid_argument("time limit must be non-negative");
  }
  validate(cfg.halting);
}

Selection select_max_violation(const FeasibilityProblem& p, const Vector& x, std::span<const std::size_t> tau) {
  if (tau.empty()) {
    throw std::invalid_argument("select_max_violation: empty sample");
  }
  Selection best{static_cast<Index>(tau[0]), p.row_value(static_cast<Index>(tau[0]), x)};
  for (std::size_t k = 1; k < tau.size(); ++k) {
    const auto i = static_cast<Index>(tau[k]);
    const double v = p.row_value(i, x);
    if (v > best.violation || (v == best.violation && i < best.row)) best = {i, v};
  }
  return best;
}

IterateState skm_step(const FeasibilityProblem& p, const Vector& x, const SkmConfig& cfg, Rng& rng) {
  validate(cfg, p.rows());
  if (x.size() != p.cols()) {
    throw DimensionError("skm_step: x has length " + std::to_string(x.size()));
  }
  SkmKernel kernel(p, cfg.beta, cfg.lambda);
  IterateState state;
  state.x = x;
  const Selection s = kernel.step(state.x, rng, nullptr);
  state.iteration = 1;
  state.selected = s.row;
  state.violation = s.violation;
  return state;
}

RunTrace skm_solve(const FeasibilityProblem& p, const SkmConfig& cfg, const Vector& x0,
                   const StepObserver& observer) {
  validate(cfg, p.rows());
  if (x0.size() != p.cols()) {
    throw DimensionError("skm_solve: x0 has length " + std::to_string(x0.size()) + ", expected " +
                         std::to_string(p.cols()));
  }
  const std::size_t interval = resolve_interval(cfg.check_interval, p.rows(), cfg.beta);
  const bool full_scan = cfg.beta == static_cast<std::size_t>(p.rows());

  RunTrace trace;
  trace.seed = cfg.seed;
  trace.x = x0;
  Rng rng(cfg.seed);
  SkmKernel kernel(p, cfg.beta, cfg.lambda);
  HaltingMonitor monitor(cfg.halting);
  Vector raw(p.rows());
  IterateState state;

  const Stopwatch clock;
  auto measure = [&](std::size_t k) {
    raw.noalias() = p.a() * trace.x - p.b();
    TraceRecord rec;
    rec.iteration = k;
    rec.residual_norm = raw.cwiseMax(0.0).norm();
    rec.max_violation = std::max(0.0, raw.maxCoeff());
    if (cfg.track_satisfied) rec.satisfied = static_cast<std::size_t>((raw.array() <= 0.0).count());
    rec.elapsed_seconds = clock.seconds();
    trace.records.push_back(rec);
    return rec;
  };

  for (std::size_t k = 0;; ++k) {
    bool have_raw = false;
    const bool timed = cfg.time_limit_seconds > 0.0;
    if (k % interval == 0 || k == cfg.max_iterations) {
      const TraceRecord rec = measure(k);
      have_raw = true;
      if (auto reason = monitor.check({rec.residual_norm, rec.max_violation})) {
        trace.reason = *reason;
        trace.iterations = k;
        break;
      }
      if (k >= cfg.max_iterations) {
        trace.reason = HaltReason::IterationCap;
        trace.iterations = k;
        break;
      }
      if (timed && rec.elapsed_seconds > cfg.time_limit_seconds) {
        trace.reason = HaltReason::Timeout;
        trace.iterations = k;
        break;
      }
    } else if (timed && k % detail::kClockPollInterval == 0 && clock.seconds() > cfg.time_limit_seconds) {
      measure(k);
      trace.reason = HaltReason::Timeout;
      trace.iterations = k;
      break;
    }

    const Selection s = kernel.step(trace.x, rng, full_scan && have_raw ? &raw : nullptr);
    if (observer) {
      state.x = trace.x;
      state.iteration = k + 1;
      state.selected = s.row;
      state.violation = s.violation;
      observer(state);
    }
  }
  trace.wall_seconds = clock.seconds();
  return trace;
}

RunTrace skm_solve(const FeasibilityProblem& p, const SkmConfig& cfg) {
  return skm_solve(p, cfg, Vector::Zero(p.cols()));
}

RunTrace motzkin_solve(const FeasibilityProblem& p, double lambda, const HaltingRule& halting, const Vector& x0,
                       std::size_t max_iterations, const StepObserver& observer) {
  SkmConfig cfg;
  cfg.beta = static_cast<std::size_t>(p.rows());
  cfg.lambda = lambda;
  cfg.halting = halting;
  cfg.max_iterations = max_iterations;
  return skm_solve(p, cfg, x0, observer);
}

RunTrace randomized_kaczmarz_solve(const FeasibilityProblem& p, double lambda, const HaltingRule& halting,
                                   const Vector& x0, std::uint64_t seed, std::size_t max_iterations,
                                   const StepObserver& observer) {
  SkmConfig cfg;
  cfg.beta = 1;
  cfg.lambda = lambda;
  cfg.halting = halting;
  cfg.seed = seed;
  cfg.max_iterations = max_iterations;
  return skm_solve(p, cfg, x0, observer);
}

}  // namespace skm
