#include "skm/solvers.hpp"

#include "halting.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace skm {

void validate(const BlockConfig& cfg, Index m) {
  if (cfg.block_size < 1 || cfg.block_size > static_cast<std::size_t>(m)) {
    throw std::invalid_argument("block_size=" + std::to_string(cfg.block_size) + " must lie in [1, m=" +
                                std::to_string(m) + "]");
  }
  if (!(cfg.lambda > 0.0 && cfg.lambda <= 2.0)) {
    throw std::invalid_argument("lambda must lie in (0, 2]");
  }
  validate(cfg.halting);
}

std::vector<std::vector<Index>> random_partition(Index m, std::size_t block_size, Rng& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform_index(i))]);
  }
  std::vector<std::vector<Index>> blocks;
  for (std::size_t start = 0; start < perm.size(); start += block_size) {
    const std::size_t end = std::min(perm.size(), start + block_size);
    blocks.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                        perm.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return blocks;
}

namespace {

/// Least-squares solution for a tall block, minimum-norm solution for a wide
/// one, both from an unpivoted Householder QR without rank truncation.
Vector least_squares_step(const Eigen::MatrixXd& block, const Vector& residual) {
  if (block.rows() >= block.cols()) return block.householderQr().solve(residual);
  // block = Rᵀ Qᵀ with blockᵀ = Q R, so d = Q R⁻ᵀ r.
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(block.transpose());
  const Index k = block.rows();
  Vector y = Vector::Zero(block.cols());
  y.head(k) = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>().transpose().solve(residual);
  return qr.householderQ() * y;
}

}  // namespace

RunTrace block_kaczmarz_solve(const DenseMatrix& a, const Vector& b, const BlockConfig& cfg, const Vector& x0,
                              const StepObserver& observer) {
  if (b.size() != a.rows() || x0.size() != a.cols()) {
    throw DimensionError("block_kaczmarz_solve: inconsistent dimensions");
  }
  validate(cfg, a.rows());

  RunTrace trace;
  trace.seed = cfg.seed;
  trace.x = x0;
  Rng rng(cfg.seed);
  const auto blocks = random_partition(a.rows(), cfg.block_size, rng);
  // Auto cadence: one residual pass (m·n) per that much factorization work
  // (about b·n·min(b, n) per iteration).
  const auto m = static_cast<std::size_t>(a.rows());
  const std::size_t work = cfg.block_size * std::min(cfg.block_size, static_cast<std::size_t>(a.cols()));
  const std::size_t interval = cfg.check_interval != 0 ? cfg.check_interval : (m + work - 1) / work;
  detail::HaltingMonitor monitor(cfg.halting);

  // The pseudo-solve is redone every iteration: the method pays for one
  // small least-squares solve per block visit.
  Eigen::MatrixXd block;
  Vector block_residual;
  Vector raw(a.rows());
  IterateState state;

  const detail::Stopwatch clock;
  auto measure = [&](std::size_t k) {
    raw.noalias() = a * trace.x - b;
    TraceRecord rec;
    rec.iteration = k;
    rec.residual_norm = raw.norm();
    rec.max_violation = raw.cwiseAbs().maxCoeff();
    rec.elapsed_seconds = clock.seconds();
    trace.records.push_back(rec);
    return rec;
  };

  const bool timed = cfg.time_limit_seconds > 0.0;
  for (std::size_t k = 0;; ++k) {
    if (k % interval == 0 || k == cfg.max_iterations) {
      const TraceRecord rec = measure(k);
      if (auto reason = monitor.check({rec.residual_norm, rec.max_violation})) {
        trace.reason = *reason;
        trace.iterations = k;
        break;
      }
      if (k >= cfg.max_iterations || (timed && rec.elapsed_seconds > cfg.time_limit_seconds)) {
        trace.reason = k >= cfg.max_iterations ? HaltReason::IterationCap : HaltReason::Timeout;
        trace.iterations = k;
        break;
      }
    } else if (timed && k % detail::kClockPollInterval == 0 && clock.seconds() > cfg.time_limit_seconds) {
      measure(k);
      trace.reason = HaltReason::Timeout;
      trace.iterations = k;
      break;
    }

    const auto& rows = blocks[static_cast<std::size_t>(rng.uniform_index(blocks.size()))];
    const auto size = static_cast<Index>(rows.size());
    block.resize(size, a.cols());
    block_residual.resize(size);
    for (Index r = 0; r < size; ++r) {
      const Index i = rows[static_cast<std::size_t>(r)];
      block.row(r) = a.row(i);
      block_residual(r) = b(i) - a.row(i).dot(trace.x);
    }
    const Vector step = cfg.solver == BlockSolver::HouseholderQr
                            ? least_squares_step(block, block_residual)
                            : Vector(block.completeOrthogonalDecomposition().solve(block_residual));
    trace.x.noalias() += cfg.lambda * step;

    if (observer) {
      state.x = trace.x;
      state.iteration = k + 1;
      state.selected = rows.front();
      state.violation = block_residual.cwiseAbs().maxCoeff();
      observer(state);
    }
  }
  trace.wall_seconds = clock.seconds();
  return trace;
}

}  // namespace skm
