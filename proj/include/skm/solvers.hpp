#pragma once

// Sampling Kaczmarz–Motzkin iteration for Ax ≤ b, its β = m (Motzkin
// relaxation) and β = 1 (randomized Kaczmarz) specializations, and the
// randomized block Kaczmarz baseline for equality systems.

#include "skm/linalg.hpp"
#include "skm/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace skm {

/// Halting threshold used throughout the random-data experiments, 2^-14.
inline constexpr double kDefaultResidualThreshold = 0x1.0p-14;
inline constexpr std::size_t kDefaultMaxIterations = 1'000'000;

// Halting rules. All thresholds must be positive.

/// ‖(Ax_k − b)⁺‖₂ ≤ threshold.
struct ResidualNorm {
  double threshold = kDefaultResidualThreshold;
};
/// ‖(Ax_k − b)⁺‖₂ / ‖(Ax_0 − b)⁺‖₂ ≤ threshold.
struct RelativeResidualNorm {
  double threshold = 0.01;
};
/// θ(x_k) / θ(x_0) ≤ threshold, θ(x) = max(0, maxᵢ a_iᵀx − b_i).
struct RelativeMaxViolation {
  double threshold = 0.01;
};
/// θ(x_k) < threshold (strict).
struct CertificateFound {
  double threshold = 0.0;
};
struct IterationCapOnly {};

using HaltingRule =
    std::variant<ResidualNorm, RelativeResidualNorm, RelativeMaxViolation, CertificateFound, IterationCapOnly>;

void validate(const HaltingRule& rule);

enum class HaltReason { Converged, CertificateFound, IterationCap, Timeout };

std::string_view to_string(HaltReason reason);
std::optional<HaltReason> parse_halt_reason(std::string_view text);

struct SkmConfig {
  std::size_t beta = 1;
  double lambda = 1.0;
  std::size_t max_iterations = kDefaultMaxIterations;
  HaltingRule halting = ResidualNorm{};
  std::uint64_t seed = 0;
  /// Record s_k (satisfied constraints) at every trace point. Costs a full
  /// residual pass, which trace points already pay for.
  bool track_satisfied = false;
  /// The halting rule is evaluated, and a trace record written, every
  /// check_interval iterations (plus at the start and at termination).
  /// 0 selects ceil(m / beta), which amortizes the O(mn) residual pass to
  /// the cost of one iteration's sampling work.
  std::size_t check_interval = 1;
  /// Wall-clock budget per run in seconds; 0 disables.
  double time_limit_seconds = 0.0;
};

/// Throws std::invalid_argument unless 1 ≤ beta ≤ m, 0 < lambda ≤ 2 and the
/// halting thresholds are positive.
void validate(const SkmConfig& cfg, Index m);

struct IterateState {
  Vector x;
  std::size_t iteration = 0;
  /// t_k, 0-based row index of the selected constraint.
  Index selected = 0;
  /// a_{t_k}ᵀx_{k−1} − b_{t_k}, may be negative.
  double violation = 0.0;
};

struct TraceRecord {
  std::size_t iteration = 0;
  double residual_norm = 0.0;
  double max_violation = 0.0;
  std::optional<std::size_t> satisfied;
  double elapsed_seconds = 0.0;
};

struct RunTrace {
  std::vector<TraceRecord> records;  // strictly increasing iteration
  Vector x;
  HaltReason reason = HaltReason::IterationCap;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;

  double final_residual() const { return records.empty() ? 0.0 : records.back().residual_norm; }
};

/// Called after every iteration with the new iterate.
using StepObserver = std::function<void(const IterateState&)>;

struct Selection {
  Index row = 0;
  double violation = 0.0;
};

/// argmax over tau of a_iᵀx − b_i, lowest index on ties. tau must be
/// non-empty with valid indices.
Selection select_max_violation(const FeasibilityProblem& p, const Vector& x, std::span<const std::size_t> tau);

/// One SKM iteration: sample β rows, pick the most violated, and move
/// x ← x − λ (a_tᵀx − b_t)⁺ / ‖a_t‖² · a_t. Does not move when every sampled
/// constraint is satisfied.
IterateState skm_step(const FeasibilityProblem& p, const Vector& x, const SkmConfig& cfg, Rng& rng);

/// Iterates until the halting rule fires, the iteration cap or the time
/// limit is reached. Deterministic for a fixed (problem, cfg, x0).
RunTrace skm_solve(const FeasibilityProblem& p, const SkmConfig& cfg, const Vector& x0,
                   const StepObserver& observer = {});
/// Starts from x0 = 0.
RunTrace skm_solve(const FeasibilityProblem& p, const SkmConfig& cfg);

/// β = m: selects the globally most violated constraint; no randomness.
RunTrace motzkin_solve(const FeasibilityProblem& p, double lambda, const HaltingRule& halting, const Vector& x0,
                       std::size_t max_iterations = kDefaultMaxIterations, const StepObserver& observer = {});

/// β = 1: one uniformly random row per iteration.
RunTrace randomized_kaczmarz_solve(const FeasibilityProblem& p, double lambda, const HaltingRule& halting,
                                   const Vector& x0, std::uint64_t seed,
                                   std::size_t max_iterations = kDefaultMaxIterations,
                                   const StepObserver& observer = {});

/// How the block step A_τ⁺ r is computed.
enum class BlockSolver {
  /// Unpivoted Householder QR: least squares for tall blocks, minimum norm
  /// for wide ones. No rank truncation, so ill-conditioned blocks give
  /// inaccurate steps.
  HouseholderQr,
  /// Complete orthogonal decomposition with Eigen's default rank threshold,
  /// i.e. the pseudo-inverse of the numerically truncated block.
  CompleteOrthogonal,
};

struct BlockConfig {
  std::size_t block_size = 1;
  double lambda = 1.0;
  std::size_t max_iterations = kDefaultMaxIterations;
  HaltingRule halting = ResidualNorm{};
  std::uint64_t seed = 0;
  /// 0 selects ceil(m / (block_size · min(block_size, n))), matching the
  /// O(mn) residual pass to the factorization work of the iterations.
  std::size_t check_interval = 1;
  double time_limit_seconds = 0.0;
  BlockSolver solver = BlockSolver::HouseholderQr;
};

void validate(const BlockConfig& cfg, Index m);

/// Fixed random partition of {0, …, m−1} into ceil(m / block_size) blocks.
std::vector<std::vector<Index>> random_partition(Index m, std::size_t block_size, Rng& rng);

/// Randomized block Kaczmarz for Ax = b over a fixed random row partition:
/// x ← x + λ A_τ⁺ (b_τ − A_τ x) for a uniformly chosen block τ. Residuals in
/// the trace are the equality residuals ‖Ax − b‖₂ and max |a_iᵀx − b_i|.
RunTrace block_kaczmarz_solve(const DenseMatrix& a, const Vector& b, const BlockConfig& cfg, const Vector& x0,
                              const StepObserver& observer = {});

}  // namespace skm
