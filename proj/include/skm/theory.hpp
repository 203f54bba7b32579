#pragma once

// Closed-form calculators for the SKM convergence bounds, the exact
// expectation of the selected squared residual, the certificate-of-
// feasibility quantities for rational data, and the β-tuning gain model.
//
// Every logarithm in the certificate quantities is base 2.

#include "skm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace skm {

enum class HoffmanMethod { LeftInverse, UserSupplied };

struct HoffmanEstimate {
  double l2 = 0.0;
  /// √m · L2, an upper bound on L∞.
  double l_inf_upper = 0.0;
  HoffmanMethod method = HoffmanMethod::UserSupplied;
};

class HoffmanUnavailable : public std::runtime_error {
public:
  HoffmanUnavailable() : std::runtime_error("Hoffman constant unavailable: supply user value") {}
};

/// σ_min at or below this counts as rank deficient.
inline constexpr double kRankCutoff = 1e-10;

/// L2 = ‖A⁻¹‖₂ = 1/σ_min(A) for a full-column-rank consistent equality
/// system. Throws HoffmanUnavailable when rank deficient.
HoffmanEstimate hoffman_from_equalities(const DenseMatrix& a_eq);
HoffmanEstimate hoffman_user_supplied(double l2, Index m);

/// Expected contraction factor of E[d(x, P)²] per iteration,
/// 1 − (2λ − λ²)/(m L2²), clamped to ≥ 0 with a warning.
double theorem1_rate(double lambda, std::size_t m, double l2);

/// V = max(m − s, m − β + 1).
std::size_t active_denominator(std::size_t m, std::size_t satisfied, std::size_t beta);

/// 1 − (2λ − λ²)/(V L2²), clamped to ≥ 0 with a warning.
double per_iteration_rate(double lambda, std::size_t v, double l2);

/// Bound on E[d(x_k, P)²] when at least m − n constraints stay satisfied
/// from iteration K on: rate(m)^K · rate(m − β + 1)^(k − K) · d0².
/// Warns when n is given and β > m − n.
double two_phase_bound(std::size_t k, std::size_t k_switch, double lambda, std::size_t m, std::size_t beta,
                       double l2, double d0_sq, std::optional<std::size_t> n = std::nullopt);

/// Exact E[max_{i∈τ} r_i²] over uniformly random size-β subsets τ.
///
/// Sorts r ascending and weights the (k+β)-th smallest entry by
/// C(β−1+k, β−1)/C(m, β). Integer weights are exact up to m = 60 and
/// evaluated in log space above. Throws on negative entries.
double expected_selected_residual_sq(std::span<const double> r, std::size_t beta);

/// Enumeration guard for brute_force_expected_max_sq.
inline constexpr double kMaxEnumeratedSubsets = 1e6;

/// Averages max² over every size-β subset. Throws std::length_error when
/// C(m, β) exceeds kMaxEnumeratedSubsets.
double brute_force_expected_max_sq(std::span<const double> r, std::size_t beta);

/// Same formula as expected_selected_residual_sq over an exact number type
/// (any T constructible from std::uint64_t with field arithmetic).
template <class T>
T expected_selected_residual_sq_exact(std::vector<T> r, std::size_t beta) {
  const std::size_t m = r.size();
  if (beta < 1 || beta > m) throw std::invalid_argument("beta must lie in [1, m]");
  for (const auto& v : r) {
    if (v < T(0)) throw std::invalid_argument("residual entries must be non-negative");
  }
  std::sort(r.begin(), r.end());
  T weight(1);  // C(β−1+k, β−1) at k = 0
  T total(0);
  T weight_sum(0);
  for (std::size_t k = 0; k + beta <= m; ++k) {
    if (k > 0) weight = weight * T(static_cast<std::uint64_t>(beta - 1 + k)) / T(static_cast<std::uint64_t>(k));
    const T& v = r[k + beta - 1];
    total += weight * v * v;
    weight_sum += weight;
  }
  // Σ_k C(β−1+k, β−1) = C(m, β).
  return total / weight_sum;
}

/// Subset enumeration over an exact number type.
template <class T>
T brute_force_expected_max_sq_exact(const std::vector<T>& r, std::size_t beta) {
  const std::size_t m = r.size();
  if (beta < 1 || beta > m) throw std::invalid_argument("beta must lie in [1, m]");
  double subsets = 1.0;
  for (std::size_t i = 1; i <= beta; ++i) subsets = subsets * static_cast<double>(m - beta + i) / static_cast<double>(i);
  if (subsets > kMaxEnumeratedSubsets) {
    throw std::length_error("brute_force_expected_max_sq: C(m, beta) too large to enumerate");
  }
  std::vector<std::size_t> idx(beta);
  for (std::size_t i = 0; i < beta; ++i) idx[i] = i;
  T total(0);
  std::uint64_t count = 0;
  while (true) {
    T best = r[idx[0]];
    for (std::size_t i = 1; i < beta; ++i) {
      if (best < r[idx[i]]) best = r[idx[i]];
    }
    total += best * best;
    ++count;
    std::size_t pos = beta;
    while (pos > 0 && idx[pos - 1] == m - beta + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < beta; ++i) idx[i] = idx[i - 1] + 1;
  }
  return total / T(count);
}

struct EncodingLength {
  double sigma = 2.0;
  /// max_j ‖a_j‖ of the unnormalized integer system.
  double max_row_norm = 0.0;
};

class NonIntegerDataError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// σ = Σᵢⱼ log(|a_ij| + 1) + Σᵢ log(|b_i| + 1) + log(nm) + 2 for integer
/// data. Throws NonIntegerDataError on any non-integral entry.
EncodingLength encoding_length(const DenseMatrix& a_int, const Vector& b_int);

/// Exact rational entry num/den (den > 0).
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
};

/// Scales each row (and its right-hand side) by the least common multiple of
/// its denominators, producing an integer system with the same solutions.
/// Throws std::overflow_error if a scaled value exceeds 2^53.
std::pair<DenseMatrix, Vector> clear_denominators(const std::vector<std::vector<Rational>>& rows,
                                                  const std::vector<Rational>& rhs);

/// θ(x) = max(0, maxᵢ a_iᵀx − b_i).
double max_violation(const FeasibilityProblem& p, const Vector& x);

struct CertificateReport {
  /// θ̃ of the normalized system.
  double theta = 0.0;
  /// 2^(1−σ) / max_j ‖a_j‖.
  double threshold = 0.0;
  bool is_certificate = false;
  std::size_t iteration_bound = 0;
  double failure_probability_bound = 0.0;
};

/// Threshold below which θ̃ certifies feasibility.
double certificate_threshold(const EncodingLength& enc);

/// Compares θ̃(x) with the threshold. Throws std::invalid_argument when the
/// problem is not normalized. iteration_bound / failure_probability_bound
/// are left for the caller to fill.
CertificateReport certificate_check(const FeasibilityProblem& normalized, const Vector& x,
                                    const EncodingLength& enc);

/// Smallest k with k > (4σ − 4 − log n + 2 log max‖a_j‖) / log(mL²/(mL² − 2λ + λ²)),
/// at least 1. Throws std::invalid_argument for λ ∉ (0, 2).
std::size_t iteration_bound(const EncodingLength& enc, std::size_t n, std::size_t m, double lambda, double l2);

/// max‖a_j‖ · 2^(2σ−2)/√n · (1 − (2λ − λ²)/(mL²))^(k/2). Not clamped.
double failure_probability_bound(const EncodingLength& enc, std::size_t n, std::size_t m, double lambda,
                                 double l2, std::size_t k);

struct GainModel {
  std::size_t m = 0;
  std::size_t n = 0;
  /// Satisfied constraints.
  std::size_t s = 0;
  /// Per-entry cost coefficient.
  double c = 1.0;
  /// Per-iteration overhead.
  double overhead = 0.0;
};

void validate(const GainModel& model);

/// Improvement-to-cost ratio (1 − (s/m)^β)/(C + cnβ) for β ≤ s, and
/// 1/(C + cnβ) for β > s.
double gain(const GainModel& model, std::size_t beta);

/// argmax of gain over β ∈ [1, m], lowest β on ties.
std::size_t optimal_beta(const GainModel& model);

}  // namespace skm
