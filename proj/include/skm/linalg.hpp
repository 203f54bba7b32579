#pragma once

// Dense vector/matrix primitives and the immutable feasibility-problem type
// shared by the solvers, the bound calculators and the instance generators.

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skm {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

/// Rows with Euclidean norm below this are treated as zero rows.
inline constexpr double kZeroRowCutoff = 1e-14;
/// Relative tolerance of the cached row norms.
inline constexpr double kRowNormCacheTolerance = 1e-12;
/// Absolute tolerance on |‖a_i‖ - 1| for a normalized system.
inline constexpr double kNormalizedTolerance = 1e-10;

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A zero row 0ᵀx ≤ b_i with b_i < 0: no x satisfies it.
class InfeasibleRowError : public std::runtime_error {
public:
  InfeasibleRowError(Index row, double rhs);
  Index row() const noexcept { return row_; }

private:
  Index row_;
};

bool all_finite(const Vector& v);
bool all_finite(const DenseMatrix& a);

/// z⁺: keeps positive entries, zeros elsewhere.
Vector positive_part(const Vector& v);

double euclidean_distance(const Vector& x, const Vector& y);

/// σ_min via a singular value decomposition. Rank-deficient input yields 0
/// (up to rounding). Requires rows ≥ cols.
double smallest_singular_value(const DenseMatrix& a);

/// The system Ax ≤ b.
///
/// Immutable after construction. Zero rows (‖a_i‖ < kZeroRowCutoff) are
/// dropped when b_i ≥ 0 and rejected with InfeasibleRowError when b_i < 0;
/// dropped_zero_rows() reports how many were removed.
class FeasibilityProblem {
public:
  FeasibilityProblem(DenseMatrix a, Vector b);

  const DenseMatrix& a() const noexcept { return a_; }
  const Vector& b() const noexcept { return b_; }
  const Vector& row_norms() const noexcept { return row_norms_; }
  bool normalized() const noexcept { return normalized_; }
  std::size_t dropped_zero_rows() const noexcept { return dropped_; }

  Index rows() const noexcept { return a_.rows(); }
  Index cols() const noexcept { return a_.cols(); }

  /// a_iᵀx − b_i, signed.
  double row_value(Index i, const Vector& x) const { return a_.row(i).dot(x) - b_(i); }

  /// A·x − b, signed, length m.
  Vector raw_residual(const Vector& x) const;

private:
  friend FeasibilityProblem normalize_system(const FeasibilityProblem&);
  FeasibilityProblem() = default;

  DenseMatrix a_;
  Vector b_;
  Vector row_norms_;
  bool normalized_ = false;
  std::size_t dropped_ = 0;
};

/// (Ax − b)⁺. Throws DimensionError when x has the wrong length.
Vector residual(const FeasibilityProblem& p, const Vector& x);

/// Number of constraints with a_iᵀx − b_i ≤ 0.
std::size_t satisfied_count(const FeasibilityProblem& p, const Vector& x);

/// ã_i = a_i/‖a_i‖, b̃_i = b_i/‖a_i‖. Same solution set; sets normalized().
FeasibilityProblem normalize_system(const FeasibilityProblem& p);

/// [A; −A] x ≤ [b; −b], the inequality form of Ax = b.
FeasibilityProblem stack_equalities(const DenseMatrix& a, const Vector& b);

}  // namespace skm
