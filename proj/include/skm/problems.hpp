#pragma once

// Instance generation and ingestion: seeded random families, SVM systems
// from labeled data, the LP-to-feasibility reformulation, and the text
// interchange formats.

#include "skm/linalg.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace skm {

/// A generated system with a known feasible point.
struct GeneratedProblem {
  FeasibilityProblem problem;
  Vector witness;
};

/// A consistent equality system Ax = b with its solution.
struct EqualitySystem {
  DenseMatrix a;
  Vector b;
  Vector solution;
};

/// A ~ N(0, 1) entrywise, x* ~ N(0, 1), b = A x* + |e| with e ~ N(0, 1).
/// The witness x* satisfies every constraint, strictly where e_i ≠ 0.
GeneratedProblem gen_gaussian(Index m, Index n, std::uint64_t seed);

/// Each row, with probability 1/2, is uniform on [lo, hi]ⁿ or on
/// [−hi, −lo]ⁿ; b as in gen_gaussian. Requires lo < hi.
GeneratedProblem gen_correlated(Index m, Index n, double lo, double hi, std::uint64_t seed);

/// Gaussian A, x* ~ N(0, 1), b = A x*.
EqualitySystem gen_gaussian_equalities(Index m, Index n, std::uint64_t seed);

/// Entries uniform on [lo, hi] with the row sign drawn as in gen_correlated,
/// x* ~ N(0, 1), b = A x*.
EqualitySystem gen_correlated_equalities(Index m, Index n, double lo, double hi, std::uint64_t seed);

struct LabeledDataset {
  std::vector<Vector> points;
  std::vector<int> labels;  // +1 / −1
};

/// Row i = −y_i · [z_i, 1], b = 0. A strictly separating hyperplane
/// (w, c) with y_i (wᵀz_i + c) > 0 is a strictly feasible x = [w; c].
FeasibilityProblem svm_to_feasibility(const LabeledDataset& data);

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& message, std::size_t line);
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// CSV records "label,f1,f2,…" with label in {+1, −1}. A first line whose
/// first token is not numeric is taken as a header.
LabeledDataset read_labeled_csv(std::istream& in);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class RowSense { LessEqual, GreaterEqual };

/// An L or G row kept aside by the MPS reader.
struct InequalityRow {
  std::string name;
  Vector coefficients;
  double rhs = 0.0;
  RowSense sense = RowSense::LessEqual;
};

/// min cᵀx + objective_constant s.t. A_eq x = b, l ≤ x ≤ u, plus the L/G
/// rows in `inequalities`. Bounds use ±kInfinity for "unbounded".
struct LpInstance {
  std::string name;
  std::vector<std::string> column_names;
  std::vector<std::string> equality_names;
  DenseMatrix a_eq;
  Vector b;
  Vector c;
  double objective_constant = 0.0;
  Vector lower;
  Vector upper;
  std::vector<InequalityRow> inequalities;
  std::optional<double> p_star;
};

/// Reads the NAME / ROWS / COLUMNS / RHS / BOUNDS / ENDATA subset of MPS.
/// Fields are whitespace separated, which also accepts fixed-format files
/// without blanks inside names. Throws ParseError with the 1-based line.
LpInstance parse_mps(std::istream& in);
LpInstance parse_mps_text(std::string_view text);

/// Ã = [A; −A; I; −I; cᵀ; L-rows; −G-rows], b̃ = [b; −b; u; −l; p* − const; …],
/// omitting infinite bound rows. Throws std::invalid_argument without p*.
FeasibilityProblem lp_to_feasibility(const LpInstance& lp, std::optional<double> p_star = std::nullopt);

/// Row count of lp_to_feasibility: 2·m_eq + |finite u| + |finite l| + |ineq| + 1.
Index stacked_row_count(const LpInstance& lp);

// Text interchange. Header "skm-problem v1 m n", then m lines of n + 1
// values (row, then rhs) written with 17 significant digits.

void write_problem(std::ostream& out, const DenseMatrix& a, const Vector& b);
void write_problem(std::ostream& out, const FeasibilityProblem& p);

struct RawSystem {
  DenseMatrix a;
  Vector b;
};

/// Reads the interchange format without applying the zero-row policy.
RawSystem read_raw_system(std::istream& in);
FeasibilityProblem read_problem(std::istream& in);

/// Header "skm-vector v1 n", then one value per line.
void write_vector(std::ostream& out, const Vector& v);
Vector read_vector(std::istream& in);

/// 17 significant digits, which parses back to the same double.
std::string format_double(double v);
/// Full-string parse via std::from_chars; throws std::invalid_argument.
double parse_double(std::string_view text);

}  // namespace skm
