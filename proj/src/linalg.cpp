#include "skm/linalg.hpp"

#include "skm/diagnostics.hpp"

#include <cmath>
#include <vector>

namespace skm {

InfeasibleRowError::InfeasibleRowError(Index row, double rhs)
    : std::runtime_error("trivially infeasible row " + std::to_string(row) +
                         ": zero coefficients with right-hand side " + std::to_string(rhs)),
      row_(row) {}

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const DenseMatrix& a) { return a.allFinite(); }

Vector positive_part(const Vector& v) { return v.cwiseMax(0.0); }

double euclidean_distance(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw DimensionError("euclidean_distance: lengths " + std::to_string(x.size()) + " and " +
                         std::to_string(y.size()) + " differ");
  }
  return (x - y).norm();
}

double smallest_singular_value(const DenseMatrix& a) {
  if (a.rows() < a.cols()) {
    throw DimensionError("smallest_singular_value: expected rows >= cols");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

FeasibilityProblem::FeasibilityProblem(DenseMatrix a, Vector b) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw DimensionError("FeasibilityProblem: need at least one row and one column");
  }
  if (b.size() != a.rows()) {
    throw DimensionError("FeasibilityProblem: b has length " + std::to_string(b.size()) +
                         ", expected " + std::to_string(a.rows()));
  }
  if (!all_finite(a) || !all_finite(b)) {
    throw std::invalid_argument("FeasibilityProblem: non-finite entry");
  }

  const Vector norms = a.rowwise().norm();
  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(a.rows()));
  for (Index i = 0; i < a.rows(); ++i) {
    if (norms(i) >= kZeroRowCutoff) {
      keep.push_back(i);
    } else if (b(i) < 0.0) {
      throw InfeasibleRowError(i, b(i));
    } else {
      ++dropped_;
    }
  }
  if (keep.empty()) {
    throw std::invalid_argument("FeasibilityProblem: every row is zero");
  }

  if (dropped_ > 0) {
    warn("dropped " + std::to_string(dropped_) + " zero row(s) with non-negative right-hand side");
  }
  if (dropped_ == 0) {
    a_ = std::move(a);
    b_ = std::move(b);
    row_norms_ = norms;
  } else {
    const auto k = static_cast<Index>(keep.size());
    a_.resize(k, a.cols());
    b_.resize(k);
    row_norms_.resize(k);
    for (Index r = 0; r < k; ++r) {
      a_.row(r) = a.row(keep[static_cast<std::size_t>(r)]);
      b_(r) = b(keep[static_cast<std::size_t>(r)]);
      row_norms_(r) = norms(keep[static_cast<std::size_t>(r)]);
    }
  }
  normalized_ = ((row_norms_.array() - 1.0).abs() <= kNormalizedTolerance).all();
}

Vector FeasibilityProblem::raw_residual(const Vector& x) const {
  if (x.size() != cols()) {
    throw DimensionError("residual: x has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(cols()));
  }
  return a_ * x - b_;
}

Vector residual(const FeasibilityProblem& p, const Vector& x) {
  return positive_part(p.raw_residual(x));
}

std::size_t satisfied_count(const FeasibilityProblem& p, const Vector& x) {
  const Vector r = p.raw_residual(x);
  return static_cast<std::size_t>((r.array() <= 0.0).count());
}

FeasibilityProblem normalize_system(const FeasibilityProblem& p) {
  FeasibilityProblem out;
  const Vector inv = p.row_norms().cwiseInverse();
  out.a_ = inv.asDiagonal() * p.a();
  out.b_ = p.b().cwiseProduct(inv);
  out.row_norms_ = out.a_.rowwise().norm();
  out.normalized_ = true;
  out.dropped_ = p.dropped_zero_rows();
  return out;
}

FeasibilityProblem stack_equalities(const DenseMatrix& a, const Vector& b) {
  if (b.size() != a.rows()) {
    throw DimensionError("stack_equalities: b length does not match rows of A");
  }
  DenseMatrix stacked(2 * a.rows(), a.cols());
  stacked.topRows(a.rows()) = a;
  stacked.bottomRows(a.rows()) = -a;
  Vector rhs(2 * a.rows());
  rhs.head(a.rows()) = b;
  rhs.tail(a.rows()) = -b;
  return FeasibilityProblem(std::move(stacked), std::move(rhs));
}

}  // namespace skm
