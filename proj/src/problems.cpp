#include "skm/problems.hpp"

#include "skm/rng.hpp"

#include <cctype>
#include <istream>
#include <sstream>

namespace skm {

namespace {

void require_shape(Index m, Index n) {
  if (m < 1 || n < 1) throw std::invalid_argument("generator: m and n must be positive");
}

Vector normal_vector(Index n, Rng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

/// Rows single-signed: all entries on [lo, hi] or all on [−hi, −lo].
DenseMatrix correlated_matrix(Index m, Index n, double lo, double hi, Rng& rng) {
  if (!(lo < hi)) throw std::invalid_argument("gen_correlated: need lo < hi");
  DenseMatrix a(m, n);
  for (Index i = 0; i < m; ++i) {
    const double sign = rng.uniform01() < 0.5 ? 1.0 : -1.0;
    for (Index j = 0; j < n; ++j) a(i, j) = sign * rng.uniform(lo, hi);
  }
  return a;
}

GeneratedProblem perturbed_rhs(DenseMatrix a, Rng& rng) {
  Vector witness = normal_vector(a.cols(), rng);
  Vector slack = normal_vector(a.rows(), rng).cwiseAbs();
  Vector b = a * witness + slack;
  return {FeasibilityProblem(std::move(a), std::move(b)), std::move(witness)};
}

bool looks_numeric(std::string_view token) {
  if (token.empty()) return false;
  try {
    parse_double(token);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t line)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

GeneratedProblem gen_gaussian(Index m, Index n, std::uint64_t seed) {
  require_shape(m, n);
  Rng rng(seed);
  DenseMatrix a(m, n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  }
  return perturbed_rhs(std::move(a), rng);
}

GeneratedProblem gen_correlated(Index m, Index n, double lo, double hi, std::uint64_t seed) {
  require_shape(m, n);
  Rng rng(seed);
  return perturbed_rhs(correlated_matrix(m, n, lo, hi, rng), rng);
}

EqualitySystem gen_gaussian_equalities(Index m, Index n, std::uint64_t seed) {
  require_shape(m, n);
  Rng rng(seed);
  EqualitySystem sys;
  sys.a.resize(m, n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) sys.a(i, j) = rng.normal();
  }
  sys.solution = normal_vector(n, rng);
  sys.b = sys.a * sys.solution;
  return sys;
}

EqualitySystem gen_correlated_equalities(Index m, Index n, double lo, double hi, std::uint64_t seed) {
  require_shape(m, n);
  Rng rng(seed);
  EqualitySystem sys;
  sys.a = correlated_matrix(m, n, lo, hi, rng);
  sys.solution = normal_vector(n, rng);
  sys.b = sys.a * sys.solution;
  return sys;
}

FeasibilityProblem svm_to_feasibility(const LabeledDataset& data) {
  if (data.points.empty() || data.points.size() != data.labels.size()) {
    throw std::invalid_argument("svm_to_feasibility: need one label per point and at least one point");
  }
  const Index d = data.points.front().size();
  DenseMatrix a(static_cast<Index>(data.points.size()), d + 1);
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const auto& z = data.points[i];
    const int y = data.labels[i];
    if (z.size() != d) throw DimensionError("svm_to_feasibility: points differ in length");
    if (y != 1 && y != -1) throw std::invalid_argument("svm_to_feasibility: labels must be +1 or -1");
    const auto r = static_cast<Index>(i);
    a.row(r).head(d) = -static_cast<double>(y) * z.transpose();
    a(r, d) = -static_cast<double>(y);
  }
  return FeasibilityProblem(std::move(a), Vector::Zero(static_cast<Index>(data.points.size())));
}

LabeledDataset read_labeled_csv(std::istream& in) {
  LabeledDataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view content = trim(line);
    if (content.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = content.find(',', start);
      fields.push_back(trim(content.substr(start, comma == std::string_view::npos ? content.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (data.points.empty() && data.labels.empty() && !looks_numeric(fields.front())) {
      continue;  // header
    }
    if (fields.size() < 2) throw ParseError("expected a label and at least one feature", line_no);

    double label = 0.0;
    try {
      label = parse_double(fields.front());
    } catch (const std::invalid_argument&) {
      throw ParseError("label is not numeric", line_no);
    }
    if (label != 1.0 && label != -1.0) throw ParseError("label must be +1 or -1", line_no);

    Vector z(static_cast<Index>(fields.size() - 1));
    for (std::size_t j = 1; j < fields.size(); ++j) {
      try {
        z(static_cast<Index>(j - 1)) = parse_double(fields[j]);
      } catch (const std::invalid_argument&) {
        throw ParseError("feature " + std::to_string(j) + " is not numeric", line_no);
      }
    }
    if (!data.points.empty() && z.size() != data.points.front().size()) {
      throw ParseError("inconsistent feature count", line_no);
    }
    data.points.push_back(std::move(z));
    data.labels.push_back(label > 0 ? 1 : -1);
  }
  if (data.points.empty()) throw ParseError("no records", line_no);
  return data;
}

Index stacked_row_count(const LpInstance& lp) {
  const auto finite = [](const Vector& v) { return static_cast<Index>(v.array().isFinite().count()); };
  return 2 * lp.a_eq.rows() + finite(lp.upper) + finite(lp.lower) + static_cast<Index>(lp.inequalities.size()) + 1;
}

FeasibilityProblem lp_to_feasibility(const LpInstance& lp, std::optional<double> p_star) {
  const std::optional<double> target = p_star ? p_star : lp.p_star;
  if (!target) throw std::invalid_argument("lp_to_feasibility: the optimal value p* is required");
  const Index n = lp.c.size();
  if (lp.a_eq.cols() != n && lp.a_eq.rows() > 0) throw DimensionError("lp_to_feasibility: A and c disagree");
  if (lp.lower.size() != n || lp.upper.size() != n || lp.b.size() != lp.a_eq.rows()) {
    throw DimensionError("lp_to_feasibility: bound or rhs lengths disagree");
  }

  const Index m = stacked_row_count(lp);
  DenseMatrix a = DenseMatrix::Zero(m, n);
  Vector b(m);
  Index r = 0;
  for (Index i = 0; i < lp.a_eq.rows(); ++i, ++r) {
    a.row(r) = lp.a_eq.row(i);
    b(r) = lp.b(i);
  }
  for (Index i = 0; i < lp.a_eq.rows(); ++i, ++r) {
    a.row(r) = -lp.a_eq.row(i);
    b(r) = 0.0 - lp.b(i);
  }
  for (Index j = 0; j < n; ++j) {
    if (std::isfinite(lp.upper(j))) {
      a(r, j) = 1.0;
      b(r++) = lp.upper(j);
    }
  }
  for (Index j = 0; j < n; ++j) {
    if (std::isfinite(lp.lower(j))) {
      a(r, j) = -1.0;
      b(r++) = 0.0 - lp.lower(j);
    }
  }
  a.row(r) = lp.c.transpose();
  b(r++) = *target - lp.objective_constant;
  for (const auto& row : lp.inequalities) {
    const double sign = row.sense == RowSense::LessEqual ? 1.0 : -1.0;
    a.row(r) = sign * row.coefficients.transpose();
    b(r++) = sign * row.rhs + 0.0;
  }
  return FeasibilityProblem(std::move(a), std::move(b));
}

}  // namespace skm
