#include "skm/theory.hpp"

#include "skm/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace skm {

namespace {

constexpr std::size_t kExactBinomialLimit = 60;

void require_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda <= 2.0)) {
    throw std::invalid_argument("lambda=" + std::to_string(lambda) + " must lie in (0, 2]");
  }
}

void require_positive_l2(double l2) {
  if (!(l2 > 0.0) || !std::isfinite(l2)) throw std::invalid_argument("L2 must be positive and finite");
}

double contraction(double lambda, double denom, double l2) {
  require_lambda(lambda);
  require_positive_l2(l2);
  if (!(denom >= 1.0)) throw std::invalid_argument("rate denominator must be at least 1");
  const double rho = 1.0 - (2.0 * lambda - lambda * lambda) / (denom * l2 * l2);
  // mL² = 1 exactly is the degenerate boundary; rounding may land just below it.
  if (rho < 0.0 && rho > -1e-12) return 0.0;
  if (rho < 0.0) {
    warn("contraction factor " + std::to_string(rho) + " is negative (L2 below its admissible range); clamped to 0");
    return 0.0;
  }
  return rho;
}

double log_binomial(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

bool is_integral(double v) { return std::isfinite(v) && v == std::nearbyint(v); }

}  // namespace

HoffmanEstimate hoffman_from_equalities(const DenseMatrix& a_eq) {
  if (a_eq.rows() < a_eq.cols()) throw HoffmanUnavailable();
  const double smin = smallest_singular_value(a_eq);
  if (!(smin > kRankCutoff)) throw HoffmanUnavailable();
  HoffmanEstimate est;
  est.l2 = 1.0 / smin;
  est.l_inf_upper = std::sqrt(static_cast<double>(a_eq.rows())) * est.l2;
  est.method = HoffmanMethod::LeftInverse;
  return est;
}

HoffmanEstimate hoffman_user_supplied(double l2, Index m) {
  require_positive_l2(l2);
  HoffmanEstimate est;
  est.l2 = l2;
  est.l_inf_upper = std::sqrt(static_cast<double>(m)) * l2;
  est.method = HoffmanMethod::UserSupplied;
  return est;
}

double theorem1_rate(double lambda, std::size_t m, double l2) {
  return contraction(lambda, static_cast<double>(m), l2);
}

std::size_t active_denominator(std::size_t m, std::size_t satisfied, std::size_t beta) {
  if (satisfied > m || beta < 1 || beta > m) throw std::invalid_argument("need s <= m and 1 <= beta <= m");
  return std::max(m - satisfied, m - beta + 1);
}

double per_iteration_rate(double lambda, std::size_t v, double l2) {
  return contraction(lambda, static_cast<double>(v), l2);
}

double two_phase_bound(std::size_t k, std::size_t k_switch, double lambda, std::size_t m, std::size_t beta,
                       double l2, double d0_sq, std::optional<std::size_t> n) {
  if (k < k_switch) throw std::invalid_argument("two_phase_bound: k must be at least K");
  if (beta < 1 || beta > m) throw std::invalid_argument("two_phase_bound: beta must lie in [1, m]");
  if (n && beta + *n > m) {
    warn("two_phase_bound: beta > m - n, the two-phase hypothesis does not hold");
  }
  const double first = theorem1_rate(lambda, m, l2);
  const double second = per_iteration_rate(lambda, m - beta + 1, l2);
  return std::pow(first, static_cast<double>(k_switch)) * std::pow(second, static_cast<double>(k - k_switch)) * d0_sq;
}

double expected_selected_residual_sq(std::span<const double> r, std::size_t beta) {
  const std::size_t m = r.size();
  if (beta < 1 || beta > m) throw std::invalid_argument("beta must lie in [1, m]");
  std::vector<double> sorted(r.begin(), r.end());
  for (double v : sorted) {
    if (!(v >= 0.0)) throw std::invalid_argument("residual entries must be non-negative (pass the positive part)");
  }
  std::sort(sorted.begin(), sorted.end());

  if (m <= kExactBinomialLimit) {
    std::uint64_t weight = 1;
    std::uint64_t weight_sum = 0;
    long double total = 0.0L;
    for (std::size_t k = 0; k + beta <= m; ++k) {
      if (k > 0) weight = weight * (beta - 1 + k) / k;
      const long double v = sorted[k + beta - 1];
      total += static_cast<long double>(weight) * v * v;
      weight_sum += weight;
    }
    return static_cast<double>(total / static_cast<long double>(weight_sum));
  }

  const double log_total = log_binomial(static_cast<double>(m), static_cast<double>(beta));
  long double total = 0.0L;
  for (std::size_t k = 0; k + beta <= m; ++k) {
    const double lw = log_binomial(static_cast<double>(beta - 1 + k), static_cast<double>(beta - 1)) - log_total;
    const long double v = sorted[k + beta - 1];
    total += std::exp(static_cast<long double>(lw)) * v * v;
  }
  return static_cast<double>(total);
}

double brute_force_expected_max_sq(std::span<const double> r, std::size_t beta) {
  std::vector<long double> values(r.begin(), r.end());
  return static_cast<double>(brute_force_expected_max_sq_exact<long double>(values, beta));
}

EncodingLength encoding_length(const DenseMatrix& a_int, const Vector& b_int) {
  if (b_int.size() != a_int.rows() || a_int.rows() < 1 || a_int.cols() < 1) {
    throw DimensionError("encoding_length: inconsistent dimensions");
  }
  double sigma = 0.0;
  for (Index i = 0; i < a_int.rows(); ++i) {
    for (Index j = 0; j < a_int.cols(); ++j) {
      const double v = a_int(i, j);
      if (!is_integral(v)) {
        throw NonIntegerDataError("encoding_length: entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                  ") is not an integer");
      }
      sigma += std::log2(std::abs(v) + 1.0);
    }
    if (!is_integral(b_int(i))) {
      throw NonIntegerDataError("encoding_length: rhs entry " + std::to_string(i) + " is not an integer");
    }
    sigma += std::log2(std::abs(b_int(i)) + 1.0);
  }
  sigma += std::log2(static_cast<double>(a_int.rows()) * static_cast<double>(a_int.cols())) + 2.0;
  return {sigma, a_int.rowwise().norm().maxCoeff()};
}

std::pair<DenseMatrix, Vector> clear_denominators(const std::vector<std::vector<Rational>>& rows,
                                                  const std::vector<Rational>& rhs) {
  if (rows.empty() || rows.size() != rhs.size()) throw DimensionError("clear_denominators: inconsistent dimensions");
  const std::size_t n = rows.front().size();
  DenseMatrix a(static_cast<Index>(rows.size()), static_cast<Index>(n));
  Vector b(static_cast<Index>(rows.size()));
  constexpr std::int64_t kExactLimit = std::int64_t{1} << 53;

  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != n) throw DimensionError("clear_denominators: ragged rows");
    std::int64_t scale = 1;
    auto absorb = [&](const Rational& q) {
      if (q.den <= 0) throw std::invalid_argument("clear_denominators: denominators must be positive");
      scale = std::lcm(scale, q.den);
      if (scale > kExactLimit) throw std::overflow_error("clear_denominators: row scale too large");
    };
    for (const auto& q : rows[i]) absorb(q);
    absorb(rhs[i]);
    auto scaled = [&](const Rational& q) {
      const std::int64_t factor = scale / q.den;
      if (q.num != 0 && std::abs(q.num) > kExactLimit / factor) {
        throw std::overflow_error("clear_denominators: scaled entry too large");
      }
      return static_cast<double>(q.num * factor);
    };
    for (std::size_t j = 0; j < n; ++j) a(static_cast<Index>(i), static_cast<Index>(j)) = scaled(rows[i][j]);
    b(static_cast<Index>(i)) = scaled(rhs[i]);
  }
  return {std::move(a), std::move(b)};
}

double max_violation(const FeasibilityProblem& p, const Vector& x) {
  return std::max(0.0, p.raw_residual(x).maxCoeff());
}

double certificate_threshold(const EncodingLength& enc) {
  return std::exp2(1.0 - enc.sigma) / enc.max_row_norm;
}

CertificateReport certificate_check(const FeasibilityProblem& normalized, const Vector& x,
                                    const EncodingLength& enc) {
  if (!normalized.normalized()) {
    throw std::invalid_argument("certificate_check: the system must be normalized first");
  }
  CertificateReport report;
  report.theta = max_violation(normalized, x);
  report.threshold = certificate_threshold(enc);
  report.is_certificate = report.theta < report.threshold;
  return report;
}

std::size_t iteration_bound(const EncodingLength& enc, std::size_t n, std::size_t m, double lambda, double l2) {
  if (lambda == 2.0) throw std::invalid_argument("no finite bound at lambda=2");
  if (!(lambda > 0.0 && lambda < 2.0)) throw std::invalid_argument("lambda must lie in (0, 2)");
  require_positive_l2(l2);
  if (n < 1 || m < 1) throw std::invalid_argument("iteration_bound: n and m must be positive");

  const double numerator =
      4.0 * enc.sigma - 4.0 - std::log2(static_cast<double>(n)) + 2.0 * std::log2(enc.max_row_norm);
  if (numerator <= 0.0) return 1;
  const double ml2 = static_cast<double>(m) * l2 * l2;
  const double rest = ml2 - 2.0 * lambda + lambda * lambda;
  if (rest <= 0.0) return 1;  // zero contraction factor: one exact step suffices
  const double denominator = std::log2(ml2 / rest);
  const double q = numerator / denominator;
  if (q >= static_cast<double>(std::numeric_limits<std::size_t>::max() / 2)) {
    warn("iteration_bound: bound exceeds the representable range; saturating");
    return std::numeric_limits<std::size_t>::max() / 2;
  }
  return static_cast<std::size_t>(std::floor(q)) + 1;
}

double failure_probability_bound(const EncodingLength& enc, std::size_t n, std::size_t m, double lambda,
                                 double l2, std::size_t k) {
  const double rho = theorem1_rate(lambda, m, l2);
  return enc.max_row_norm * std::exp2(2.0 * enc.sigma - 2.0) / std::sqrt(static_cast<double>(n)) *
         std::pow(rho, static_cast<double>(k) / 2.0);
}

void validate(const GainModel& model) {
  if (model.m < 1 || model.n < 1) throw std::invalid_argument("gain model: m and n must be positive");
  if (model.s > model.m) throw std::invalid_argument("gain model: s must not exceed m");
  if (!(model.c > 0.0)) throw std::invalid_argument("gain model: c must be positive");
  if (!(model.overhead >= 0.0)) throw std::invalid_argument("gain model: C must be non-negative");
}

double gain(const GainModel& model, std::size_t beta) {
  validate(model);
  if (beta < 1 || beta > model.m) throw std::invalid_argument("gain: beta must lie in [1, m]");
  const double cost = model.overhead + model.c * static_cast<double>(model.n) * static_cast<double>(beta);
  if (beta > model.s) return 1.0 / cost;
  const double ratio = static_cast<double>(model.s) / static_cast<double>(model.m);
  return (1.0 - std::pow(ratio, static_cast<double>(beta))) / cost;
}

std::size_t optimal_beta(const GainModel& model) {
  validate(model);
  std::size_t best = 1;
  double best_gain = gain(model, 1);
  for (std::size_t beta = 2; beta <= model.m; ++beta) {
    const double g = gain(model, beta);
    if (g > best_gain) {
      best = beta;
      best_gain = g;
    }
  }
  return best;
}

}  // namespace skm
