#include <doctest.h>

#include "skm/diagnostics.hpp"
#include "skm/linalg.hpp"
#include "support.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

using namespace skm;
using skm::test::from_rows;
using skm::test::vec;

TEST_CASE("positive_part") {
  CHECK(positive_part(vec({0, 0})) == vec({0, 0}));
  CHECK(positive_part(vec({3.5})) == vec({3.5}));
  CHECK(positive_part(vec({-1, 2, -0.5, 0})) == vec({0, 2, 0, 0}));

  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector v = test::gaussian_vector(8, rng);
    const Vector once = positive_part(v);
    CHECK(positive_part(once) == once);
    CHECK((once.array() >= 0.0).all());
  }
}

TEST_CASE("residual") {
  const FeasibilityProblem eye(from_rows({{1, 0}, {0, 1}}), vec({0, 0}));
  CHECK(residual(eye, vec({2, -3})) == vec({2, 0}));

  const FeasibilityProblem pair(from_rows({{1}, {-1}}), vec({1, 1}));
  CHECK(residual(pair, vec({5})) == vec({4, 0}));
  CHECK(residual(pair, vec({0})).isZero());

  CHECK_THROWS_AS(residual(eye, vec({1, 2, 3})), DimensionError);
}

TEST_CASE("residual vanishes exactly on feasible points") {
  Rng rng(5);
  const FeasibilityProblem p(test::gaussian_matrix(30, 4, rng), test::gaussian_vector(30, rng));
  for (int trial = 0; trial < 200; ++trial) {
    const Vector x = test::gaussian_vector(4, rng);
    bool feasible = true;
    for (Index i = 0; i < p.rows(); ++i) feasible = feasible && p.a().row(i).dot(x) <= p.b()(i);
    CHECK(residual(p, x).isZero() == feasible);
    CHECK(satisfied_count(p, x) == static_cast<std::size_t>((residual(p, x).array() == 0.0).count()));
  }
}

TEST_CASE("construction validates input") {
  CHECK_THROWS_AS(FeasibilityProblem(from_rows({{1, 2}}), vec({1, 2})), DimensionError);
  DenseMatrix bad = from_rows({{1, 2}});
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(FeasibilityProblem(bad, vec({1})), std::invalid_argument);
  CHECK_THROWS_AS(FeasibilityProblem(from_rows({{1}}), vec({std::numeric_limits<double>::infinity()})),
                  std::invalid_argument);
}

TEST_CASE("row norms are cached") {
  Rng rng(3);
  const FeasibilityProblem p(test::gaussian_matrix(20, 6, rng), test::gaussian_vector(20, rng));
  for (Index i = 0; i < p.rows(); ++i) {
    CHECK(std::abs(p.row_norms()(i) - p.a().row(i).norm()) <= kRowNormCacheTolerance * p.a().row(i).norm());
  }
  CHECK_FALSE(p.normalized());
}

TEST_CASE("zero rows") {
  std::vector<std::string> warnings;
  auto previous = set_warning_handler([&](std::string_view msg) { warnings.emplace_back(msg); });

  SUBCASE("satisfiable zero rows are dropped") {
    const FeasibilityProblem p(from_rows({{1, 0}, {0, 0}, {0, 1}, {1e-15, 0}}), vec({1, 0, 2, 3}));
    CHECK(p.rows() == 2);
    CHECK(p.dropped_zero_rows() == 2);
    CHECK(p.b() == vec({1, 2}));
    CHECK_FALSE(warnings.empty());
  }
  SUBCASE("unsatisfiable zero row") {
    try {
      FeasibilityProblem(from_rows({{1, 0}, {0, 0}}), vec({1, -1}));
      FAIL("expected InfeasibleRowError");
    } catch (const InfeasibleRowError& e) {
      CHECK(e.row() == 1);
    }
  }
  SUBCASE("all rows zero") {
    CHECK_THROWS(FeasibilityProblem(from_rows({{0, 0}}), vec({1})));
  }
  set_warning_handler(std::move(previous));
}

TEST_CASE("normalize_system") {
  const FeasibilityProblem p(from_rows({{3, 4}}), vec({10}));
  const FeasibilityProblem q = normalize_system(p);
  CHECK(q.normalized());
  CHECK(q.a()(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(q.a()(0, 1) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(q.b()(0) == doctest::Approx(2.0).epsilon(1e-15));

  const FeasibilityProblem again = normalize_system(q);
  CHECK(again.normalized());
  CHECK((again.a() - q.a()).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((again.b() - q.b()).cwiseAbs().maxCoeff() <= 1e-15);

  // A system whose rows happen to be unit length is recognised as normalized.
  CHECK(FeasibilityProblem(from_rows({{0.6, 0.8}, {1, 0}}), vec({1, 2})).normalized());

  CHECK_THROWS_AS(FeasibilityProblem(from_rows({{0, 0}}), vec({-1})), InfeasibleRowError);
}

TEST_CASE("normalization preserves residual signs") {
  Rng rng(17);
  DenseMatrix a = test::gaussian_matrix(25, 3, rng);
  for (Index i = 0; i < a.rows(); ++i) a.row(i) *= std::exp(3.0 * rng.normal());
  const FeasibilityProblem p(a, test::gaussian_vector(25, rng));
  const FeasibilityProblem q = normalize_system(p);
  for (Index i = 0; i < q.rows(); ++i) CHECK(std::abs(q.row_norms()(i) - 1.0) <= kNormalizedTolerance);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = 3.0 * test::gaussian_vector(3, rng);
    const Vector r = p.raw_residual(x);
    const Vector s = q.raw_residual(x);
    for (Index i = 0; i < r.size(); ++i) {
      CHECK((r(i) > 0) == (s(i) > 0));
      CHECK((r(i) < 0) == (s(i) < 0));
    }
  }
}

TEST_CASE("euclidean_distance") {
  const Vector x = vec({1.5, -2});
  CHECK(euclidean_distance(x, x) == 0.0);
  CHECK(euclidean_distance(vec({0, 0}), vec({3, 4})) == 5.0);
  CHECK(euclidean_distance(vec({1}), vec({-1})) == 2.0);
  CHECK_THROWS_AS(euclidean_distance(vec({1}), vec({1, 2})), DimensionError);
}

TEST_CASE("smallest_singular_value") {
  CHECK(smallest_singular_value(DenseMatrix::Identity(3, 3)) == doctest::Approx(1.0));
  CHECK(smallest_singular_value(from_rows({{2, 0}, {0, 0.5}})) == doctest::Approx(0.5));
  CHECK(smallest_singular_value(from_rows({{1, 2}, {2, 4}, {3, 6}})) <= 1e-12);
  CHECK_THROWS_AS(smallest_singular_value(from_rows({{1, 2, 3}})), DimensionError);

  SUBCASE("agrees with the eigenvalues of AᵀA") {
    Rng rng(2024);
    const DenseMatrix a = test::gaussian_matrix(50, 10, rng);
    const Eigen::MatrixXd gram = a.transpose() * a;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const double oracle = std::sqrt(eig.eigenvalues().minCoeff());
    CHECK(std::abs(smallest_singular_value(a) - oracle) <= 1e-6 * oracle);
  }

  SUBCASE("lower-bounds ‖Av‖ over unit vectors") {
    Rng rng(99);
    for (int k = 0; k < 3; ++k) {
      const DenseMatrix a = test::gaussian_matrix(12 + 4 * k, 4 + k, rng);
      const double smin = smallest_singular_value(a);
      for (int trial = 0; trial < 100; ++trial) {
        const Vector v = test::gaussian_vector(a.cols(), rng).normalized();
        CHECK(smin <= (a * v).norm() + 1e-8);
      }
    }
  }
}

TEST_CASE("stack_equalities") {
  const FeasibilityProblem p = stack_equalities(from_rows({{1, 2}, {3, 4}}), vec({5, 6}));
  CHECK(p.rows() == 4);
  CHECK(p.a().row(2) == from_rows({{-1, -2}}));
  CHECK(p.b() == vec({5, 6, -5, -6}));
  // Ax = b exactly ⇔ the stacked residual vanishes.
  const Vector x = vec({-4, 4.5});
  CHECK(residual(p, x).isZero());
  CHECK(residual(p, vec({0, 0})).norm() == doctest::Approx(std::sqrt(61.0)));
}
