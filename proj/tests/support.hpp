#pragma once

#include "skm/linalg.hpp"
#include "skm/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <unistd.h>
#include <string>
#include <vector>

namespace skm::test {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(SKM_FIXTURE_DIR) / name; }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("skm-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

inline DenseMatrix from_rows(const std::vector<std::vector<double>>& rows) {
  DenseMatrix a(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) a(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return a;
}

inline Vector vec(const std::vector<double>& values) {
  Vector v(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Index>(i)) = values[i];
  return v;
}

inline DenseMatrix gaussian_matrix(Index m, Index n, Rng& rng) {
  DenseMatrix a(m, n);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) a(i, j) = rng.normal();
  }
  return a;
}

inline Vector gaussian_vector(Index n, Rng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

/// Integer system with an integer interior point: entries of A in
/// [−9, 9], x̂ in [−3, 3]ⁿ, b = A x̂ + s with s ∈ {1, …, 5}.
struct IntegerSystem {
  DenseMatrix a;
  Vector b;
  Vector interior;
};

inline IntegerSystem integer_system(Index m, Index n, Rng& rng) {
  IntegerSystem sys{DenseMatrix(m, n), Vector(m), Vector(n)};
  for (Index j = 0; j < n; ++j) sys.interior(j) = static_cast<double>(rng.uniform_index(7)) - 3.0;
  for (Index i = 0; i < m; ++i) {
    do {
      for (Index j = 0; j < n; ++j) sys.a(i, j) = static_cast<double>(rng.uniform_index(19)) - 9.0;
    } while (sys.a.row(i).isZero());
    sys.b(i) = sys.a.row(i).dot(sys.interior) + 1.0 + static_cast<double>(rng.uniform_index(5));
  }
  return sys;
}

}  // namespace skm::test
