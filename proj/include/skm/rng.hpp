#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace skm {

/// Seedable generator used by every solver and instance generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The derived distributions are implemented here rather than
/// taken from <random>, whose distribution algorithms are unspecified and
/// differ between standard libraries. Changing any of them requires bumping
/// kRngName.
class Rng {
public:
  static constexpr std::string_view kRngName = "mt19937_64/polar-normal/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);
  /// Standard normal (Marsaglia polar method).
  double normal();

private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Draws uniformly random k-subsets of {0, …, m−1}.
///
/// Keeps a permutation buffer and runs a partial Fisher–Yates shuffle per
/// draw, so a draw costs O(k) regardless of m. Each draw is uniform over all
/// C(m, k) subsets whatever the buffer state left by earlier draws.
class SubsetSampler {
public:
  explicit SubsetSampler(std::size_t m);

  std::size_t population() const noexcept { return perm_.size(); }

  /// The first k entries of the returned view form the sample, unordered.
  /// The view is invalidated by the next call.
  const std::vector<std::size_t>& draw(std::size_t k, Rng& rng);

private:
  std::vector<std::size_t> perm_;
};

/// A uniformly random size-beta subset of {0, …, m−1}, sorted ascending.
/// Throws std::invalid_argument unless 1 ≤ beta ≤ m.
std::vector<std::size_t> sample_constraints(std::size_t m, std::size_t beta, Rng& rng);

}  // namespace skm
