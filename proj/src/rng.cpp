#include "skm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace skm {

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_index(std::uint64_t bound) {
  if (bound == 0) {
    throw std::invalid_argument("uniform_index: empty range");
  }
  // Rejection on the largest multiple of bound below 2^64.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % bound + 1) % bound;
  std::uint64_t v = engine_();
  while (v > limit) {
    v = engine_();
  }
  return v % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

SubsetSampler::SubsetSampler(std::size_t m) : perm_(m) {
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
}

const std::vector<std::size_t>& SubsetSampler::draw(std::size_t k, Rng& rng) {
  const std::size_t m = perm_.size();
  if (k < 1 || k > m) {
    throw std::invalid_argument("sample size " + std::to_string(k) + " outside [1, " +
                                std::to_string(m) + "]");
  }
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(m - i));
    std::swap(perm_[i], perm_[j]);
  }
  return perm_;
}

std::vector<std::size_t> sample_constraints(std::size_t m, std::size_t beta, Rng& rng) {
  if (beta < 1 || beta > m) {
    throw std::invalid_argument("sample_constraints: beta=" + std::to_string(beta) +
                                " must lie in [1, m=" + std::to_string(m) + "]");
  }
  SubsetSampler sampler(m);
  const auto& perm = sampler.draw(beta, rng);
  std::vector<std::size_t> out(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(beta));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace skm
