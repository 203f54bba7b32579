#pragma once

#include "skm/solvers.hpp"

#include <chrono>
#include <optional>

namespace skm::detail {

/// Residual summary of one iterate, evaluated at trace points.
struct Measurement {
  double residual_norm = 0.0;
  double max_violation = 0.0;
};

/// Tracks the initial measurement so relative rules can be evaluated.
class HaltingMonitor {
public:
  explicit HaltingMonitor(const HaltingRule& rule) : rule_(rule) {}

  /// The halting reason if the rule fires on m, std::nullopt otherwise.
  std::optional<HaltReason> check(const Measurement& m);

private:
  HaltingRule rule_;
  std::optional<Measurement> initial_;
};

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

/// Iterations between wall-clock polls when no trace point is due.
inline constexpr std::size_t kClockPollInterval = 256;

}  // namespace skm::detail
