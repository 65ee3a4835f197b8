#pragma once

#include <span>

namespace daa {

struct PairedTTest {
  double t = 0.0;
  double p = 1.0;  // two-sided
  std::size_t n = 0;
  double mean_difference = 0.0;  // mean of a - b
  double sd_difference = 0.0;    // sample standard deviation (n - 1)

  /// One-sided p for the alternative mean(a - b) > 0.
  double p_greater() const;
  /// One-sided p for the alternative mean(a - b) < 0.
  double p_less() const;
};

/// Two-sided paired t-test on a - b with n - 1 degrees of freedom. Throws
/// std::invalid_argument for unequal lengths, n < 2, or zero-variance
/// differences.
PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace daa
