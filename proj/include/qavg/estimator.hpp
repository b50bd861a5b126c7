#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace qavg {

struct VarianceEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t n_effective = 0;
};

struct SuccessEstimate {
  double p = 0.0;
  double ci_lo = 0.0;  // Wilson 95% bounds
  double ci_hi = 0.0;
  std::size_t kept = 0;
  std::size_t total = 0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Unbiased sample variance; the standard error V * sqrt(2/(N-1)) assumes
/// Gaussian samples. Requires N >= 2.
VarianceEstimate estimate_variance(std::span<const double> samples);

/// kept/total with a Wilson 95% interval (one-sided at the 0 and 1 edges).
SuccessEstimate estimate_success(std::size_t kept, std::size_t total);

/// Percentile bootstrap 95% interval for the variance. Deterministic for a
/// fixed seed; resample b draws its indices from the stream (seed, b).
/// Requires N >= 10 and resamples >= 100.
Interval bootstrap_variance_ci(std::span<const double> samples,
                               std::size_t resamples, std::uint64_t seed);

}  // namespace qavg
