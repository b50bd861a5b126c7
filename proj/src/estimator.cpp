#include "qavg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qavg/rng.hpp"

namespace qavg {

namespace {

constexpr double kZ95 = 1.959963984540054;  // two-sided 95% normal quantile

}  // namespace

VarianceEstimate estimate_variance(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 2) {
    throw std::domain_error("variance estimate needs at least two samples");
  }
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    ss += d * d;
  }
  const double value = ss / static_cast<double>(n - 1);
  const double stderr_ = value * std::sqrt(2.0 / static_cast<double>(n - 1));
  return {value, stderr_, n};
}

SuccessEstimate estimate_success(std::size_t kept, std::size_t total) {
  if (total == 0) {
    throw std::domain_error("success estimate needs at least one trial");
  }
  if (kept > total) {
    throw std::domain_error("kept count exceeds total count");
  }
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(kept) / n;
  const double z2 = kZ95 * kZ95;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // the interval always contains the point estimate; the extremes round to it
  const double lo = std::min(p, std::max(0.0, center - half));
  const double hi = std::max(p, std::min(1.0, center + half));
  return {p, lo, hi, kept, total};
}

Interval bootstrap_variance_ci(std::span<const double> samples,
                               std::size_t resamples, std::uint64_t seed) {
  const std::size_t n = samples.size();
  if (n < 10) {
    throw std::domain_error("bootstrap needs at least 10 samples");
  }
  if (resamples < 100) {
    throw std::domain_error("bootstrap needs at least 100 resamples");
  }
  std::vector<double> variances(resamples);
  std::vector<double> scratch(n);
  for (std::size_t b = 0; b < resamples; ++b) {
    RandomStream stream(derive_seed(seed, b));
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = std::min(n - 1, static_cast<std::size_t>(stream.uniform01() * static_cast<double>(n)));
      scratch[i] = samples[idx];
    }
    variances[b] = estimate_variance(scratch).value;
  }
  std::sort(variances.begin(), variances.end());
  const auto last = static_cast<double>(resamples - 1);
  const auto lo_idx = static_cast<std::size_t>(std::floor(0.025 * last));
  const auto hi_idx = static_cast<std::size_t>(std::ceil(0.975 * last));
  return {variances[lo_idx], variances[hi_idx]};
}

}  // namespace qavg
