#include "qavg/means.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qavg {

VarianceSet::VarianceSet(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) {
    throw std::domain_error("variance set must contain at least one entry");
  }
  for (double v : values_) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::domain_error("variances must be strictly positive, got " + std::to_string(v));
    }
  }
}

CorrelatedPair::CorrelatedPair(double v1, double v2, double c) : v1_(v1), v2_(v2), c_(c) {
  if (!(v1 > 0.0) || !(v2 > 0.0) || !std::isfinite(v1) || !std::isfinite(v2)) {
    throw std::domain_error("pair variances must be strictly positive");
  }
  if (!std::isfinite(c) || !(c * c < v1 * v2)) {
    throw std::domain_error("correlation c^2 must stay strictly below v1*v2 (got c=" +
                            std::to_string(c) + ")");
  }
}

double power_mean(const VarianceSet& x, int r) {
  const double n = static_cast<double>(x.size());
  if (r == 0) {
    double log_sum = 0.0;
    for (double v : x.values()) log_sum += std::log(v);
    return std::exp(log_sum / n);
  }
  double sum = 0.0;
  for (double v : x.values()) sum += std::pow(v, r);
  return std::pow(sum / n, 1.0 / static_cast<double>(r));
}

double arithmetic_mean(const VarianceSet& x) { return power_mean(x, 1); }

double harmonic_mean(const VarianceSet& x) { return power_mean(x, -1); }

double geometric_mean(const VarianceSet& x) { return power_mean(x, 0); }

double arithmetic_mean_correlated(const CorrelatedPair& p) {
  return 0.5 * (p.v1() + p.v2()) - p.c();
}

double harmonic_mean_correlated(const CorrelatedPair& p) {
  const double denom = p.v1() + p.v2() + 2.0 * p.c();
  if (!(denom > 0.0)) {
    throw std::domain_error("degenerate denominator v1 + v2 + 2c in the correlated harmonic mean");
  }
  return 2.0 * (p.v1() * p.v2() - p.c() * p.c()) / denom;
}

StabilizationPoint stabilization_table(std::size_t n_total, std::size_t n_broken,
                                       double v_quiet, double v_broken) {
  if (n_total < 1) {
    throw std::domain_error("stabilization table needs at least one resource");
  }
  if (n_broken > n_total) {
    throw std::domain_error("broken count exceeds total resource count");
  }
  if (n_broken > 0 && !(v_broken > 0.0)) {
    throw std::domain_error("broken variance must be strictly positive");
  }
  if (n_broken < n_total && !(v_quiet > 0.0)) {
    throw std::domain_error("quiet variance must be strictly positive");
  }
  std::vector<double> supply;
  supply.reserve(n_total);
  supply.insert(supply.end(), n_broken, v_broken);
  supply.insert(supply.end(), n_total - n_broken, v_quiet);
  const VarianceSet set(std::move(supply));
  return {arithmetic_mean(set), harmonic_mean(set)};
}

}  // namespace qavg
