#pragma once

#include <cstddef>
#include <vector>

namespace qavg {

/// Per-resource amplitude-quadrature variances in shot-noise units
/// (vacuum = 1). Entries are strictly positive; at least one entry.
class VarianceSet {
 public:
  explicit VarianceSet(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

/// Two resources with quadrature correlation c = <X1 X2>. The second-moment
/// matrix [[v1, c], [c, v2]] must be strictly positive definite; conditioning
/// on a trigger port is undefined on the degenerate boundary c^2 = v1 v2.
class CorrelatedPair {
 public:
  CorrelatedPair(double v1, double v2, double c);

  double v1() const noexcept { return v1_; }
  double v2() const noexcept { return v2_; }
  double c() const noexcept { return c_; }

 private:
  double v1_;
  double v2_;
  double c_;
};

/// Generalized power mean ((1/n) sum x_i^r)^(1/r). r = 0 evaluates the
/// geometric-mean limit (prod x_i)^(1/n).
double power_mean(const VarianceSet& x, int r);

double arithmetic_mean(const VarianceSet& x);  // power_mean(x, 1)
double harmonic_mean(const VarianceSet& x);    // power_mean(x, -1)
double geometric_mean(const VarianceSet& x);   // power_mean(x, 0)

/// (v1 + v2)/2 - c: variance of the destructive beam-splitter port.
double arithmetic_mean_correlated(const CorrelatedPair& p);

/// 2 (v1 v2 - c^2) / (v1 + v2 + 2c): narrow-window heralded limit.
/// Equals harmonic_mean({v1, v2}) at c = 0.
double harmonic_mean_correlated(const CorrelatedPair& p);

struct StabilizationPoint {
  double arithmetic;
  double harmonic;
};

/// Means of a supply of n_total resources of which n_broken carry variance
/// v_broken and the rest v_quiet.
StabilizationPoint stabilization_table(std::size_t n_total, std::size_t n_broken,
                                       double v_quiet, double v_broken);

}  // namespace qavg
