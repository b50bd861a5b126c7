#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qavg/means.hpp"

namespace qavg {

/// Symmetric, strictly positive definite matrix of second moments of the
/// zero-mean amplitude quadratures, in shot-noise units. Diagonal entries
/// are the V_i, off-diagonals the correlations C_ij. Construction rejects
/// asymmetry beyond 1e-12 (relative) and a smallest eigenvalue at or below
/// 1e-12 * trace.
class QuadratureCovariance {
 public:
  explicit QuadratureCovariance(Eigen::MatrixXd sigma);

  static QuadratureCovariance diagonal(const VarianceSet& v);
  static QuadratureCovariance from_pair(const CorrelatedPair& p);

  const Eigen::MatrixXd& matrix() const noexcept { return sigma_; }
  Eigen::Index dim() const noexcept { return sigma_.rows(); }
  double variance(Eigen::Index channel) const { return sigma_(channel, channel); }
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  Eigen::MatrixXd sigma_;
  double min_eigenvalue_ = 0.0;
};

/// Symmetric acceptance window |b| <= t around zero, or open (no truncation).
class TruncationWindow {
 public:
  static TruncationWindow open() { return TruncationWindow(true, std::numeric_limits<double>::infinity()); }
  static TruncationWindow absolute(double threshold);  // requires t > 0 finite

  bool is_open() const noexcept { return open_; }
  double threshold() const noexcept { return threshold_; }  // +inf when open
  bool accepts(double outcome) const noexcept {
    return open_ || std::abs(outcome) <= threshold_;
  }

 private:
  TruncationWindow(bool open, double t) : open_(open), threshold_(t) {}
  bool open_;
  double threshold_;
};

/// N x m matrix of quadrature samples with channel labels and the seed that
/// produced them. Identical (covariance, N, seed) regenerates identical bits.
class SampleBatch {
 public:
  SampleBatch(Eigen::MatrixXd data, std::vector<std::string> channel_labels,
              std::uint64_t seed);

  const Eigen::MatrixXd& data() const noexcept { return data_; }
  const std::vector<std::string>& channel_labels() const noexcept { return labels_; }
  std::uint64_t seed() const noexcept { return seed_; }
  Eigen::Index samples() const noexcept { return data_.rows(); }
  Eigen::Index channels() const noexcept { return data_.cols(); }
  /// Contiguous view of one channel's samples.
  std::span<const double> channel(Eigen::Index j) const;

 private:
  Eigen::MatrixXd data_;
  std::vector<std::string> labels_;
  std::uint64_t seed_;
};

/// Zero-mean multivariate normal samples with the given covariance, generated
/// in fixed-size chunks whose streams derive from (seed, chunk).
SampleBatch sample_gaussian(const QuadratureCovariance& sigma,
                            std::size_t n_samples, std::uint64_t seed);

/// Schur complement Sigma_kk - Sigma_kc Sigma_cc^-1 Sigma_ck: covariance of
/// the kept channels given the clamped channels pinned to zero. An empty
/// clamp set returns the marginal covariance of the kept channels.
QuadratureCovariance conditional_covariance(const QuadratureCovariance& sigma,
                                            const std::vector<Eigen::Index>& keep,
                                            const std::vector<Eigen::Index>& clamp);

/// g = Sigma_kc Sigma_cc^-1. Displacing the kept sample by -g.b (b = clamped
/// outcomes) attains the Schur-complement variance.
Eigen::RowVectorXd feedforward_gain(const QuadratureCovariance& sigma,
                                    Eigen::Index keep,
                                    const std::vector<Eigen::Index>& clamp);

/// Var(B | |B| <= t) for B ~ N(0, variance).
double truncated_variance(double variance, const TruncationWindow& window);

/// P(|B| <= t) = erf(t / sqrt(2 variance)) for B ~ N(0, variance).
double success_probability(double variance, const TruncationWindow& window);

/// Var(keep | |trigger| <= t) for a 2x2 covariance ordered (keep, trigger):
/// Schur complement plus g^2 * truncated trigger variance. Exact for a single
/// trigger channel only; larger blocks are served by the Monte Carlo path.
double finite_window_conditional_variance(const QuadratureCovariance& sigma2x2,
                                          const TruncationWindow& window);

}  // namespace qavg
