#include "qavg/gaussian.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

#include "qavg/errors.hpp"
#include "qavg/rng.hpp"

namespace qavg {

namespace {

// Rows per generation chunk; chunk c draws from the stream (seed, c), so the
// layout is independent of how generation is scheduled.
constexpr std::size_t kChunkRows = 8192;

void check_index_sets(const Eigen::Index dim,
                      const std::vector<Eigen::Index>& keep,
                      const std::vector<Eigen::Index>& clamp) {
  if (keep.empty()) {
    throw std::invalid_argument("keep set must not be empty");
  }
  std::unordered_set<Eigen::Index> seen;
  for (const auto& set : {keep, clamp}) {
    for (Eigen::Index i : set) {
      if (i < 0 || i >= dim) {
        throw std::invalid_argument("channel index " + std::to_string(i) + " out of range");
      }
      if (!seen.insert(i).second) {
        throw std::invalid_argument("keep and clamp sets must be disjoint without repeats");
      }
    }
  }
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m,
                          const std::vector<Eigen::Index>& rows,
                          const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(rows[r], cols[c]);
  return out;
}

// Var(B | |B| <= a) for B ~ N(0, 1).
double truncated_unit_variance(double alpha) {
  if (alpha < 1e-2) {
    // series around the uniform limit a^2/3; the direct form cancels here
    const double a2 = alpha * alpha;
    return a2 * (1.0 / 3.0 + a2 * (-2.0 / 45.0 + a2 * (2.0 / 945.0 + a2 * (2.0 / 14175.0))));
  }
  const double x = alpha * std::numbers::sqrt2 / 2.0;
  const double mass = alpha > 6.0 ? 1.0 - std::erfc(x) : std::erf(x);
  const double density = std::exp(-0.5 * alpha * alpha) / std::sqrt(2.0 * std::numbers::pi);
  return 1.0 - 2.0 * alpha * density / mass;
}

}  // namespace

QuadratureCovariance::QuadratureCovariance(Eigen::MatrixXd sigma) : sigma_(std::move(sigma)) {
  if (sigma_.rows() == 0 || sigma_.rows() != sigma_.cols()) {
    throw std::invalid_argument("covariance must be square and nonempty");
  }
  const double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
  const double asymmetry = (sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > 1e-12 * scale) {
    throw std::domain_error("covariance is not symmetric (max asymmetry " +
                            std::to_string(asymmetry) + ")");
  }
  sigma_ = (0.5 * (sigma_ + sigma_.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma_, Eigen::EigenvaluesOnly);
  min_eigenvalue_ = solver.eigenvalues().minCoeff();
  if (!(min_eigenvalue_ > 1e-12 * sigma_.trace())) {
    throw std::domain_error("covariance is not strictly positive definite (smallest eigenvalue " +
                            std::to_string(min_eigenvalue_) + ")");
  }
}

QuadratureCovariance QuadratureCovariance::diagonal(const VarianceSet& v) {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sigma(i, i) = v[i];
  return QuadratureCovariance(std::move(sigma));
}

QuadratureCovariance QuadratureCovariance::from_pair(const CorrelatedPair& p) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << p.v1(), p.c(), p.c(), p.v2();
  return QuadratureCovariance(std::move(sigma));
}

TruncationWindow TruncationWindow::absolute(double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw std::domain_error("truncation threshold must be positive and finite");
  }
  return TruncationWindow(false, threshold);
}

SampleBatch::SampleBatch(Eigen::MatrixXd data, std::vector<std::string> channel_labels,
                         std::uint64_t seed)
    : data_(std::move(data)), labels_(std::move(channel_labels)), seed_(seed) {
  if (data_.rows() < 1) {
    throw std::invalid_argument("sample batch needs at least one sample");
  }
  if (static_cast<Eigen::Index>(labels_.size()) != data_.cols()) {
    throw std::invalid_argument("one label per channel required");
  }
  std::unordered_set<std::string> unique(labels_.begin(), labels_.end());
  if (unique.size() != labels_.size()) {
    throw std::invalid_argument("channel labels must be unique");
  }
}

std::span<const double> SampleBatch::channel(Eigen::Index j) const {
  if (j < 0 || j >= data_.cols()) {
    throw std::invalid_argument("channel index out of range");
  }
  // column-major storage: each column is contiguous
  return {data_.col(j).data(), static_cast<std::size_t>(data_.rows())};
}

SampleBatch sample_gaussian(const QuadratureCovariance& sigma,
                            std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) {
    throw std::domain_error("sample count must be at least 1");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(sigma.matrix());
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("covariance factorization failed (smallest eigenvalue " +
                            std::to_string(sigma.min_eigenvalue()) + ")");
  }
  const Eigen::MatrixXd root = llt.matrixL();
  const Eigen::Index m = sigma.dim();
  Eigen::MatrixXd data(static_cast<Eigen::Index>(n_samples), m);
  Eigen::VectorXd z(m);
  for (std::size_t chunk = 0; chunk * kChunkRows < n_samples; ++chunk) {
    RandomStream stream(derive_seed(seed, chunk));
    const std::size_t begin = chunk * kChunkRows;
    const std::size_t end = std::min(n_samples, begin + kChunkRows);
    for (std::size_t i = begin; i < end; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) z(j) = stream.normal();
      data.row(static_cast<Eigen::Index>(i)) = (root * z).transpose();
    }
  }
  std::vector<std::string> labels(m);
  for (Eigen::Index j = 0; j < m; ++j) labels[j] = "in" + std::to_string(j);
  return SampleBatch(std::move(data), std::move(labels), seed);
}

QuadratureCovariance conditional_covariance(const QuadratureCovariance& sigma,
                                            const std::vector<Eigen::Index>& keep,
                                            const std::vector<Eigen::Index>& clamp) {
  check_index_sets(sigma.dim(), keep, clamp);
  const Eigen::MatrixXd kk = submatrix(sigma.matrix(), keep, keep);
  if (clamp.empty()) {
    return QuadratureCovariance(kk);
  }
  const Eigen::MatrixXd kc = submatrix(sigma.matrix(), keep, clamp);
  const Eigen::MatrixXd cc = submatrix(sigma.matrix(), clamp, clamp);
  Eigen::LLT<Eigen::MatrixXd> llt(cc);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("clamped block is singular; cannot condition");
  }
  Eigen::MatrixXd out = kk - kc * llt.solve(kc.transpose());
  out = (0.5 * (out + out.transpose())).eval();
  return QuadratureCovariance(std::move(out));
}

Eigen::RowVectorXd feedforward_gain(const QuadratureCovariance& sigma,
                                    Eigen::Index keep,
                                    const std::vector<Eigen::Index>& clamp) {
  check_index_sets(sigma.dim(), {keep}, clamp);
  if (clamp.empty()) {
    throw std::invalid_argument("feedforward needs at least one measured channel");
  }
  const Eigen::MatrixXd kc = submatrix(sigma.matrix(), {keep}, clamp);
  const Eigen::MatrixXd cc = submatrix(sigma.matrix(), clamp, clamp);
  Eigen::LLT<Eigen::MatrixXd> llt(cc);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("measured block is singular; gain undefined");
  }
  return llt.solve(kc.transpose()).transpose();
}

double truncated_variance(double variance, const TruncationWindow& window) {
  if (!(variance > 0.0)) {
    throw std::domain_error("variance must be strictly positive");
  }
  if (window.is_open()) {
    return variance;
  }
  return variance * truncated_unit_variance(window.threshold() / std::sqrt(variance));
}

double success_probability(double variance, const TruncationWindow& window) {
  if (!(variance > 0.0)) {
    throw std::domain_error("variance must be strictly positive");
  }
  if (window.is_open()) {
    return 1.0;
  }
  return std::erf(window.threshold() / std::sqrt(2.0 * variance));
}

double finite_window_conditional_variance(const QuadratureCovariance& sigma2x2,
                                          const TruncationWindow& window) {
  if (sigma2x2.dim() != 2) {
    throw UnsupportedConfigurationError(
        "finite-window theory covers a single trigger channel; use the Monte Carlo path");
  }
  const auto& s = sigma2x2.matrix();
  const double schur = s(0, 0) - s(0, 1) * s(0, 1) / s(1, 1);
  const double gain = s(0, 1) / s(1, 1);
  return schur + gain * gain * truncated_variance(s(1, 1), window);
}

}  // namespace qavg
