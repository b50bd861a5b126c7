#pragma once

#include <Eigen/Dense>

#include <cstddef>

#include "qavg/gaussian.hpp"

namespace qavg {

/// Real orthogonal n x n mixing matrix modelling an array of two-port beam
/// splitters. Row i expresses output port i in terms of the inputs.
class MixingNetwork {
 public:
  explicit MixingNetwork(Eigen::MatrixXd u);  // requires ||u^T u - I||_max < 1e-12

  const Eigen::MatrixXd& matrix() const noexcept { return u_; }
  Eigen::Index ports() const noexcept { return u_.rows(); }

  /// True when |u(0, j)| = 1/sqrt(n) for every input j, i.e. port 0 is a
  /// balanced collection port.
  bool collection_port_balanced(double tol = 1e-12) const;

 private:
  Eigen::MatrixXd u_;
};

/// [[cos t, sin t], [sin t, -cos t]]; t = pi/4 is the balanced splitter.
MixingNetwork beam_splitter(double theta);

/// Cascade of n-1 two-port splitters with angles theta_k = arccos(1/sqrt(k+1));
/// output port 0 receives amplitude 1/sqrt(n) from every input.
MixingNetwork balanced_network(std::size_t n);

/// u sigma u^T; preserves the trace.
QuadratureCovariance apply_to_covariance(const MixingNetwork& net,
                                         const QuadratureCovariance& sigma);

/// Replaces each sample row x by u x; channels are relabelled port0..port{n-1}.
SampleBatch apply_to_samples(const MixingNetwork& net, const SampleBatch& batch);

}  // namespace qavg
