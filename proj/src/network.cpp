#include "qavg/network.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qavg {

MixingNetwork::MixingNetwork(Eigen::MatrixXd u) : u_(std::move(u)) {
  if (u_.rows() == 0 || u_.rows() != u_.cols()) {
    throw std::invalid_argument("mixing matrix must be square and nonempty");
  }
  const Eigen::MatrixXd gram = u_.transpose() * u_;
  const double residual =
      (gram - Eigen::MatrixXd::Identity(u_.rows(), u_.cols())).cwiseAbs().maxCoeff();
  if (!(residual < 1e-12)) {
    throw std::domain_error("mixing matrix is not orthogonal (residual " +
                            std::to_string(residual) + ")");
  }
}

bool MixingNetwork::collection_port_balanced(double tol) const {
  const double target = 1.0 / std::sqrt(static_cast<double>(u_.rows()));
  return (u_.row(0).cwiseAbs().array() - target).abs().maxCoeff() <= tol;
}

MixingNetwork beam_splitter(double theta) {
  Eigen::MatrixXd u(2, 2);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  u << c, s, s, -c;
  return MixingNetwork(std::move(u));
}

MixingNetwork balanced_network(std::size_t n) {
  if (n < 2) {
    throw std::domain_error("balanced network needs at least two ports");
  }
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(n, n);
  // Splitter k folds input k into the running collection port 0; after step k
  // the collection row is uniform over inputs 0..k.
  for (std::size_t k = 1; k < n; ++k) {
    const double c = 1.0 / std::sqrt(static_cast<double>(k) + 1.0);
    const double s = std::sqrt(static_cast<double>(k) / (static_cast<double>(k) + 1.0));
    const Eigen::RowVectorXd collected = u.row(0);
    u.row(0) = s * collected + c * u.row(k);
    u.row(k) = c * collected - s * u.row(k);
  }
  return MixingNetwork(std::move(u));
}

QuadratureCovariance apply_to_covariance(const MixingNetwork& net,
                                         const QuadratureCovariance& sigma) {
  if (net.ports() != sigma.dim()) {
    throw std::invalid_argument("network has " + std::to_string(net.ports()) +
                                " ports but covariance has " + std::to_string(sigma.dim()) +
                                " channels");
  }
  return QuadratureCovariance(net.matrix() * sigma.matrix() * net.matrix().transpose());
}

SampleBatch apply_to_samples(const MixingNetwork& net, const SampleBatch& batch) {
  if (net.ports() != batch.channels()) {
    throw std::invalid_argument("network has " + std::to_string(net.ports()) +
                                " ports but batch has " + std::to_string(batch.channels()) +
                                " channels");
  }
  Eigen::MatrixXd mixed = batch.data() * net.matrix().transpose();
  std::vector<std::string> labels(batch.channels());
  for (Eigen::Index j = 0; j < batch.channels(); ++j) labels[j] = "port" + std::to_string(j);
  return SampleBatch(std::move(mixed), std::move(labels), batch.seed());
}

}  // namespace qavg
