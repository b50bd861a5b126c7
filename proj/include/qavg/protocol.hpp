#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "qavg/estimator.hpp"
#include "qavg/gaussian.hpp"
#include "qavg/network.hpp"

namespace qavg {

enum class Protocol {
  arithmetic_pick,
  arithmetic_interference,
  harmonic_heralded,
  harmonic_feedforward,
};

std::string_view to_string(Protocol p);
Protocol protocol_from_string(std::string_view name);

/// Keep a sample iff every trigger channel outcome lies inside the window.
/// The kept channel is port 0 and never appears among the triggers.
struct PostSelectionRule {
  std::vector<Eigen::Index> trigger_channels;
  TruncationWindow window;

  PostSelectionRule(std::vector<Eigen::Index> triggers, TruncationWindow w);
  /// Triggers on every channel except port 0.
  static PostSelectionRule all_triggers(Eigen::Index n_channels, TruncationWindow w);
};

struct ProtocolOutcome {
  Protocol protocol = Protocol::arithmetic_interference;
  VarianceEstimate variance;
  SuccessEstimate success;
  std::size_t kept_count = 0;
  std::size_t total_count = 0;
  std::optional<double> analytic_prediction;
};

/// Interference network used by the protocol engines. Port 0 is the kept
/// port and ports 1..n-1 are measured triggers; for n = 2 the kept port is
/// the destructive (x1 - x2)/sqrt(2) output, so correlated noise reduces it.
MixingNetwork protocol_network(std::size_t n);

/// Resource samples drawn from sigma and mixed through protocol_network.
SampleBatch sample_mixed(const QuadratureCovariance& sigma, std::size_t n_samples,
                         std::uint64_t seed);

/// Threshold equal to the smallest max-|trigger| order statistic that keeps
/// at least ceil(fraction * N) samples of the batch. Empirical counterpart of
/// the analytic inversion for multi-trigger windows.
double threshold_for_kept_fraction(const SampleBatch& mixed,
                                   const std::vector<Eigen::Index>& triggers,
                                   double fraction);

/// Uniform per-sample selection across the resource batches. Selections come
/// from a dedicated stream of the given seed, independent of the batches'
/// own generation.
ProtocolOutcome run_arithmetic_pick(const std::vector<SampleBatch>& batches,
                                    std::uint64_t seed);

/// Mixes through the balanced network and keeps port 0 unconditionally.
ProtocolOutcome run_arithmetic_interference(const QuadratureCovariance& sigma,
                                            std::size_t n_samples,
                                            std::uint64_t seed);

/// Universal heralded engine: consumes measured outcomes and the rule only.
/// Throws StarvedSelectionError when fewer than two samples survive.
ProtocolOutcome herald_samples(const SampleBatch& mixed, const PostSelectionRule& rule);

/// sample -> mix -> herald; annotates the single-trigger finite-window
/// analytic prediction (or the port-0 variance for an open window).
ProtocolOutcome run_harmonic_heralded(const QuadratureCovariance& sigma,
                                      std::size_t n_samples,
                                      const PostSelectionRule& rule,
                                      std::uint64_t seed);

/// Deterministic variant: displaces port 0 by -g.b with the Gauss-Markov
/// gain; success probability is exactly 1.
ProtocolOutcome run_harmonic_feedforward(const QuadratureCovariance& sigma,
                                         std::size_t n_samples,
                                         std::uint64_t seed);

}  // namespace qavg
