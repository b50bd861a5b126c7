#include "qavg/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qavg/errors.hpp"
#include "qavg/rng.hpp"

namespace qavg {

namespace {

std::vector<Eigen::Index> all_but_port0(Eigen::Index n_channels) {
  std::vector<Eigen::Index> triggers(static_cast<std::size_t>(n_channels - 1));
  for (Eigen::Index j = 1; j < n_channels; ++j) triggers[j - 1] = j;
  return triggers;
}

ProtocolOutcome estimate_outcome(Protocol tag, std::span<const double> kept_samples,
                                 std::size_t total) {
  ProtocolOutcome out;
  out.protocol = tag;
  out.variance = estimate_variance(kept_samples);
  out.success = estimate_success(kept_samples.size(), total);
  out.kept_count = kept_samples.size();
  out.total_count = total;
  return out;
}

}  // namespace

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::arithmetic_pick: return "arithmetic-pick";
    case Protocol::arithmetic_interference: return "arithmetic-interference";
    case Protocol::harmonic_heralded: return "harmonic-heralded";
    case Protocol::harmonic_feedforward: return "harmonic-feedforward";
  }
  throw std::invalid_argument("unknown protocol tag");
}

Protocol protocol_from_string(std::string_view name) {
  if (name == "arithmetic-pick") return Protocol::arithmetic_pick;
  if (name == "arithmetic-interference") return Protocol::arithmetic_interference;
  if (name == "harmonic-heralded") return Protocol::harmonic_heralded;
  if (name == "harmonic-feedforward") return Protocol::harmonic_feedforward;
  throw std::invalid_argument("unknown protocol '" + std::string(name) + "'");
}

PostSelectionRule::PostSelectionRule(std::vector<Eigen::Index> triggers, TruncationWindow w)
    : trigger_channels(std::move(triggers)), window(w) {
  if (trigger_channels.empty()) {
    throw std::invalid_argument("post-selection rule needs at least one trigger channel");
  }
  auto sorted = trigger_channels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("trigger channels must be unique");
  }
  if (sorted.front() < 1) {
    throw std::invalid_argument("trigger channels must exclude the kept channel 0");
  }
}

PostSelectionRule PostSelectionRule::all_triggers(Eigen::Index n_channels, TruncationWindow w) {
  if (n_channels < 2) {
    throw std::invalid_argument("post-selection needs at least two channels");
  }
  return PostSelectionRule(all_but_port0(n_channels), w);
}

MixingNetwork protocol_network(std::size_t n) {
  MixingNetwork net = balanced_network(n);
  if (n != 2) {
    return net;
  }
  // Pair convention: the kept port 0 is the destructive (x1 - x2)/sqrt(2)
  // output whose variance is (V1 + V2)/2 - C; the constructive port triggers.
  Eigen::MatrixXd u = net.matrix();
  u.row(0).swap(u.row(1));
  return MixingNetwork(std::move(u));
}

SampleBatch sample_mixed(const QuadratureCovariance& sigma, std::size_t n_samples,
                         std::uint64_t seed) {
  if (sigma.dim() < 2) {
    throw std::domain_error("interference needs at least two resources");
  }
  const MixingNetwork net = protocol_network(static_cast<std::size_t>(sigma.dim()));
  return apply_to_samples(net, sample_gaussian(sigma, n_samples, seed));
}

double threshold_for_kept_fraction(const SampleBatch& mixed,
                                   const std::vector<Eigen::Index>& triggers,
                                   double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::domain_error("kept fraction must lie in (0, 1]");
  }
  if (triggers.empty()) {
    throw std::invalid_argument("threshold search needs at least one trigger channel");
  }
  const Eigen::Index n = mixed.samples();
  std::vector<double> max_abs(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index j : triggers) {
    const auto col = mixed.channel(j);
    for (Eigen::Index i = 0; i < n; ++i) {
      max_abs[i] = std::max(max_abs[i], std::abs(col[i]));
    }
  }
  const auto target = std::min<std::size_t>(
      max_abs.size(),
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::ceil(fraction * static_cast<double>(n)))));
  std::nth_element(max_abs.begin(), max_abs.begin() + (target - 1), max_abs.end());
  return max_abs[target - 1];
}

ProtocolOutcome run_arithmetic_pick(const std::vector<SampleBatch>& batches,
                                    std::uint64_t seed) {
  if (batches.empty()) {
    throw std::invalid_argument("random pick needs at least one resource batch");
  }
  const Eigen::Index n = batches.front().samples();
  for (const auto& b : batches) {
    if (b.channels() != 1) {
      throw std::invalid_argument("resource batches must be single-channel");
    }
    if (b.samples() != n) {
      throw std::invalid_argument("resource batches must have equal length");
    }
  }
  // selection stream is independent of the batches' own generation seeds
  RandomStream selector(derive_seed(seed, 0));
  const auto k = static_cast<double>(batches.size());
  std::vector<double> picked(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto choice = std::min(batches.size() - 1,
                                 static_cast<std::size_t>(selector.uniform01() * k));
    picked[static_cast<std::size_t>(i)] = batches[choice].data()(i, 0);
  }
  return estimate_outcome(Protocol::arithmetic_pick, picked, static_cast<std::size_t>(n));
}

ProtocolOutcome herald_samples(const SampleBatch& mixed, const PostSelectionRule& rule) {
  for (Eigen::Index j : rule.trigger_channels) {
    if (j >= mixed.channels()) {
      throw std::invalid_argument("trigger channel " + std::to_string(j) +
                                  " outside the batch");
    }
  }
  const Eigen::Index n = mixed.samples();
  const auto& data = mixed.data();
  std::vector<double> kept;
  kept.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    bool accepted = true;
    for (Eigen::Index j : rule.trigger_channels) {
      if (!rule.window.accepts(data(i, j))) {
        accepted = false;
        break;
      }
    }
    if (accepted) kept.push_back(data(i, 0));
  }
  if (kept.size() < 2) {
    throw StarvedSelectionError(kept.size(), static_cast<std::size_t>(n));
  }
  return estimate_outcome(Protocol::harmonic_heralded, kept, static_cast<std::size_t>(n));
}

ProtocolOutcome run_arithmetic_interference(const QuadratureCovariance& sigma,
                                            std::size_t n_samples, std::uint64_t seed) {
  const SampleBatch mixed = sample_mixed(sigma, n_samples, seed);
  // open window: identical kept set and estimate as the heralded engine
  ProtocolOutcome out = herald_samples(
      mixed, PostSelectionRule::all_triggers(mixed.channels(), TruncationWindow::open()));
  out.protocol = Protocol::arithmetic_interference;
  const auto image =
      apply_to_covariance(protocol_network(static_cast<std::size_t>(sigma.dim())), sigma);
  out.analytic_prediction = image.variance(0);
  return out;
}

ProtocolOutcome run_harmonic_heralded(const QuadratureCovariance& sigma,
                                      std::size_t n_samples,
                                      const PostSelectionRule& rule,
                                      std::uint64_t seed) {
  const SampleBatch mixed = sample_mixed(sigma, n_samples, seed);
  ProtocolOutcome out = herald_samples(mixed, rule);
  const auto image =
      apply_to_covariance(protocol_network(static_cast<std::size_t>(sigma.dim())), sigma);
  if (rule.trigger_channels.size() == 1) {
    const Eigen::Index trig = rule.trigger_channels.front();
    Eigen::MatrixXd block(2, 2);
    block << image.matrix()(0, 0), image.matrix()(0, trig),
             image.matrix()(trig, 0), image.matrix()(trig, trig);
    out.analytic_prediction =
        finite_window_conditional_variance(QuadratureCovariance(std::move(block)), rule.window);
  } else if (rule.window.is_open()) {
    out.analytic_prediction = image.variance(0);
  }
  // multi-trigger finite windows have no closed form; leave unannotated
  return out;
}

ProtocolOutcome run_harmonic_feedforward(const QuadratureCovariance& sigma,
                                         std::size_t n_samples, std::uint64_t seed) {
  const SampleBatch mixed = sample_mixed(sigma, n_samples, seed);
  const auto image =
      apply_to_covariance(protocol_network(static_cast<std::size_t>(sigma.dim())), sigma);
  const auto clamp = all_but_port0(mixed.channels());
  const Eigen::RowVectorXd gain = feedforward_gain(image, 0, clamp);
  const Eigen::Index n = mixed.samples();
  const auto& data = mixed.data();
  std::vector<double> displaced(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double correction = 0.0;
    for (Eigen::Index j = 1; j < mixed.channels(); ++j) {
      correction += gain(j - 1) * data(i, j);
    }
    displaced[static_cast<std::size_t>(i)] = data(i, 0) - correction;
  }
  ProtocolOutcome out =
      estimate_outcome(Protocol::harmonic_feedforward, displaced, static_cast<std::size_t>(n));
  out.analytic_prediction = conditional_covariance(image, {0}, clamp).variance(0);
  return out;
}

}  // namespace qavg
