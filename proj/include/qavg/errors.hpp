#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qavg {

// Post-selection left too few survivors to estimate anything. Carries the
// empirical success probability (kept/total) for diagnostics.
class StarvedSelectionError : public std::runtime_error {
 public:
  StarvedSelectionError(std::size_t kept, std::size_t total)
      : std::runtime_error("post-selection starved: kept " + std::to_string(kept) +
                           " of " + std::to_string(total) + " samples"),
        kept_(kept),
        total_(total) {}

  std::size_t kept() const noexcept { return kept_; }
  std::size_t total() const noexcept { return total_; }
  double success_probability() const noexcept {
    return total_ == 0 ? 0.0 : static_cast<double>(kept_) / static_cast<double>(total_);
  }

 private:
  std::size_t kept_;
  std::size_t total_;
};

// Requested configuration has no closed form or implemented path, e.g.
// finite-window theory with more than one trigger channel.
class UnsupportedConfigurationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Failure to create or write an output file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qavg
