#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "qavg/estimator.hpp"
#include "qavg/rng.hpp"
#include "oracles.hpp"

using namespace qavg;

namespace {

std::vector<double> gaussian_draws(std::uint64_t seed, std::size_t n, double sd = 1.0) {
  RandomStream stream(seed);
  std::vector<double> out(n);
  for (auto& x : out) x = sd * stream.normal();
  return out;
}

// Wilson bound by bisection on the score statistic, independent of the
// closed-form quadratic.
double wilson_bound_by_bisection(std::size_t kept, std::size_t total, bool upper) {
  const double z = 1.959963984540054;
  const double p_hat = double(kept) / double(total);
  const auto score = [&](double p) {
    return (p_hat - p) / std::sqrt(p * (1.0 - p) / double(total));
  };
  double lo = upper ? p_hat : 1e-15;
  double hi = upper ? 1.0 - 1e-15 : p_hat;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double s = score(mid);
    if (upper ? (s > -z) : (s < z)) {
      (upper ? lo : hi) = mid;
    } else {
      (upper ? hi : lo) = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("variance estimate basics") {
  CHECK_THROWS_AS(estimate_variance(std::vector<double>{1.0}), std::domain_error);
  const std::vector<double> constant(100, 2.5);
  const auto est = estimate_variance(constant);
  CHECK(est.value == 0.0);
  CHECK(est.standard_error == 0.0);
  CHECK(est.n_effective == 100);
}

TEST_CASE("gaussian stderr formula matches bootstrap width") {
  const auto xs = gaussian_draws(11, 60000);
  const auto est = estimate_variance(xs);
  CHECK(std::abs(est.value - 1.0) < 4.0 * est.standard_error);
  CHECK(est.standard_error == doctest::Approx(est.value * std::sqrt(2.0 / 59999.0)));
  // stated example: stderr ~ 0.0058 at N = 6e4, V = 1
  CHECK(est.standard_error == doctest::Approx(0.00577).epsilon(0.05));

  const auto ci = bootstrap_variance_ci(xs, 300, 5);
  const double bootstrap_half = 0.5 * (ci.hi - ci.lo);
  const double gaussian_half = 1.959963984540054 * est.standard_error;
  CHECK(std::abs(bootstrap_half - gaussian_half) < 0.2 * gaussian_half);
}

TEST_CASE("variance estimate permutation and scale behaviour") {
  auto xs = gaussian_draws(3, 5000, 1.3);
  const auto baseline = estimate_variance(xs);

  auto shuffled = xs;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(17));
  const auto permuted = estimate_variance(shuffled);
  CHECK(permuted.value == doctest::Approx(baseline.value).epsilon(1e-13));

  auto scaled = xs;
  for (auto& x : scaled) x *= 4.0;  // power of two scales exactly
  const auto scaled_est = estimate_variance(scaled);
  CHECK(scaled_est.value == 16.0 * baseline.value);
}

TEST_CASE("wilson interval") {
  CHECK_THROWS_AS(estimate_success(1, 0), std::domain_error);
  CHECK_THROWS_AS(estimate_success(5, 4), std::domain_error);

  const auto none = estimate_success(0, 1000);
  CHECK(none.p == 0.0);
  CHECK(none.ci_lo == 0.0);
  CHECK(none.ci_hi > 0.0);
  const auto all = estimate_success(1000, 1000);
  CHECK(all.p == 1.0);
  CHECK(all.ci_hi == 1.0);
  CHECK(all.ci_lo < 1.0);

  const auto tenth = estimate_success(6000, 60000);
  CHECK(tenth.p == doctest::Approx(0.10));
  CHECK(tenth.ci_lo == doctest::Approx(wilson_bound_by_bisection(6000, 60000, false)).epsilon(1e-8));
  CHECK(tenth.ci_hi == doctest::Approx(wilson_bound_by_bisection(6000, 60000, true)).epsilon(1e-8));

  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t total = 1 + gen() % 1000;
    const std::size_t kept = gen() % (total + 1);
    const auto s = estimate_success(kept, total);
    CHECK(s.ci_lo >= 0.0);
    CHECK(s.ci_hi <= 1.0);
    CHECK(s.ci_lo <= s.p);
    CHECK(s.p <= s.ci_hi);
  }
}

TEST_CASE("bootstrap preconditions and degenerate input") {
  const std::vector<double> tiny(5, 1.0);
  CHECK_THROWS_AS(bootstrap_variance_ci(tiny, 200, 1), std::domain_error);
  const std::vector<double> xs(50, 1.0);
  CHECK_THROWS_AS(bootstrap_variance_ci(xs, 50, 1), std::domain_error);
  const auto ci = bootstrap_variance_ci(xs, 200, 1);
  CHECK(ci.lo == 0.0);
  CHECK(ci.hi == 0.0);
}

TEST_CASE("bootstrap determinism") {
  const auto xs = gaussian_draws(21, 500);
  const auto a = bootstrap_variance_ci(xs, 150, 9);
  const auto b = bootstrap_variance_ci(xs, 150, 9);
  CHECK(a.lo == b.lo);
  CHECK(a.hi == b.hi);
  const auto c = bootstrap_variance_ci(xs, 150, 10);
  CHECK(a.lo != c.lo);
}

TEST_CASE("bootstrap coverage over seeded trials") {
  int covered = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    const auto xs = gaussian_draws(1000 + trial, 10000);
    const auto ci = bootstrap_variance_ci(xs, 200, 77 + trial);
    if (ci.lo <= 1.0 && 1.0 <= ci.hi) ++covered;
  }
  CHECK(covered >= 0.93 * trials);
}

TEST_CASE("bootstrap width shrinks like 1/sqrt(N)") {
  double widths[3];
  const std::size_t sizes[3] = {1000, 10000, 100000};
  for (int i = 0; i < 3; ++i) {
    const auto xs = gaussian_draws(40 + i, sizes[i]);
    const auto ci = bootstrap_variance_ci(xs, 200, 4);
    widths[i] = ci.hi - ci.lo;
  }
  // slope of log width vs log N should be about -1/2
  const double slope =
      std::log(widths[2] / widths[0]) / std::log(double(sizes[2]) / double(sizes[0]));
  CHECK(slope == doctest::Approx(-0.5).epsilon(0.25));
  CHECK(widths[0] > widths[1]);
  CHECK(widths[1] > widths[2]);
}

}  // TEST_SUITE
