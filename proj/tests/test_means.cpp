#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>
#include <vector>

#include "qavg/means.hpp"

using namespace qavg;

namespace {

// relative tolerance for the closed forms
constexpr double kTol = 1e-10;

bool close(double a, double b, double tol = kTol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::vector<double> random_variances(std::mt19937_64& gen, std::size_t max_len = 8) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_real_distribution<double> value(0.05, 20.0);
  std::vector<double> out(len(gen));
  for (auto& v : out) v = value(gen);
  return out;
}

}  // namespace

TEST_SUITE("means") {

TEST_CASE("variance set rejects invalid input") {
  CHECK_THROWS_AS(VarianceSet({}), std::domain_error);
  CHECK_THROWS_AS(VarianceSet({1.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS(VarianceSet({-0.3}), std::domain_error);
  CHECK_NOTHROW(VarianceSet({1e-12, 4.0}));
}

TEST_CASE("correlated pair requires strict positive definiteness") {
  CHECK_NOTHROW(CorrelatedPair(1.95, 3.72, 1.0));
  CHECK_NOTHROW(CorrelatedPair(1.0, 1.0, -0.999));
  // degenerate maximal correlation is rejected: conditioning needs strict PD
  CHECK_THROWS_AS(CorrelatedPair(2.0, 2.0, 2.0), std::domain_error);
  CHECK_THROWS_AS(CorrelatedPair(1.0, 4.0, -2.0), std::domain_error);
  CHECK_THROWS_AS(CorrelatedPair(0.0, 1.0, 0.0), std::domain_error);
}

TEST_CASE("power mean worked examples") {
  const VarianceSet supply({4.0, 0.25, 0.25, 0.25, 0.25});
  CHECK(close(power_mean(supply, 1), 1.0));
  CHECK(close(power_mean(supply, -1), 0.3076923076923077));
  const VarianceSet constant({0.7, 0.7, 0.7});
  for (int r : {-3, -1, 0, 1, 2, 5}) {
    CHECK(close(power_mean(constant, r), 0.7));
  }
}

TEST_CASE("arithmetic mean examples") {
  CHECK(close(arithmetic_mean(VarianceSet({0.64, 0.90})), 0.77));
  CHECK(close(arithmetic_mean(VarianceSet({0.62, 1.83})), 1.225));
  CHECK(close(arithmetic_mean(VarianceSet({4, 4, 0.25, 0.25, 0.25})), 1.75));
}

TEST_CASE("harmonic mean examples") {
  CHECK(close(harmonic_mean(VarianceSet({4, 4, 0.25, 0.25, 0.25})), 0.40));
  CHECK(close(harmonic_mean(VarianceSet({0.64, 0.90})), 0.7480519480519481));
  CHECK(close(harmonic_mean(VarianceSet({1.7})), 1.7));
}

TEST_CASE("correlated means") {
  CHECK(close(arithmetic_mean_correlated(CorrelatedPair(1.95, 3.72, 0.0)), 2.835));
  CHECK(close(arithmetic_mean_correlated(CorrelatedPair(1.95, 3.72, 1.0)), 1.835));
  CHECK(close(harmonic_mean_correlated(CorrelatedPair(1.95, 3.72, 0.0)), 2.558730158730159));
  CHECK(close(harmonic_mean_correlated(CorrelatedPair(1.95, 3.72, 1.0)), 1.630769230769231));
  // c = 0 reduces to the plain harmonic mean
  CHECK(close(harmonic_mean_correlated(CorrelatedPair(0.64, 0.90, 0.0)),
              harmonic_mean(VarianceSet({0.64, 0.90}))));
  CHECK(close(harmonic_mean_correlated(CorrelatedPair(1.3, 1.3, 0.0)), 1.3));
}

TEST_CASE("stabilization table reference points") {
  const auto one_broken = stabilization_table(5, 1, 0.25, 4.0);
  CHECK(close(one_broken.arithmetic, 1.0));
  CHECK(close(one_broken.harmonic, 0.3076923076923077));
  const auto two_broken = stabilization_table(5, 2, 0.25, 4.0);
  CHECK(close(two_broken.arithmetic, 1.75));
  CHECK(close(two_broken.harmonic, 0.40));
  const auto none_broken = stabilization_table(7, 0, 0.33, -1.0);  // broken variance unused
  CHECK(close(none_broken.arithmetic, 0.33));
  CHECK(close(none_broken.harmonic, 0.33));
  CHECK_THROWS_AS(stabilization_table(3, 4, 0.25, 4.0), std::domain_error);
  CHECK_THROWS_AS(stabilization_table(0, 0, 0.25, 4.0), std::domain_error);
  CHECK_THROWS_AS(stabilization_table(3, 1, 0.25, -4.0), std::domain_error);
}

TEST_CASE("power mean inequality and monotonicity in r") {
  std::mt19937_64 gen(20260809);
  for (int trial = 0; trial < 1000; ++trial) {
    const VarianceSet x(random_variances(gen));
    const double h = harmonic_mean(x);
    const double g = geometric_mean(x);
    const double a = arithmetic_mean(x);
    CHECK(h <= g * (1.0 + 1e-12));
    CHECK(g <= a * (1.0 + 1e-12));
    double previous = power_mean(x, -4);
    for (int r = -3; r <= 4; ++r) {
      const double current = power_mean(x, r);
      CHECK(previous <= current * (1.0 + 1e-12));
      previous = current;
    }
  }
}

TEST_CASE("scale equivariance") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto values = random_variances(gen);
    const VarianceSet x(values);
    for (auto& v : values) v *= 4.0;  // power of two: exact in floating point
    const VarianceSet scaled(values);
    for (int r : {-2, -1, 0, 1, 2}) {
      CHECK(close(power_mean(scaled, r), 4.0 * power_mean(x, r), 1e-12));
    }
  }
}

TEST_CASE("correlation reduces both means") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> value(0.2, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double v1 = value(gen);
    const double v2 = value(gen);
    const double c = 0.8 * std::sqrt(v1 * v2) * std::uniform_real_distribution<double>(0.01, 1.0)(gen);
    const CorrelatedPair pair(v1, v2, c);
    CHECK(arithmetic_mean_correlated(pair) < arithmetic_mean(VarianceSet({v1, v2})));
    const double hc = harmonic_mean_correlated(pair);
    const double h = harmonic_mean(VarianceSet({v1, v2}));
    // V_H - V_Hc = 2C (2 v1 v2 + C (v1 + v2)) / ((v1+v2)(v1+v2+2C)) > 0 for C > 0
    CHECK(hc < h);
  }
  // equality holds exactly at C = 0
  CHECK(close(harmonic_mean_correlated(CorrelatedPair(1.4, 1.4, 0.0)), 1.4));
}

}  // TEST_SUITE
