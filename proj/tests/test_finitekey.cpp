#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "test_support.hpp"

using namespace qkdsec;
using namespace qkdsec::testing;

TEST(Schedule, SplitsExactly) {
  for (std::uint64_t N : {1000000ULL, 123456789ULL, 10000000000ULL}) {
    for (std::uint64_t b : {1ULL, 3ULL}) {
      const auto p = FiniteKeyParams::schedule(N, b, 1e-9);
      EXPECT_EQ(p.b * p.n + p.m + p.k, N);
      EXPECT_NEAR(static_cast<double>(p.m), std::pow(static_cast<double>(N), 2.0 / 3.0), 1.0);
      EXPECT_GE(p.k, p.m);
      EXPECT_LT(p.k, p.m + b);
    }
  }
  EXPECT_THROW(FiniteKeyParams::schedule(10, 1, 1e-9), std::domain_error);
  const auto q = FiniteKeyParams::with_mk(1000, 2, 1e-3, 100, 51);
  EXPECT_EQ(q.b * q.n + q.m + q.k, 1000u);
  EXPECT_EQ(q.k, 52u);
}

TEST(SecurityDeltas, FormulaOracle) {
  auto p = FiniteKeyParams::schedule(1000000000000ULL, 1, 1e-9);
  const auto s = security_deltas(p);
  ASSERT_TRUE(s.valid);
  const double N = 1e12, n = static_cast<double>(p.n), m = static_cast<double>(p.m), k = static_cast<double>(p.k);
  const double r = N / k * (2 * std::log2(9e9) + 16 * std::log(k));
  EXPECT_NEAR(s.r, r, 1e-9 * r);
  const double dp = (2.5 + 4) * std::sqrt(binary_entropy(r / n) + 2 / n * std::log2(18e9));
  EXPECT_NEAR(s.delta_prime, dp, 1e-12);
  const double mu = 2 * std::sqrt(binary_entropy(r / m) + (std::log2(4.5e9) + 4 * std::log2(m / 2 + 1)) / m);
  EXPECT_NEAR(s.mu, mu, 1e-12);
  EXPECT_NEAR(s.delta, dp + 2 * (m + k) / n * 2 + 2 / n * std::log2(1.5e9), 1e-12);
  EXPECT_NEAR(s.delta, 0.0553631, 1e-6);
}

TEST(SecurityDeltas, DecreasingAlongSchedule) {
  double prev = INFINITY;
  for (double e10 = 8.5; e10 <= 14; e10 += 0.5) {
    const auto s = security_deltas(FiniteKeyParams::schedule(static_cast<std::uint64_t>(std::pow(10.0, e10)), 1, 1e-9));
    ASSERT_TRUE(s.valid) << e10;
    EXPECT_LT(s.delta, prev);
    prev = s.delta;
  }
}

TEST(SecurityDeltas, InvalidDomains) {
  // The schedule first becomes valid between 10^8 and 10^8.5.
  EXPECT_FALSE(security_deltas(FiniteKeyParams::schedule(100000000, 1, 1e-9)).valid);
  const auto small = security_deltas(FiniteKeyParams::schedule(1000000, 1, 1e-9));
  EXPECT_FALSE(small.valid);
  EXPECT_FALSE(small.reason.empty());
  // Shrinking k makes r blow up.
  const auto tiny_k = security_deltas(FiniteKeyParams::with_mk(1000000000000ULL, 1, 1e-9, 100000000, 10));
  EXPECT_FALSE(tiny_k.valid);
  EXPECT_GT(tiny_k.r, 1e11);
  EXPECT_FALSE(security_deltas(FiniteKeyParams::with_mk(1000, 1, 1e-9, 10, 1)).valid);
}

TEST(SecurityDeltas, MonotoneInEpsilon) {
  auto p = FiniteKeyParams::schedule(10000000000000ULL, 1, 1e-6);
  const auto loose = security_deltas(p);
  p.eps = 1e-12;
  const auto tight = security_deltas(p);
  EXPECT_GT(tight.delta_prime, loose.delta_prime);
  EXPECT_GT(tight.delta, loose.delta);
}

TEST(FiniteKeyLength, Behaviour) {
  const auto p = FiniteKeyParams::schedule(1000000000000ULL, 1, 1e-9);
  const auto s = security_deltas(p);
  EXPECT_EQ(finite_key_length(p, s.delta, 0.0), 0u);
  EXPECT_EQ(finite_key_length(p, s.delta * 0.5, 0.0), 0u);
  const double h = 0.4;
  const auto l = finite_key_length(p, h, 1000.0);
  EXPECT_LE(static_cast<double>(l), static_cast<double>(p.n) * h);
  EXPECT_NEAR(static_cast<double>(l), std::floor(p.n * (h - s.delta) - 1000.0), 1.0);
  EXPECT_THROW(finite_key_length(FiniteKeyParams::schedule(1000000, 1, 1e-9), 0.5, 0.0), std::domain_error);
}

TEST(FiniteKeyLength, SixStatePositiveAtTenToTen) {
  const double h = rate({Protocol::six_state, 0.05, 1, 0.0}).rate;
  const auto p = FiniteKeyParams::schedule(10000000000ULL, 1, 1e-9);
  EXPECT_GT(finite_key_length(p, h, 0.0), 0u);
}

TEST(FiniteKeyLength, ApproachesAsymptoticRateUpToDelta) {
  const double h = rate({Protocol::six_state, 0.05, 1, 0.0}).rate;
  double prev_gap = INFINITY;
  for (double e10 : {9.0, 11.0, 13.0, 15.0}) {
    const auto N = static_cast<std::uint64_t>(std::pow(10.0, e10));
    const auto p = FiniteKeyParams::schedule(N, 1, 1e-9);
    const double per_n = static_cast<double>(finite_key_length(p, h, 0.0)) / static_cast<double>(N);
    const double gap = h - per_n;
    EXPECT_GT(gap, 0.0);
    EXPECT_LT(gap, prev_gap);
    const double n_over_N = static_cast<double>(p.n) / static_cast<double>(N);
    EXPECT_NEAR(gap, h - n_over_N * (h - security_deltas(p).delta), 1e-6);
    prev_gap = gap;
  }
}

TEST(DeFinetti, Examples) {
  const auto v = definetti_error(1e4, 1e6, 1e3, 4);
  const double expected = std::log(2.0) - 1e6 * 1001.0 / (2.0 * 1.01e6) + 2.0 * std::log(1e6);
  EXPECT_NEAR(v.ln, expected, 1e-9);
  EXPECT_NEAR(v.ln, -467.2, 0.1);
  double prev = INFINITY;
  for (double r = 0; r <= 1e4; r += 1e3) {
    const double ln = definetti_error(1e4, 1e6, r, 4).ln;
    EXPECT_LT(ln, prev);
    prev = ln;
  }
  EXPECT_LT(definetti_error(100, 1e5, 100, 4).ln, 0.0);
  EXPECT_THROW(definetti_error(10, 1, 1, 4), std::domain_error);
  EXPECT_NEAR(definetti_weight_bound(1e6, 0.01, 4).ln, -25.0 + 4 * std::log(1e6), 1e-9);
}

TEST(LogSpace, AgreesWithLinearWhereRepresentable) {
  for (double r : {0.0, 10.0, 50.0}) {
    const auto v = definetti_error(100, 200, r, 4);
    const double lin = 2.0 * std::exp(-200.0 * (r + 1) / (2.0 * 300.0) + 2.0 * std::log(200.0));
    EXPECT_NEAR(v.value(), lin, 1e-9 * lin);
  }
}

TEST(AepDelta, Examples) {
  EXPECT_NEAR(aep_delta(1e4, 2, 1e-3), 0.10366, 1e-5);
  EXPECT_NEAR(aep_delta(4e4, 2, 1e-3), aep_delta(1e4, 2, 1e-3) / 2, 1e-15);
  EXPECT_THROW(aep_delta(0.5, 2, 1e-3), std::domain_error);
  EXPECT_NEAR(aep_chernoff_log2(1e4, 2, 0.10366), -1e4 * 0.10366 * 0.10366 / (2 * std::pow(std::log2(5.0), 2)), 1e-9);
}

TEST(AepDelta, MonteCarloBscTail) {
  // Fraction of x^n whose -log P(x|y)/n leaves h(0.1) +- delta, against eps.
  const std::size_t n = 10000, trials = 10000;
  const double e = 0.1, eps = 1e-3;
  const double delta = aep_delta(static_cast<double>(n), 2, eps), h = binary_entropy(e);
  CounterRng rng(1);
  std::size_t outside = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t w = 0;
    for (std::size_t i = 0; i < n; ++i) w += rng.bernoulli(e);
    const double s = -(w * std::log2(e) + (n - w) * std::log2(1 - e)) / n;
    outside += std::abs(s - h) > delta;
  }
  EXPECT_LT(static_cast<double>(outside), eps * trials);
  EXPECT_LE(std::exp2(aep_chernoff_log2(n, 2, delta)), eps * (1 + 1e-12));
}

TEST(QuantumAepDelta, EvaluatedAsWritten) {
  EXPECT_NEAR(quantum_aep_delta(1e6, 1, 1e-6), 5.0 * std::sqrt(std::log2(1e6) / 1e6 + 1), 1e-12);
  EXPECT_NEAR(quantum_aep_delta(1e6, 1, 1e-6), 5.0, 1e-3);
  EXPECT_NEAR(quantum_aep_delta(1e6, 2, 1e-6) - quantum_aep_delta(1e6, 1, 1e-6),
              quantum_aep_delta(1e6, 3, 1e-6) - quantum_aep_delta(1e6, 2, 1e-6), 1e-12);
  double prev = INFINITY;
  for (double n = 1; n <= 1e9; n *= 10) {
    const double d = quantum_aep_delta(n, 1, 1e-6);
    EXPECT_LT(d, prev);
    EXPECT_GT(d, 5.0);
    prev = d;
  }
}

TEST(Typicality, Examples) {
  EXPECT_TRUE(typicality_bound(100, 2, 0.0).vacuous);
  const auto t = typicality_bound(1e4, 2, 0.1);
  EXPECT_FALSE(t.vacuous);
  EXPECT_NEAR(t.log2_value, -1e4 * (0.01 / (2 * std::log(2.0)) - 2 * std::log2(10001.0) / 1e4), 1e-9);
  EXPECT_NEAR(t.log2_value, -45.56, 0.05);
}

TEST(Typicality, MonteCarloUniformBits) {
  const std::size_t n = 10000, trials = 100000;
  CounterRng rng(2);
  std::size_t exceed = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < n / 64; ++i) ones += std::popcount(rng());
    ones += std::popcount(rng() & ((std::uint64_t{1} << (n % 64)) - 1));
    const double f = static_cast<double>(ones) / n;
    exceed += 2.0 * std::abs(f - 0.5) > 0.1;
  }
  EXPECT_LE(static_cast<double>(exceed) / trials, std::exp2(typicality_bound(n, 2, 0.1).log2_value));
}

TEST(Combinatorics, Examples) {
  const auto c = symmetric_counts(2, 3);
  ASSERT_TRUE(c.sym_dim.exact);
  EXPECT_EQ(*c.sym_dim.exact, 4);
  const auto t = symmetric_counts(2, 4, {0.5, 0.5});
  EXPECT_EQ(*t.type_class->exact, 6);
  EXPECT_THROW(symmetric_counts(2, 4, {0.3, 0.7}), std::domain_error);
  EXPECT_THROW(symmetric_counts(3, 4, {0.5, 0.5}), std::domain_error);
  EXPECT_EQ(*sym_dim(4, 10).exact, 286);
}

TEST(Combinatorics, BinomialBelowEntropyBound) {
  for (std::uint64_t n = 1; n <= 64; ++n)
    for (std::uint64_t r = 0; r <= n; ++r) {
      const auto c = symmetric_counts(2, n, {}, r);
      EXPECT_LE(c.subsets->log2, *c.log2_subset_bound + 1e-9) << n << " " << r;
    }
}

TEST(Combinatorics, ExactMatchesLgammaAtBoundary) {
  for (std::uint64_t k : {1ULL, 17ULL, 500ULL, 5000ULL}) {
    const auto exact = binomial_count(10000, k);
    ASSERT_TRUE(exact.exact);
    const double lg = log2_binomial_lgamma(10000, static_cast<double>(k));
    EXPECT_NEAR(exact.log2, lg, 1e-9 * std::max(1.0, lg));
  }
  EXPECT_FALSE(binomial_count(10001, 5000).exact);
  const auto tc = type_class_size({5000, 3000, 2000});
  ASSERT_TRUE(tc.exact);
  double lg = std::lgamma(10001.0) - std::lgamma(5001.0) - std::lgamma(3001.0) - std::lgamma(2001.0);
  EXPECT_NEAR(tc.log2, lg / std::log(2.0), 1e-9 * tc.log2);
  EXPECT_EQ(factorial_exact(20), BigInt("2432902008176640000"));
}

TEST(BoundReport, Fields) {
  const auto j = bound_report(FiniteKeyParams::schedule(1000000000000ULL, 1, 1e-9));
  EXPECT_TRUE(j["valid"].get<bool>());
  EXPECT_NEAR(j["delta"].get<double>(), 0.0553631, 1e-6);
  EXPECT_LT(j["definetti_error_log2"].get<double>(), 0.0);
  const auto bad = bound_report(FiniteKeyParams::schedule(1000000, 1, 1e-9));
  EXPECT_FALSE(bad["valid"].get<bool>());
  EXPECT_TRUE(bad.contains("reason"));
}
