#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qkdsec {

using BigInt = boost::multiprecision::cpp_int;

inline constexpr std::uint64_t kExactCombinatoricsLimit = 10000;

// log2 of a positive big integer from its leading 64 bits.
inline double log2_big(const BigInt& v) {
  if (v <= 0) throw std::domain_error("log2 of a nonpositive integer");
  const std::size_t msb = boost::multiprecision::msb(v);
  if (msb < 63) return std::log2(static_cast<double>(static_cast<std::uint64_t>(v)));
  const std::size_t shift = msb - 62;
  const auto top = static_cast<std::uint64_t>(v >> shift);
  return std::log2(static_cast<double>(top)) + static_cast<double>(shift);
}

inline BigInt binomial_exact(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c *= n - k + i;
    c /= i;
  }
  return c;
}

inline double log2_binomial_lgamma(double n, double k) {
  return (std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1)) / std::log(2.0);
}

inline BigInt factorial_exact(std::uint64_t n) {
  BigInt f = 1;
  for (std::uint64_t i = 2; i <= n; ++i) f *= i;
  return f;
}

// A count that is exact below the size limit and carried as log2 above it.
struct Count {
  std::optional<BigInt> exact;
  double log2;
};

inline Count binomial_count(std::uint64_t n, std::uint64_t k) {
  if (k > n) throw std::domain_error("binomial with k > n");
  if (n <= kExactCombinatoricsLimit) {
    auto c = binomial_exact(n, k);
    return {c, log2_big(c)};
  }
  return {std::nullopt, log2_binomial_lgamma(static_cast<double>(n), static_cast<double>(k))};
}

// Dimension of the symmetric subspace of (C^d)^{(x) n}: C(n + d - 1, n).
inline Count sym_dim(std::uint64_t d, std::uint64_t n) {
  if (d == 0) throw std::domain_error("dimension must be positive");
  return binomial_count(n + d - 1, n);
}

// n! / prod_x c_x! for occupation counts c_x summing to n.
inline Count type_class_size(const std::vector<std::uint64_t>& counts) {
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  if (n <= kExactCombinatoricsLimit) {
    BigInt v = factorial_exact(n);
    for (auto c : counts) v /= factorial_exact(c);
    return {v, log2_big(v)};
  }
  double l = std::lgamma(static_cast<double>(n) + 1);
  for (auto c : counts) l -= std::lgamma(static_cast<double>(c) + 1);
  return {std::nullopt, l / std::log(2.0)};
}

// Occupation counts n Q(x) of a type with denominator n; throws if Q is not such a type.
inline std::vector<std::uint64_t> type_counts(const std::vector<double>& q, std::uint64_t n) {
  std::vector<std::uint64_t> c;
  std::uint64_t total = 0;
  for (double v : q) {
    const double x = v * static_cast<double>(n);
    const double r = std::round(x);
    if (v < 0.0 || std::abs(x - r) > 1e-9 * std::max(1.0, x)) throw std::domain_error("Q is not a type with denominator n");
    c.push_back(static_cast<std::uint64_t>(r));
    total += c.back();
  }
  if (total != n) throw std::domain_error("type counts do not sum to n");
  return c;
}

struct SymmetricCounts {
  Count sym_dim;
  std::optional<Count> type_class;
  std::optional<Count> subsets;    // C(n, r)
  std::optional<double> log2_subset_bound;  // n h(r/n)
};

inline SymmetricCounts symmetric_counts(std::uint64_t d, std::uint64_t n, const std::vector<double>& q = {},
                                        std::optional<std::uint64_t> r = std::nullopt) {
  SymmetricCounts out{sym_dim(d, n), std::nullopt, std::nullopt, std::nullopt};
  if (!q.empty()) {
    if (q.size() != d) throw std::domain_error("type must have one entry per symbol");
    out.type_class = type_class_size(type_counts(q, n));
  }
  if (r) {
    if (*r > n) throw std::domain_error("r exceeds n");
    out.subsets = binomial_count(n, *r);
    const double p = n ? static_cast<double>(*r) / static_cast<double>(n) : 0.0;
    const double h = (p > 0.0 ? -p * std::log2(p) : 0.0) + (p < 1.0 ? -(1 - p) * std::log2(1 - p) : 0.0);
    out.log2_subset_bound = static_cast<double>(n) * h;
  }
  return out;
}

}  // namespace qkdsec
