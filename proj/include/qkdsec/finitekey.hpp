#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "entropy.hpp"

namespace qkdsec {

struct FiniteKeyParams {
  std::uint64_t N = 0, n = 0, m = 0, k = 0, b = 1;
  double eps = 1e-9;
  std::uint64_t dim_a = 2, dim_b = 2;
  std::uint64_t alphabet = 2;  // |X|
  std::uint64_t outcomes = 4;  // |W|

  // m = k = ceil(N^(2/3)), n = floor((N - m - k) / b); the remainder is added to k.
  static FiniteKeyParams schedule(std::uint64_t N, std::uint64_t b, double eps) {
    if (b == 0) throw std::invalid_argument("block length must be positive");
    auto mk = static_cast<std::uint64_t>(std::ceil(std::pow(static_cast<long double>(N), 2.0L / 3.0L) - 1e-9L));
    if (N < 2 * mk + b) throw std::domain_error("N too small for the N^(2/3) schedule");
    FiniteKeyParams p;
    p.N = N;
    p.b = b;
    p.m = mk;
    p.n = (N - 2 * mk) / b;
    p.k = N - b * p.n - mk;
    p.eps = eps;
    return p;
  }

  static FiniteKeyParams with_mk(std::uint64_t N, std::uint64_t b, double eps, std::uint64_t m, std::uint64_t k) {
    if (b == 0) throw std::invalid_argument("block length must be positive");
    if (m + k >= N) throw std::domain_error("m + k must be smaller than N");
    FiniteKeyParams p;
    p.N = N;
    p.b = b;
    p.m = m;
    p.n = (N - m - k) / b;
    p.k = N - b * p.n - m;
    p.eps = eps;
    return p;
  }

  void validate() const {
    if (b * n + m + k != N) throw std::domain_error("N must equal b n + m + k");
    if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("eps must lie in (0,1)");
    if (n == 0 || m == 0 || k == 0) throw std::domain_error("n, m and k must be positive");
  }

  double dim_ab() const { return static_cast<double>(dim_a * dim_b); }
};

struct SecurityDeltas {
  bool valid = false;
  std::string reason;
  double r = NAN, delta_prime = NAN, mu = NAN, delta = NAN;
};

inline SecurityDeltas security_deltas(const FiniteKeyParams& p) {
  p.validate();
  SecurityDeltas s;
  const double N = static_cast<double>(p.N), n = static_cast<double>(p.n), m = static_cast<double>(p.m),
               k = static_cast<double>(p.k);
  if (p.k < 2) {
    s.reason = "k must be at least 2";
    return s;
  }
  const double d = p.dim_ab();
  s.r = N / k * (2.0 * std::log2(9.0 / p.eps) + d * d * std::log(k));
  if (s.r / n > 0.5) {
    s.reason = "r/n exceeds 1/2";
    return s;
  }
  if (s.r / m > 0.5) {
    s.reason = "r/m exceeds 1/2";
    return s;
  }
  s.delta_prime = (2.5 * std::log2(static_cast<double>(p.alphabet)) + 4.0) *
                  std::sqrt(binary_entropy(s.r / n) + 2.0 / n * std::log2(18.0 / p.eps));
  s.mu = 2.0 * std::sqrt(binary_entropy(s.r / m) +
                         1.0 / m * (std::log2(9.0 / (2.0 * p.eps)) +
                                    static_cast<double>(p.outcomes) * std::log2(m / 2.0 + 1.0)));
  s.delta = s.delta_prime + 2.0 * (m + k) / n * std::log2(d) + 2.0 / n * std::log2(3.0 / (2.0 * p.eps));
  s.valid = true;
  return s;
}

// floor(n H(X|E) - leak - n delta), at least 0.
inline std::uint64_t finite_key_length(const FiniteKeyParams& p, double min_entropy_per_block, double leak_bits) {
  const auto s = security_deltas(p);
  if (!s.valid) throw std::domain_error("security parameters invalid: " + s.reason);
  const long double n = p.n;
  const long double l = n * min_entropy_per_block - leak_bits - n * s.delta;
  if (!(l > 0)) return 0;
  return static_cast<std::uint64_t>(std::floor(l));
}

struct LogValue {
  double ln;  // natural log of the value
  double value() const { return std::exp(ln); }
  double log2() const { return ln / std::log(2.0); }
};

// 2 exp(-k (r+1) / (2 (n+k)) + dim/2 ln k)
inline LogValue definetti_error(double n, double k, double r, double dim) {
  if (k < 2) throw std::domain_error("k must be at least 2");
  if (r < 0 || r > n) throw std::domain_error("r must lie in [0, n]");
  return {std::log(2.0) - k * (r + 1.0) / (2.0 * (n + k)) + 0.5 * dim * std::log(k)};
}

// exp(-k delta^2 / 4 + dim ln k)
inline LogValue definetti_weight_bound(double k, double delta, double dim) {
  if (k < 2) throw std::domain_error("k must be at least 2");
  return {-0.25 * k * delta * delta + dim * std::log(k)};
}

// log(|X| + 3) sqrt(2 log(1/eps) / n)
inline double aep_delta(double n, double alphabet, double eps) {
  if (n < 1) throw std::domain_error("n must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("eps must lie in (0,1)");
  return std::log2(alphabet + 3.0) * std::sqrt(2.0 * std::log2(1.0 / eps) / n);
}

// log2 of 2^(-n delta^2 / (2 log(|X|+3)^2))
inline double aep_chernoff_log2(double n, double alphabet, double delta) {
  const double l = std::log2(alphabet + 3.0);
  return -n * delta * delta / (2.0 * l * l);
}

// (2 H_max + 3) sqrt(log(1/eps)/n + 1), evaluated as written including the +1.
inline double quantum_aep_delta(double n, double hmax, double eps) {
  if (n < 1) throw std::domain_error("n must be >= 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("eps must lie in (0,1)");
  return (2.0 * hmax + 3.0) * std::sqrt(std::log2(1.0 / eps) / n + 1.0);
}

struct TypicalityBound {
  double log2_value;
  bool vacuous;  // bound >= 1
};

// 2^(-n (delta^2 / (2 ln 2) - |X| log(n+1) / n))
inline TypicalityBound typicality_bound(double n, double alphabet, double delta) {
  if (n < 1) throw std::domain_error("n must be >= 1");
  const double e = -n * (delta * delta / (2.0 * std::log(2.0)) - alphabet * std::log2(n + 1.0) / n);
  return {e, e >= 0.0};
}

inline nlohmann::ordered_json bound_report(const FiniteKeyParams& p) {
  const auto s = security_deltas(p);
  nlohmann::ordered_json j;
  j["N"] = p.N;
  j["n"] = p.n;
  j["m"] = p.m;
  j["k"] = p.k;
  j["b"] = p.b;
  j["eps"] = p.eps;
  j["valid"] = s.valid;
  if (!s.valid) {
    j["reason"] = s.reason;
    j["r"] = std::isfinite(s.r) ? nlohmann::ordered_json(s.r) : nlohmann::ordered_json(nullptr);
    return j;
  }
  j["r"] = s.r;
  j["delta_prime"] = s.delta_prime;
  j["mu"] = s.mu;
  j["delta"] = s.delta;
  const double ln_de = definetti_error(static_cast<double>(p.n), static_cast<double>(p.k), s.r, p.dim_ab() * p.dim_ab()).ln;
  j["definetti_error_log2"] = ln_de / std::log(2.0);
  return j;
}

}  // namespace qkdsec
