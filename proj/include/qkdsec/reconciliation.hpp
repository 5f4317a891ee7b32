#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bitstring.hpp"
#include "hashing.hpp"
#include "rng.hpp"

namespace qkdsec {

struct IRTranscript {
  std::string scheme;
  std::size_t n = 0;
  BitString message;            // hash value or masked string sent to Bob
  std::size_t leakage_bits = 0;
  std::uint64_t public_seed = 0;  // uniform, input-independent; not counted as leakage
};

struct IRDecode {
  std::optional<BitString> x_hat;  // empty on abort
  std::size_t candidates = 0;

  bool aborted() const { return !x_hat.has_value(); }
};

inline constexpr std::uint64_t kIrStream = 0x1E;
inline constexpr std::uint64_t kIrTieStream = 0x1F;
inline constexpr double kMaxBallSize = 67108864.0;  // 2^26

// log2 sum_{w <= t} C(n, w)
inline double log2_ball_size(std::size_t n, std::size_t t) {
  double s = 0.0, c = 1.0;
  for (std::size_t w = 0; w <= t && w <= n; ++w) {
    s += c;
    c = c * static_cast<double>(n - w) / static_cast<double>(w + 1);
  }
  return std::log2(s);
}

inline double binomial_pmf(std::size_t n, std::size_t k, double p) {
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  const double dn = static_cast<double>(n), dk = static_cast<double>(k);
  return std::exp(std::lgamma(dn + 1) - std::lgamma(dk + 1) - std::lgamma(dn - dk + 1) + dk * std::log(p) +
                  (dn - dk) * std::log1p(-p));
}

// Pr[Bin(n, p) > t]
inline double binomial_upper_tail(std::size_t n, std::size_t t, double p) {
  double s = 0.0;
  for (std::size_t k = t + 1; k <= n; ++k) s += binomial_pmf(n, k, p);
  return s;
}

struct HashIrParams {
  std::size_t t;  // candidate radius
  std::size_t k;  // hash length
  double log2_ball;
};

// Smallest t with Pr[weight > t] <= eps/2 and k = ceil(log2 |ball|) + ceil(log2(2/eps)).
inline HashIrParams choose_hash_ir(std::size_t n, double e, double eps) {
  if (n == 0) throw std::invalid_argument("block length must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("IR failure budget must lie in (0,1)");
  std::size_t t = 0;
  while (t < n && binomial_upper_tail(n, t, e) > eps / 2.0) ++t;
  const double lb = log2_ball_size(n, t);
  const auto k = static_cast<std::size_t>(std::ceil(lb - 1e-12)) + static_cast<std::size_t>(std::ceil(std::log2(2.0 / eps) - 1e-12));
  return {t, std::max<std::size_t>(k, 1), lb};
}

inline IRTranscript ir_hash_encode(const BitString& x, std::size_t k, std::uint64_t seed) {
  if (x.empty()) throw std::invalid_argument("cannot reconcile an empty string");
  CounterRng rng(seed, kIrStream);
  const auto f = HashFunction::random(x.size(), k, rng);
  return {"hash", x.size(), f.apply(x), k, seed};
}

// Searches the Hamming ball of radius t around y for strings whose hash matches.
inline IRDecode ir_hash_decode(const BitString& y, const IRTranscript& tr, std::size_t t, std::uint64_t tie_seed = 0) {
  if (tr.scheme != "hash") throw std::invalid_argument("transcript is not from hash reconciliation");
  if (y.size() != tr.n) throw std::invalid_argument("Bob's string has the wrong length");
  const std::size_t n = tr.n;
  if (log2_ball_size(n, t) > std::log2(kMaxBallSize)) throw std::length_error("candidate ball exceeds 2^26 strings");
  CounterRng rng(tr.public_seed, kIrStream);
  const auto f = HashFunction::random(n, tr.leakage_bits, rng);

  // f is linear: f(y + p) = f(y) + sum of columns f(e_j) over the support of p.
  const std::size_t kw = (tr.leakage_bits + 63) / 64;
  std::vector<std::vector<std::uint64_t>> cols(n);
  for (std::size_t j = 0; j < n; ++j) {
    BitString ej(n);
    ej.set(j, true);
    cols[j] = f.apply(ej).words();
  }
  std::vector<std::uint64_t> target = (f.apply(y) ^ tr.message).words();

  std::vector<std::vector<std::size_t>> matches;
  std::vector<std::size_t> stack;
  std::vector<std::uint64_t> acc(kw, 0);
  auto visit = [&](auto&& self, std::size_t start) -> void {
    if (acc == target) matches.push_back(stack);
    if (stack.size() == t) return;
    for (std::size_t j = start; j < n; ++j) {
      for (std::size_t w = 0; w < kw; ++w) acc[w] ^= cols[j][w];
      stack.push_back(j);
      self(self, j + 1);
      stack.pop_back();
      for (std::size_t w = 0; w < kw; ++w) acc[w] ^= cols[j][w];
    }
  };
  visit(visit, 0);

  IRDecode out;
  out.candidates = matches.size();
  if (matches.empty()) return out;
  std::size_t pick = 0;
  if (matches.size() > 1) {
    CounterRng tie(tie_seed, kIrTieStream);
    pick = static_cast<std::size_t>(tie.below(matches.size()));
  }
  BitString xh = y;
  for (auto j : matches[pick]) xh.flip(j);
  out.x_hat = std::move(xh);
  return out;
}

enum class CodeKind { repetition, hamming84 };

struct LinearCode {
  CodeKind kind;
  std::size_t r = 3;  // repetition length

  static LinearCode repetition(std::size_t r) {
    if (r == 0) throw std::invalid_argument("repetition length must be positive");
    return {CodeKind::repetition, r};
  }
  static LinearCode hamming84() { return {CodeKind::hamming84, 8}; }

  std::size_t length() const { return kind == CodeKind::repetition ? r : 8; }
  std::size_t dimension() const { return kind == CodeKind::repetition ? 1 : 4; }
  std::string name() const {
    return kind == CodeKind::repetition ? "repetition[" + std::to_string(r) + ",1]" : "hamming[8,4]";
  }

  // Codeword for `msg` (dimension() bits, LSB = first message bit).
  BitString encode(std::uint64_t msg) const {
    BitString c(length());
    if (kind == CodeKind::repetition) {
      for (std::size_t i = 0; i < r; ++i) c.set(i, msg & 1U);
      return c;
    }
    // Positions 1..7 of the [7,4] code at indices 0..6, overall parity at index 7.
    const bool d3 = msg & 1U, d5 = (msg >> 1) & 1U, d6 = (msg >> 2) & 1U, d7 = (msg >> 3) & 1U;
    c.set(2, d3);
    c.set(4, d5);
    c.set(5, d6);
    c.set(6, d7);
    c.set(0, d3 ^ d5 ^ d7);
    c.set(1, d3 ^ d6 ^ d7);
    c.set(3, d5 ^ d6 ^ d7);
    c.set(7, c.parity());
    return c;
  }

  // Nearest codeword, or nothing when the decoder detects an uncorrectable pattern.
  std::optional<BitString> decode(const BitString& v) const {
    if (v.size() != length()) throw std::invalid_argument("received word has the wrong length");
    if (kind == CodeKind::repetition) {
      const std::size_t w = v.weight();
      if (2 * w == r) return std::nullopt;
      return encode(2 * w > r ? 1 : 0);
    }
    std::size_t syndrome = 0;
    for (std::size_t i = 0; i < 7; ++i)
      if (v.get(i)) syndrome ^= i + 1;
    const bool odd = v.parity();
    BitString c = v;
    if (!odd && syndrome != 0) return std::nullopt;
    if (odd) c.flip(syndrome == 0 ? 7 : syndrome - 1);
    return c;
  }
};

// Alice sends c = x + u for a uniformly random codeword u per block.
inline IRTranscript ir_code_encode(const BitString& x, const LinearCode& code, std::uint64_t seed) {
  const std::size_t len = code.length();
  if (x.empty() || x.size() % len != 0)
    throw std::invalid_argument("string length must be a positive multiple of the code length");
  CounterRng rng(seed, kIrStream);
  const std::size_t blocks = x.size() / len;
  BitString c(0);
  for (std::size_t blk = 0; blk < blocks; ++blk) {
    const auto u = code.encode(rng.below(std::uint64_t{1} << code.dimension()));
    c.append(x.slice(blk * len, len) ^ u);
  }
  return {code.name(), x.size(), c, x.size() - code.dimension() * blocks, seed};
}

// Bob decodes c + y to a codeword u' per block and outputs c + u'.
inline IRDecode ir_code_decode(const BitString& y, const IRTranscript& tr, const LinearCode& code) {
  if (tr.scheme != code.name()) throw std::invalid_argument("transcript was produced with a different code");
  if (y.size() != tr.n) throw std::invalid_argument("Bob's string has the wrong length");
  const std::size_t len = code.length();
  BitString xh(0);
  IRDecode out;
  for (std::size_t blk = 0; blk < tr.n / len; ++blk) {
    const auto c = tr.message.slice(blk * len, len);
    const auto u = code.decode(c ^ y.slice(blk * len, len));
    if (!u) return out;
    xh.append(c ^ *u);
  }
  out.candidates = 1;
  out.x_hat = std::move(xh);
  return out;
}

}  // namespace qkdsec
