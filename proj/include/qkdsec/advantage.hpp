#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "bitstring.hpp"
#include "rng.hpp"

namespace qkdsec {

inline constexpr std::uint64_t kSourceStream = 0x50;
inline constexpr std::uint64_t kNoiseStream = 0x51;
inline constexpr std::uint64_t kAdStream = 0xAD;

// x uniform, y = x with each bit flipped independently with probability e.
inline std::pair<BitString, BitString> sample_bsc_pair(std::size_t n, double e, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("n must be positive");
  if (!(e >= 0.0 && e <= 0.5)) throw std::domain_error("error rate must lie in [0, 1/2]");
  CounterRng src(seed, kSourceStream), noise(seed, kNoiseStream);
  BitString x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool b = src() & 1U;
    x.set(i, b);
    y.set(i, b ^ noise.bernoulli(e));
  }
  return {std::move(x), std::move(y)};
}

struct AdBlock {
  bool accept;
  bool x_out;
  bool y_out;
};

// Alice announces c = x_b + (r, ..., r); Bob accepts iff y_b + c is all zeros or all ones.
inline AdBlock advantage_distill_block(const BitString& xb, const BitString& yb, bool r_bit) {
  if (xb.size() != yb.size() || xb.empty()) throw std::invalid_argument("blocks must be nonempty and of equal length");
  const std::size_t b = xb.size();
  BitString c = xb;
  if (r_bit)
    for (std::size_t i = 0; i < b; ++i) c.flip(i);
  const std::size_t w = (yb ^ c).weight();
  const bool accept = w == 0 || w == b;
  return {accept, xb.get(0), yb.get(0)};
}

struct AdOutcome {
  BitString x_out, y_out;
  std::size_t blocks = 0;
  std::size_t accepted = 0;
  std::size_t public_bits = 0;  // c per block plus Bob's accept bit

  double accept_rate() const { return blocks ? static_cast<double>(accepted) / static_cast<double>(blocks) : 0.0; }
  std::size_t errors() const { return (x_out ^ y_out).weight(); }
};

// Runs the block protocol over consecutive blocks of b bits; a trailing partial block is dropped.
inline AdOutcome advantage_distill(const BitString& x, const BitString& y, std::size_t b, std::uint64_t seed) {
  if (b == 0) throw std::invalid_argument("block length must be positive");
  if (x.size() != y.size()) throw std::invalid_argument("strings differ in length");
  CounterRng rng(seed, kAdStream);
  AdOutcome out;
  out.blocks = x.size() / b;
  for (std::size_t k = 0; k < out.blocks; ++k) {
    const auto res = advantage_distill_block(x.slice(k * b, b), y.slice(k * b, b), rng() & 1U);
    out.public_bits += b + 1;
    if (!res.accept) continue;
    ++out.accepted;
    out.x_out.push_back(res.x_out);
    out.y_out.push_back(res.y_out);
  }
  return out;
}

}  // namespace qkdsec
