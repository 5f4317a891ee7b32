#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "bitstring.hpp"
#include "rng.hpp"

namespace qkdsec {

// Toeplitz matrix over GF(2) with T[i][j] = s[i - j + n - 1], mapping n bits to l bits.
class HashFunction {
 public:
  HashFunction(std::size_t n, std::size_t l, BitString seed) : n_(n), l_(l), seed_(std::move(seed)) {
    if (n == 0 || l == 0) throw std::invalid_argument("hash lengths must be positive");
    if (seed_.size() != n + l - 1) throw std::invalid_argument("Toeplitz seed must have n + l - 1 bits");
  }

  static HashFunction random(std::size_t n, std::size_t l, CounterRng& rng) {
    BitString s(n + l - 1);
    for (std::size_t i = 0; i < s.size(); ++i) s.set(i, rng() & 1U);
    return {n, l, std::move(s)};
  }

  std::size_t input_length() const { return n_; }
  std::size_t output_length() const { return l_; }
  const BitString& seed() const { return seed_; }
  std::string family() const { return "toeplitz-gf2"; }

  bool entry(std::size_t i, std::size_t j) const { return seed_.get(i + n_ - 1 - j); }

  // out_i = sum_j s[i + n - 1 - j] x_j = <s[i .. i+n), reverse(x)>.
  BitString apply(const BitString& x) const {
    if (x.size() != n_) throw std::invalid_argument("hash input has length " + std::to_string(x.size()) +
                                                    ", expected " + std::to_string(n_));
    const BitString rx = x.reversed();
    BitString out(l_);
    for (std::size_t i = 0; i < l_; ++i) out.set(i, seed_.slice(i, n_).dot(rx));
    return out;
  }

 private:
  std::size_t n_, l_;
  BitString seed_;
};

inline constexpr std::uint64_t kHashStream = 0x4A5;

inline HashFunction sample_hash(std::size_t n, std::size_t l, std::uint64_t seed) {
  if (l > n) throw std::invalid_argument("hash output length exceeds input length");
  CounterRng rng(seed, kHashStream);
  return HashFunction::random(n, l, rng);
}

inline BitString apply_hash(const HashFunction& f, const BitString& x) { return f.apply(x); }

inline BitString privacy_amplify(const BitString& x, const HashFunction& f) { return f.apply(x); }

}  // namespace qkdsec
