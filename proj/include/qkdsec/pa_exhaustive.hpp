#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "entropy.hpp"
#include "hashing.hpp"

namespace qkdsec {

struct PaExhaustiveResult {
  double avg_distance;          // E_f d(f(X)|E), full L1 norm
  double bound;                 // sqrt(tr P tr P_E) 2^(-(H_2(X|E) - l)/2)
  double collision_entropy;     // H_2(P_XE | P_E)
  std::size_t input_bits;       // ceil(log2 |X|)
  std::vector<double> distances;  // one per Toeplitz seed, seed read as an integer MSB first
};

inline constexpr std::size_t kPaMaxX = 64, kPaMaxE = 4, kPaMaxL = 6;

// || P_{f(X)E} - U (x) P_E ||_1 for one hash function; x is encoded in `bits` bits MSB first.
inline double pa_distance(const JointDistribution& p_xe, const HashFunction& f) {
  const auto sz = p_xe.sizes();
  const std::size_t nx = sz[0], ne = sz[1], l = f.output_length(), nz = std::size_t{1} << l;
  std::vector<double> pze(nz * ne, 0.0), pe(ne, 0.0);
  for (std::size_t x = 0; x < nx; ++x) {
    const auto z = f.apply(BitString::from_uint(x, f.input_length()));
    std::size_t zi = 0;
    for (std::size_t i = 0; i < l; ++i) zi = (zi << 1) | (z.get(i) ? 1U : 0U);
    for (std::size_t e = 0; e < ne; ++e) {
      pze[zi * ne + e] += p_xe[x * ne + e];
      pe[e] += p_xe[x * ne + e];
    }
  }
  double d = 0.0;
  for (std::size_t z = 0; z < nz; ++z)
    for (std::size_t e = 0; e < ne; ++e) d += std::abs(pze[z * ne + e] - pe[e] / static_cast<double>(nz));
  return d;
}

// Averages the distance over every member of the Toeplitz family from ceil(log2|X|) bits to l bits.
inline PaExhaustiveResult pa_distance_exhaustive(const JointDistribution& p_xe, std::size_t l) {
  if (p_xe.factors() != 2) throw std::invalid_argument("expected a distribution over (X, E)");
  const auto sz = p_xe.sizes();
  if (sz[0] > kPaMaxX || sz[1] > kPaMaxE || l > kPaMaxL)
    throw std::length_error("exhaustive regime is |X| <= 64, |E| <= 4, l <= 6");
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < sz[0]) ++bits;
  if (l == 0 || l > bits) throw std::invalid_argument("output length must lie in [1, ceil(log2 |X|)]");

  PaExhaustiveResult r{};
  r.input_bits = bits;
  const std::size_t seed_bits = bits + l - 1;
  const std::uint64_t members = std::uint64_t{1} << seed_bits;
  double sum = 0.0;
  for (std::uint64_t s = 0; s < members; ++s) {
    const HashFunction f(bits, l, BitString::from_uint(s, seed_bits));
    const double d = pa_distance(p_xe, f);
    r.distances.push_back(d);
    sum += d;
  }
  r.avg_distance = sum / static_cast<double>(members);
  const auto pe = p_xe.marginal({1});
  r.collision_entropy = classical_collision_entropy(p_xe, pe);
  const double tr = p_xe.total();
  r.bound = std::sqrt(tr * pe.total()) * std::exp2(-0.5 * (r.collision_entropy - static_cast<double>(l)));
  return r;
}

}  // namespace qkdsec
