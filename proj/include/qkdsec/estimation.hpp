#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qkdsec {

// L1 ball of radius `tolerance` around a reference distribution. Empty reference = empty region.
struct AcceptRegion {
  std::vector<double> reference;
  double tolerance = 0.0;
};

struct PeResult {
  bool accept;
  std::vector<double> frequencies;
  double distance;  // L1 distance to the reference, infinite for an empty region
};

inline PeResult parameter_estimate(const std::vector<std::size_t>& samples, std::size_t alphabet,
                                   const AcceptRegion& region) {
  if (samples.empty()) throw std::invalid_argument("parameter estimation needs at least one sample");
  if (alphabet == 0) throw std::invalid_argument("alphabet must be nonempty");
  std::vector<double> freq(alphabet, 0.0);
  for (auto s : samples) {
    if (s >= alphabet) throw std::invalid_argument("sample label outside the alphabet");
    freq[s] += 1.0;
  }
  for (auto& f : freq) f /= static_cast<double>(samples.size());
  if (region.reference.empty()) return {false, freq, INFINITY};
  if (region.reference.size() != alphabet) throw std::invalid_argument("reference has the wrong alphabet size");
  double d = 0.0;
  for (std::size_t i = 0; i < alphabet; ++i) d += std::abs(freq[i] - region.reference[i]);
  return {d <= region.tolerance, freq, d};
}

// Two-sided Hoeffding radius for a binary frequency from m samples, as an L1 tolerance.
inline double hoeffding_l1_tolerance(std::size_t m, double fail_prob) {
  if (m == 0) throw std::invalid_argument("m must be positive");
  if (!(fail_prob > 0.0 && fail_prob < 1.0)) throw std::domain_error("failure probability must lie in (0,1)");
  return 2.0 * std::sqrt(std::log(2.0 / fail_prob) / (2.0 * static_cast<double>(m)));
}

}  // namespace qkdsec
