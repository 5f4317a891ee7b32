#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace qkdsec {

// Diagonal of a two-qubit state in the Bell basis |Phi_0> .. |Phi_3>.
//
// Entries within 1e-12 below zero are rounding noise and are clamped to 0.
// The sum may be below one (sub-normalized states are allowed).
class BellDiagonalState {
 public:
  static constexpr double kTolerance = 1e-12;

  BellDiagonalState(double l0, double l1, double l2, double l3)
      : lambda_{l0, l1, l2, l3} {
    for (auto& l : lambda_) {
      if (!std::isfinite(l)) throw std::domain_error("Bell coefficient is not finite");
      if (l < -kTolerance)
        throw std::domain_error("Bell coefficient " + std::to_string(l) + " is negative");
      if (l < 0.0) l = 0.0;
    }
    if (sum() > 1.0 + kTolerance)
      throw std::domain_error("Bell coefficients sum to " + std::to_string(sum()) + " > 1");
  }

  explicit BellDiagonalState(const std::array<double, 4>& l)
      : BellDiagonalState(l[0], l[1], l[2], l[3]) {}

  double operator[](std::size_t i) const { return lambda_.at(i); }
  const std::array<double, 4>& values() const { return lambda_; }
  double sum() const { return lambda_[0] + lambda_[1] + lambda_[2] + lambda_[3]; }

  // Masses of the "no bit error" group {0,1} and the "bit error" group {2,3}
  // relative to the computational basis.
  double agree_mass() const { return lambda_[0] + lambda_[1]; }
  double error_mass() const { return lambda_[2] + lambda_[3]; }

  friend bool operator==(const BellDiagonalState&, const BellDiagonalState&) = default;

 private:
  std::array<double, 4> lambda_;
};

}  // namespace qkdsec
