#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "distribution.hpp"
#include "entropy.hpp"

namespace qkdsec {

// A class of atoms (x, y) sharing the ratio P(x,y)/Q(y).
// mass is the total P-mass of the class; the class's total Q-weight is mass / ratio.
struct AtomClass {
  double log2_ratio;  // +infinity when Q(y) = 0
  double mass;
  double log2_count;  // number of atoms in the class, log2
};

namespace detail {

inline double log2_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log2(std::exp2(a - m) + std::exp2(b - m));
}

inline std::vector<AtomClass> atoms_of(const JointDistribution& p, const JointDistribution& q) {
  const auto [nx, ny] = classical_split(p, q);
  std::vector<AtomClass> out;
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      const double w = p[x * ny + y];
      if (w <= 0.0) continue;
      const double r = q[y] > 0.0 ? std::log2(w) - std::log2(q[y]) : std::numeric_limits<double>::infinity();
      out.push_back({r, w, 0.0});
    }
  return out;
}

inline void check_eps(double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw std::domain_error("smoothing parameter must lie in [0,1)");
}

}  // namespace detail

// Candidate set {P' >= 0 : |P' - P|_1 <= tr(P) eps, tr(P') <= tr(P)}.
struct SmoothingBall {
  double eps;
  JointDistribution base;

  bool contains(const JointDistribution& cand, double tol = 1e-12) const {
    if (cand.size() != base.size()) return false;
    double dist = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) dist += std::abs(cand[i] - base[i]);
    return dist <= base.total() * eps + tol && cand.total() <= base.total() + tol;
  }
};

// Water-level flattening: lower every ratio above lambda to lambda so that
// exactly eps * total mass is removed, then return -log lambda.
inline double smooth_min_entropy_classes(std::vector<AtomClass> classes, double eps) {
  detail::check_eps(eps);
  double total = 0.0;
  for (const auto& c : classes) total += c.mass;
  if (total <= 0.0) return 0.0;
  double budget = eps * total;
  std::erase_if(classes, [&](const AtomClass& c) {
    if (std::isinf(c.log2_ratio) && c.log2_ratio > 0) {
      budget -= c.mass;
      return true;
    }
    return c.mass <= 0.0;
  });
  if (budget < -1e-15 * total) return kNegInf;
  budget = std::max(budget, 0.0);
  if (classes.empty()) return 0.0;
  std::sort(classes.begin(), classes.end(),
            [](const AtomClass& a, const AtomClass& b) { return a.log2_ratio > b.log2_ratio; });

  // removed(lambda) = A - lambda * B over the classes with ratio above lambda,
  // B = sum mass / ratio kept as log2.
  double a = 0.0;
  double log_b = kNegInf;
  for (std::size_t j = 0; j < classes.size(); ++j) {
    a += classes[j].mass;
    log_b = detail::log2_add(log_b, std::log2(classes[j].mass) - classes[j].log2_ratio);
    const bool last = j + 1 == classes.size();
    const double next = last ? kNegInf : classes[j + 1].log2_ratio;
    const double removed_at_next = last ? a : a - std::exp2(next + log_b);
    if (removed_at_next >= budget || last) {
      const double rest = a - budget;
      if (rest <= 0.0) return std::numeric_limits<double>::infinity();
      return -(std::log2(rest) - log_b);
    }
  }
  return 0.0;
}

// Greedy deletion of atoms in ascending ratio order until eps * total mass is used.
// Exact when Q is constant on the support of P, an upper bound on the infimum otherwise.
inline double smooth_max_entropy_classes(std::vector<AtomClass> classes, double eps) {
  detail::check_eps(eps);
  double total = 0.0;
  for (const auto& c : classes) total += c.mass;
  if (total <= 0.0) return 0.0;
  std::erase_if(classes, [](const AtomClass& c) { return c.mass <= 0.0; });
  std::sort(classes.begin(), classes.end(),
            [](const AtomClass& a, const AtomClass& b) { return a.log2_ratio < b.log2_ratio; });
  double budget = eps * total;
  double log_w = kNegInf;
  bool exhausted = false;
  for (const auto& c : classes) {
    const double log_qw = std::isinf(c.log2_ratio) ? kNegInf : std::log2(c.mass) - c.log2_ratio;
    if (exhausted) {
      log_w = detail::log2_add(log_w, log_qw);
      continue;
    }
    if (c.mass <= budget) {
      budget -= c.mass;
      continue;
    }
    // Partial class: delete whole atoms only.
    double keep_fraction = 1.0;
    if (c.log2_count < 52.0) {
      const double count = std::round(std::exp2(c.log2_count));
      const double atom = c.mass / count;
      const double deleted = std::floor(budget / atom * (1.0 + 1e-12));
      keep_fraction = (count - std::min(deleted, count)) / count;
    } else {
      keep_fraction = 1.0 - budget / c.mass;
    }
    if (keep_fraction > 0.0) log_w = detail::log2_add(log_w, log_qw + std::log2(keep_fraction));
    exhausted = true;
  }
  return log_w;
}

inline double smooth_min_entropy_classical(const JointDistribution& p, const JointDistribution& q, double eps) {
  return smooth_min_entropy_classes(detail::atoms_of(p, q), eps);
}

inline double smooth_max_entropy_classical(const JointDistribution& p, const JointDistribution& q, double eps) {
  return smooth_max_entropy_classes(detail::atoms_of(p, q), eps);
}

// The flattened distribution achieving smooth_min_entropy_classical.
inline JointDistribution smooth_min_witness(const JointDistribution& p, const JointDistribution& q, double eps) {
  const double h = smooth_min_entropy_classical(p, q, eps);
  const auto [nx, ny] = detail::classical_split(p, q);
  std::vector<double> w = p.weights();
  const double lambda = std::exp2(-h);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) {
      auto& v = w[x * ny + y];
      if (q[y] <= 0.0)
        v = 0.0;
      else
        v = std::min(v, lambda * q[y]);
    }
  return {p.alphabets(), w};
}

// n uses of a binary symmetric channel with crossover e and uniform input,
// conditioned on the output: one class per Hamming weight w of x xor y.
inline std::vector<AtomClass> bsc_product_classes(std::size_t n, double e) {
  if (!(e >= 0.0 && e <= 0.5)) throw std::domain_error("crossover probability outside [0, 1/2]");
  std::vector<AtomClass> out;
  const double dn = static_cast<double>(n);
  for (std::size_t w = 0; w <= n; ++w) {
    const double dw = static_cast<double>(w);
    if ((e == 0.0 && w > 0) || (e == 1.0 && w < n)) continue;
    const double ln_binom = std::lgamma(dn + 1) - std::lgamma(dw + 1) - std::lgamma(dn - dw + 1);
    const double ln_p = (w > 0 ? dw * std::log(e) : 0.0) + (n > w ? (dn - dw) * std::log1p(-e) : 0.0);
    out.push_back({ln_p / std::log(2.0), std::exp(ln_binom + ln_p), dn + ln_binom / std::log(2.0)});
  }
  return out;
}

}  // namespace qkdsec
