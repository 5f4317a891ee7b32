#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "operator.hpp"
#include "rng.hpp"

namespace qkdsec {

// Raised for quantities this library deliberately does not compute.
struct NotImplemented : std::logic_error {
  using std::logic_error::logic_error;
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kNormTol = 1e-9;
inline constexpr double kSupportLeakTol = 1e-9;

inline double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

inline double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binary entropy argument outside [0,1]");
  return -xlog2x(p) - xlog2x(1.0 - p);
}

inline double shannon_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) h -= xlog2x(v);
  return h;
}

// H(X|Y) where Y is factor `cond` and X collects all other factors.
inline double shannon_conditional(const JointDistribution& p, std::size_t cond) {
  if (std::abs(p.total() - 1.0) > kNormTol) throw std::domain_error("distribution is not normalized");
  if (cond >= p.factors()) throw std::invalid_argument("conditioning factor out of range");
  return shannon_entropy(p.weights()) - shannon_entropy(p.marginal({cond}).weights());
}

inline double von_neumann_entropy(const HermitianOperator& rho) {
  double h = 0.0;
  for (double l : eigenvalues(rho))
    if (l > 0.0) h -= l * std::log2(l);
  return h;
}

// H(A|B) = H(AB) - H(B) where B is the listed factors (increasing).
inline double von_neumann_conditional(const HermitianOperator& rho, const std::vector<std::size_t>& cond) {
  if (std::abs(rho.trace() - 1.0) > kNormTol)
    throw std::domain_error("operator is not a density operator (trace != 1)");
  if (!is_nonnegative(rho)) throw std::domain_error("operator is not a density operator (negative eigenvalue)");
  return von_neumann_entropy(rho) - von_neumann_entropy(partial_trace(rho, cond));
}

namespace detail {

// dim(A) for rho on A (x) B when sigma lives on the trailing factors B.
inline std::size_t split_dim(const HermitianOperator& rho, const HermitianOperator& sigma) {
  const Dims& r = rho.dims();
  const Dims& s = sigma.dims();
  if (s.size() > r.size() || !std::equal(s.begin(), s.end(), r.end() - static_cast<std::ptrdiff_t>(s.size())))
    throw std::invalid_argument("sigma's factors must match the trailing factors of rho");
  return rho.dim() / sigma.dim();
}

// id_A (x) b
inline Matrix lift(std::size_t da, const Matrix& b) {
  const auto nb = b.rows();
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(da) * nb, static_cast<Eigen::Index>(da) * nb);
  for (std::size_t i = 0; i < da; ++i) m.block(static_cast<Eigen::Index>(i) * nb, static_cast<Eigen::Index>(i) * nb, nb, nb) = b;
  return m;
}

inline void check_sigma(const HermitianOperator& sigma) {
  if (!is_nonnegative(sigma)) throw std::domain_error("sigma is not nonnegative");
}

}  // namespace detail

struct SupportCheck {
  bool contained;
  double leaked;  // trace of rho outside id_A (x) supp(sigma)
};

inline SupportCheck check_support(const HermitianOperator& rho, const HermitianOperator& sigma) {
  const auto da = detail::split_dim(rho, sigma);
  const Matrix p = detail::lift(da, support_projector(sigma).matrix());
  const Matrix outside = Matrix::Identity(rho.dim(), rho.dim()) - p;
  const double leaked = std::abs((outside * rho.matrix() * outside).trace().real());
  const double scale = std::max(1.0, std::abs(rho.trace()));
  return {leaked <= kSupportLeakTol * scale, leaked};
}

// H_min(rho_AB | sigma_B) = -log lambda_max((id (x) sigma^-1/2) rho (id (x) sigma^-1/2)).
// Returns -infinity when rho is not supported on id_A (x) supp(sigma); 0 for the zero operator.
inline double min_entropy_rel(const HermitianOperator& rho, const HermitianOperator& sigma) {
  detail::check_sigma(sigma);
  const auto da = detail::split_dim(rho, sigma);
  if (is_zero(rho)) return 0.0;
  if (!check_support(rho, sigma).contained) return kNegInf;
  const Matrix s = detail::lift(da, support_power(sigma, -0.5).matrix());
  const double lmax = lambda_max(conjugate(s, rho));
  if (lmax <= 0.0) return kNegInf;
  return -std::log2(lmax);
}

// H_max(rho_AB | sigma_B) = log tr((id (x) sigma) rho^0).
inline double max_entropy_rel(const HermitianOperator& rho, const HermitianOperator& sigma) {
  detail::check_sigma(sigma);
  const auto da = detail::split_dim(rho, sigma);
  if (is_zero(rho)) return 0.0;
  const Matrix p0 = support_projector(rho).matrix();
  const double t = (detail::lift(da, sigma.matrix()) * p0).trace().real();
  if (t <= 0.0) return kNegInf;
  return std::log2(t);
}

// H_2(rho_AB | sigma_B) = -log (1/tr rho) tr((rho (id (x) sigma^-1/2))^2).
inline double collision_entropy_rel(const HermitianOperator& rho, const HermitianOperator& sigma) {
  detail::check_sigma(sigma);
  const auto da = detail::split_dim(rho, sigma);
  if (is_zero(rho)) return 0.0;
  if (!check_support(rho, sigma).contained)
    throw std::domain_error("collision entropy: rho is not supported on supp(sigma)");
  const Matrix s = detail::lift(da, support_power(sigma, -0.5).matrix());
  const Matrix rs = rho.matrix() * s;
  const double v = (rs * rs).trace().real() / rho.trace();
  if (v <= 0.0) return kNegInf;
  return -std::log2(v);
}

// H_max(rho) with trivial conditioning system.
inline double max_entropy(const HermitianOperator& rho) {
  return max_entropy_rel(rho, HermitianOperator::scalar(1.0));
}

inline double min_entropy(const HermitianOperator& rho) {
  return min_entropy_rel(rho, HermitianOperator::scalar(1.0));
}

inline double smooth_min_entropy_quantum(const HermitianOperator& rho, const HermitianOperator& sigma, double eps) {
  if (eps == 0.0) return min_entropy_rel(rho, sigma);
  throw NotImplemented("quantum smooth min-entropy requires an SDP and is not implemented");
}

inline double smooth_max_entropy_quantum(const HermitianOperator& rho, const HermitianOperator& sigma, double eps) {
  if (eps == 0.0) return max_entropy_rel(rho, sigma);
  throw NotImplemented("quantum smooth max-entropy requires an SDP and is not implemented");
}

// Classical entropies of P over (X..., Y...) relative to Q over the trailing factors Y...
namespace detail {

struct ClassicalSplit {
  std::size_t nx, ny;
};

inline ClassicalSplit classical_split(const JointDistribution& p, const JointDistribution& q) {
  const auto ps = p.sizes();
  const auto qs = q.sizes();
  if (qs.size() > ps.size() || !std::equal(qs.begin(), qs.end(), ps.end() - static_cast<std::ptrdiff_t>(qs.size())))
    throw std::invalid_argument("Q's factors must match the trailing factors of P");
  return {p.size() / q.size(), q.size()};
}

}  // namespace detail

inline double classical_min_entropy(const JointDistribution& p, const JointDistribution& q) {
  const auto [nx, ny] = detail::classical_split(p, q);
  double best = 0.0;
  bool any = false;
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) {
      const double w = p[x * ny + y];
      if (w <= 0.0) continue;
      any = true;
      if (q[y] <= 0.0) return kNegInf;
      best = std::max(best, w / q[y]);
    }
  return any ? -std::log2(best) : 0.0;
}

inline double classical_max_entropy(const JointDistribution& p, const JointDistribution& q) {
  const auto [nx, ny] = detail::classical_split(p, q);
  double t = 0.0;
  bool any = false;
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x)
      if (p[x * ny + y] > 0.0) {
        any = true;
        t += q[y];
      }
  if (!any) return 0.0;
  return t > 0.0 ? std::log2(t) : kNegInf;
}

inline double classical_collision_entropy(const JointDistribution& p, const JointDistribution& q) {
  const auto [nx, ny] = detail::classical_split(p, q);
  double s = 0.0;
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) {
      const double w = p[x * ny + y];
      if (w <= 0.0) continue;
      if (q[y] <= 0.0) throw std::domain_error("collision entropy: P is not supported on supp(Q)");
      s += w * w / q[y];
    }
  const double tr = p.total();
  if (tr <= 0.0) return 0.0;
  return -std::log2(s / tr);
}

enum class SigmaStrategy { marginal, optimize };

struct OptimizeOptions {
  std::uint64_t seed = 0;
  int random_starts = 4;
  double initial_step = 0.5;
  double final_step = 1e-7;
};

// sup over normalized sigma_B of H_min(rho_AB | sigma_B), B = last `b_factors` factors.
// "marginal" evaluates at sigma = rho_B. "optimize" runs a multi-start coordinate
// ascent and is a lower bound on the supremum, not a certified optimum.
inline double min_entropy_given_B(const HermitianOperator& rho, std::size_t b_factors,
                                  SigmaStrategy strategy = SigmaStrategy::marginal,
                                  const OptimizeOptions& opt = {}) {
  const Dims& dims = rho.dims();
  if (b_factors > dims.size()) throw std::invalid_argument("more conditioning factors than rho has");
  std::vector<std::size_t> keep;
  for (std::size_t f = dims.size() - b_factors; f < dims.size(); ++f) keep.push_back(f);
  HermitianOperator rho_b = partial_trace(rho, keep);
  if (rho_b.trace() <= 0.0) return 0.0;
  const double marginal = min_entropy_rel(rho, rho_b * (1.0 / rho_b.trace()));
  if (strategy == SigmaStrategy::marginal || b_factors == 0) return marginal;

  const auto db = static_cast<Eigen::Index>(rho_b.dim());
  const Dims bdims = rho_b.dims();
  const auto n = static_cast<std::size_t>(2 * db * db);

  auto to_sigma = [&](const std::vector<double>& th) {
    Matrix g(db, db);
    for (Eigen::Index i = 0; i < db; ++i)
      for (Eigen::Index j = 0; j < db; ++j) {
        const auto k = static_cast<std::size_t>(2 * (i * db + j));
        g(i, j) = Complex(th[k], th[k + 1]);
      }
    Matrix s = g * g.adjoint();
    const double t = s.trace().real();
    if (!(t > 0.0)) return HermitianOperator::maximally_mixed(bdims);
    return HermitianOperator(bdims, s / t);
  };
  auto objective = [&](const std::vector<double>& th) { return min_entropy_rel(rho, to_sigma(th)); };

  // G = sigma^1/2 reproduces a given starting sigma.
  auto from_sigma = [&](const HermitianOperator& s) {
    const Matrix g = support_power(s, 0.5).matrix();
    std::vector<double> th(n);
    for (Eigen::Index i = 0; i < db; ++i)
      for (Eigen::Index j = 0; j < db; ++j) {
        const auto k = static_cast<std::size_t>(2 * (i * db + j));
        th[k] = g(i, j).real();
        th[k + 1] = g(i, j).imag();
      }
    return th;
  };

  std::vector<std::vector<double>> starts;
  starts.push_back(from_sigma(rho_b * (1.0 / rho_b.trace())));
  starts.push_back(from_sigma(HermitianOperator::maximally_mixed(bdims)));
  {
    // sigma_y proportional to max_a <a,y|rho|a,y>: optimal for classical inputs.
    const std::size_t da = rho.dim() / rho_b.dim();
    std::vector<double> d(static_cast<std::size_t>(db), 0.0);
    for (std::size_t a = 0; a < da; ++a)
      for (Eigen::Index y = 0; y < db; ++y)
        d[static_cast<std::size_t>(y)] =
            std::max(d[static_cast<std::size_t>(y)], rho(a * static_cast<std::size_t>(db) + static_cast<std::size_t>(y),
                                                         a * static_cast<std::size_t>(db) + static_cast<std::size_t>(y)).real());
    double t = 0.0;
    for (double v : d) t += v;
    if (t > 0.0) {
      for (double& v : d) v = std::max(v / t, 1e-300);
      starts.push_back(from_sigma(HermitianOperator::from_diagonal(bdims, d)));
    }
  }
  CounterRng rng(opt.seed, 0x51A);
  for (int s = 0; s < opt.random_starts; ++s) {
    std::vector<double> th(n);
    for (auto& v : th) v = rng.normal();
    starts.push_back(std::move(th));
  }

  double best = marginal;
  for (auto th : starts) {
    double f = objective(th);
    for (double step = opt.initial_step; step >= opt.final_step; step *= 0.5) {
      bool improved = true;
      for (int sweep = 0; improved && sweep < 200; ++sweep) {
        improved = false;
        for (std::size_t k = 0; k < n; ++k)
          for (double dir : {step, -step}) {
            const double old = th[k];
            th[k] = old + dir;
            const double g = objective(th);
            if (g > f + 1e-15) {
              f = g;
              improved = true;
              break;
            }
            th[k] = old;
          }
      }
    }
    best = std::max(best, f);
  }
  return best;
}

}  // namespace qkdsec
