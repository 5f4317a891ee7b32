#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bell_state.hpp"
#include "entropy.hpp"

namespace qkdsec {

// A numerical search that could not produce an answer (e.g. no sign change).
struct ComputationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Protocol { six_state, bb84, custom };

inline std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::six_state: return "six-state";
    case Protocol::bb84: return "bb84";
    case Protocol::custom: return "custom";
  }
  return "?";
}

inline Protocol parse_protocol(const std::string& s) {
  if (s == "six-state" || s == "sixstate" || s == "six_state") return Protocol::six_state;
  if (s == "bb84" || s == "BB84") return Protocol::bb84;
  if (s == "custom") return Protocol::custom;
  throw std::invalid_argument("unknown protocol '" + s + "'");
}

inline constexpr double kPositiveRateTol = 1e-12;
inline constexpr double kGoldenRatio = 0.6180339887498949;

struct ProtocolParams {
  Protocol protocol = Protocol::six_state;
  double e = 0.0;
  int b = 1;
  double q = 0.0;
  std::vector<BellDiagonalState> custom_gamma{};

  void validate() const {
    if (!(e >= 0.0 && e <= 0.5)) throw std::domain_error("error rate must lie in [0, 1/2]");
    if (!(q >= 0.0 && q <= 0.5)) throw std::domain_error("flip probability must lie in [0, 1/2]");
    if (b < 1) throw std::domain_error("block length must be >= 1");
    if (protocol == Protocol::custom && custom_gamma.empty())
      throw std::invalid_argument("custom protocol needs at least one Bell-diagonal state");
  }
};

// Golden-section search for the minimum of f on [lo, hi].
inline std::pair<double, double> golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                                                 double tol) {
  double a = lo, b = hi;
  double c = b - kGoldenRatio * (b - a);
  double d = a + kGoldenRatio * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGoldenRatio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGoldenRatio * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

// Bell-diagonal states compatible with the observed error rate.
// Six-state: a single state. BB84: lambda3 in [0, e] with lambda1 = lambda2 = e - lambda3.
class GammaSet {
 public:
  GammaSet(Protocol protocol, double e, std::vector<BellDiagonalState> custom = {}, double grid_step = 1e-4)
      : protocol_(protocol), e_(e), custom_(std::move(custom)), step_(grid_step) {
    if (!std::isfinite(e) || e < 0.0) throw std::domain_error("error rate must be nonnegative");
    if (protocol == Protocol::six_state && e > 2.0 / 3.0 + 1e-15)
      throw std::domain_error("six-state error rate must lie in [0, 2/3]");
    if (protocol == Protocol::bb84 && e > 0.5) throw std::domain_error("BB84 error rate must lie in [0, 1/2]");
    if (protocol == Protocol::custom && custom_.empty()) throw std::invalid_argument("empty custom Gamma");
    if (!(grid_step > 0.0)) throw std::invalid_argument("grid step must be positive");
  }

  static BellDiagonalState six_state(double e) { return {1.0 - 1.5 * e, 0.5 * e, 0.5 * e, 0.5 * e}; }

  static BellDiagonalState bb84(double e, double l3) { return {1.0 - 2.0 * e + l3, e - l3, e - l3, l3}; }

  std::vector<BellDiagonalState> members() const {
    switch (protocol_) {
      case Protocol::six_state: return {six_state(e_)};
      case Protocol::custom: return custom_;
      case Protocol::bb84: {
        std::vector<BellDiagonalState> out;
        for (double t : bb84_grid()) out.push_back(bb84(e_, t));
        return out;
      }
    }
    return {};
  }

  // min over the set of f(lambda), with grid plus golden-section refinement for BB84.
  std::pair<double, BellDiagonalState> minimize(const std::function<double(const BellDiagonalState&)>& f) const {
    if (protocol_ != Protocol::bb84) {
      auto ms = members();
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const double v = f(ms[i]);
        if (v < best) {
          best = v;
          arg = i;
        }
      }
      return {best, ms[arg]};
    }
    const auto grid = bb84_grid();
    auto g = [&](double t) { return f(bb84(e_, std::clamp(t, 0.0, e_))); };
    double best = std::numeric_limits<double>::infinity();
    double arg = 0.0;
    for (double t : grid) {
      const double v = g(t);
      if (v < best) {
        best = v;
        arg = t;
      }
    }
    if (e_ > 0.0) {
      const auto [t, v] = golden_minimize(g, std::max(0.0, arg - step_), std::min(e_, arg + step_), 1e-10);
      if (v < best) {
        best = v;
        arg = t;
      }
    }
    return {best, bb84(e_, arg)};
  }

  Protocol protocol() const { return protocol_; }
  double e() const { return e_; }

 private:
  std::vector<double> bb84_grid() const {
    std::vector<double> g;
    const auto steps = static_cast<std::size_t>(std::floor(e_ / step_ + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) g.push_back(static_cast<double>(i) * step_);
    if (g.back() < e_) g.push_back(e_);
    return g;
  }

  Protocol protocol_;
  double e_;
  std::vector<BellDiagonalState> custom_;
  double step_;
};

inline std::vector<BellDiagonalState> gamma_diag(Protocol protocol, double e, double grid_step = 1e-4) {
  return GammaSet(protocol, e, {}, grid_step).members();
}

namespace detail {

inline double h_clamped(double p) { return binary_entropy(std::clamp(p, 0.0, 1.0)); }

inline void require_normalized(const BellDiagonalState& l) {
  if (std::abs(l.sum() - 1.0) > 1e-9) throw std::domain_error("Bell coefficients must sum to 1");
}

}  // namespace detail

inline double entropy_diff_oneway(const BellDiagonalState& l) {
  detail::require_normalized(l);
  const double g1 = l.agree_mass(), g2 = l.error_mass();
  const double t1 = g1 > 0.0 ? g1 * detail::h_clamped(l[0] / g1) : 0.0;
  const double t2 = g2 > 0.0 ? g2 * detail::h_clamped(l[2] / g2) : 0.0;
  return 1.0 - t1 - t2 - detail::h_clamped(g1);
}

// h(1/2 + 1/2 sqrt(1 - 16 p(1-p) q(1-q))); the other sign gives the same value.
inline double hbar(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0)) throw std::domain_error("hbar arguments outside [0,1]");
  const double rad = std::clamp(1.0 - 16.0 * p * (1.0 - p) * q * (1.0 - q), 0.0, 1.0);
  return detail::h_clamped(0.5 + 0.5 * std::sqrt(rad));
}

// Entropy difference after Alice flips each bit with probability q.
inline double entropy_diff_noisy(const BellDiagonalState& l, double q) {
  detail::require_normalized(l);
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("flip probability outside [0,1]");
  const double g1 = l.agree_mass(), g2 = l.error_mass();
  double t1 = 0.0, t2 = 0.0;
  if (g1 > 0.0) {
    const double a = std::clamp(l[0] / g1, 0.0, 1.0);
    t1 = g1 * (detail::h_clamped(a) - hbar(a, q));
  }
  if (g2 > 0.0) {
    const double b = std::clamp(l[2] / g2, 0.0, 1.0);
    t2 = g2 * (detail::h_clamped(b) - hbar(b, q));
  }
  return 1.0 - t1 - t2 - detail::h_clamped(g1 * q + g2 * (1.0 - q));
}

struct AdResult {
  double p_succ;
  BellDiagonalState lambda;
};

// Bell coefficients of the state kept after one advantage-distillation round on blocks of b.
inline AdResult ad_transform(const BellDiagonalState& l, int b) {
  if (b < 1) throw std::domain_error("block length must be >= 1");
  detail::require_normalized(l);
  if (b == 1) return {1.0, l};
  const double g1 = std::pow(l.agree_mass(), b), g2 = std::pow(l.error_mass(), b);
  const double d1 = std::pow(l[0] - l[1], b), d2 = std::pow(l[2] - l[3], b);
  const double p = g1 + g2;
  if (!(p > 0.0)) throw ComputationError("advantage distillation success probability is 0");
  const double s = 2.0 * p;
  return {p, BellDiagonalState((g1 + d1) / s, (g1 - d1) / s, (g2 + d2) / s, (g2 - d2) / s)};
}

struct RateResult {
  Protocol protocol;
  double e;
  int b;
  double q;
  double rate;
  double rate_clamped;
  double p_succ;
  BellDiagonalState lambdas_used;

  bool positive() const { return rate > kPositiveRateTol; }
};

inline RateResult rate(const ProtocolParams& params, double grid_step = 1e-4) {
  params.validate();
  const GammaSet gamma(params.protocol, params.e, params.custom_gamma, grid_step);
  auto per_state = [&](const BellDiagonalState& l) {
    const auto ad = ad_transform(l, params.b);
    return ad.p_succ * entropy_diff_noisy(ad.lambda, params.q) / params.b;
  };
  const auto [value, arg] = gamma.minimize(per_state);
  return {params.protocol, params.e, params.b, params.q, value, std::max(0.0, value), ad_transform(arg, params.b).p_succ,
          arg};
}

struct PreprocessingOptimum {
  double q;
  RateResult result;
};

// argmax over q in [0, 1/2] of the rate: grid of step 1e-3 then golden section to 1e-6.
inline PreprocessingOptimum optimize_preprocessing(const ProtocolParams& base, double grid_step = 1e-3,
                                                   double refine_tol = 1e-6) {
  ProtocolParams p = base;
  auto eval = [&](double q) {
    p.q = std::clamp(q, 0.0, 0.5);
    return rate(p);
  };
  const auto n = static_cast<int>(std::round(0.5 / grid_step));
  RateResult best = eval(0.0);
  for (int i = 1; i <= n; ++i) {
    const auto r = eval(std::min(0.5, i * grid_step));
    if (r.rate > best.rate) best = r;
  }
  const double lo = std::max(0.0, best.q - grid_step), hi = std::min(0.5, best.q + grid_step);
  const auto [q, neg] = golden_minimize([&](double x) { return -eval(x).rate; }, lo, hi, refine_tol);
  if (-neg > best.rate) best = eval(q);
  return {best.q, best};
}

struct ThresholdOptions {
  double scan_step = 0.005;
  double tolerance = 1e-5;
  double q_grid_step = 1e-3;
};

// Largest e with a positive (optionally q-optimized) rate, by scan then bisection.
inline double find_threshold(Protocol protocol, int b, bool optimize_q, const ThresholdOptions& opt = {},
                             std::vector<BellDiagonalState> custom = {}) {
  if (protocol == Protocol::custom) throw std::invalid_argument("thresholds need a parameterized protocol");
  auto positive = [&](double e) {
    ProtocolParams p{protocol, e, b, 0.0, custom};
    if (!optimize_q) return rate(p).positive();
    return optimize_preprocessing(p, opt.q_grid_step).result.positive();
  };
  if (!positive(0.0)) throw ComputationError("rate is not positive at e = 0");
  double lo = 0.0, hi = -1.0;
  for (double e = opt.scan_step; e <= 0.5 + 1e-12; e += opt.scan_step) {
    const double ee = std::min(e, 0.5);
    if (!positive(ee)) {
      hi = ee;
      break;
    }
    lo = ee;
  }
  if (hi < 0.0) throw ComputationError("no sign change of the rate found for e in [0, 1/2]");
  while (hi - lo > opt.tolerance) {
    const double mid = 0.5 * (lo + hi);
    (positive(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct AdCriterion {
  double delta;
  double epsilon;
  bool positive;
};

// delta = e^b / ((1-e)^b + e^b), epsilon = ((1-2e)/(1-e))^b; positive iff epsilon^2 >= 6 delta.
inline AdCriterion asymptotic_ad_criterion(double e, int b) {
  if (!(e >= 0.0 && e < 0.5)) throw std::domain_error("error rate must lie in [0, 1/2)");
  if (b < 1) throw std::domain_error("block length must be >= 1");
  const double a = std::pow(1.0 - e, b), c = std::pow(e, b);
  const double delta = c / (a + c);
  const double eps = std::pow((1.0 - 2.0 * e) / (1.0 - e), b);
  return {delta, eps, eps * eps >= 6.0 * delta};
}

namespace detail {

// log(epsilon^2) - log(6 delta), decreasing in e.
inline double ad_margin(double e, int b) {
  if (e <= 0.0) return std::numeric_limits<double>::infinity();
  const double db = b;
  const double r = e / (1.0 - e);
  const double log_delta = db * std::log(r) - std::log1p(std::pow(r, db));
  return 2.0 * db * std::log((1.0 - 2.0 * e) / (1.0 - e)) - std::log(6.0) - log_delta;
}

}  // namespace detail

// Largest e satisfying the criterion at block length b.
inline double ad_threshold(int b, double tol = 1e-13) {
  double lo = 0.0, hi = 0.5 - 1e-15;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (detail::ad_margin(mid, b) >= 0.0 ? lo : hi) = mid;
  }
  return lo;
}

inline double ad_limit_analytic() { return 0.5 - std::sqrt(5.0) / 10.0; }

struct AdScan {
  std::vector<double> thresholds;  // index b-1
  double extrapolated;
};

// Thresholds for b = 1..b_max and the b -> infinity limit from a least-squares fit
// e_b = e_inf + c1/b + c2/b^2 over the upper half of the scan.
inline AdScan ad_limit_scan(int b_max) {
  if (b_max < 4) throw std::domain_error("b-scan needs b_max >= 4");
  AdScan out;
  for (int b = 1; b <= b_max; ++b) out.thresholds.push_back(ad_threshold(b));
  const int from = b_max / 2;
  Eigen::MatrixXd a(b_max - from + 1, 3);
  Eigen::VectorXd y(b_max - from + 1);
  for (int b = from; b <= b_max; ++b) {
    const double x = 1.0 / b;
    a.row(b - from) << 1.0, x, x * x;
    y(b - from) = out.thresholds[static_cast<std::size_t>(b - 1)];
  }
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(y);
  out.extrapolated = coef(0);
  return out;
}

// Leading-order rate near the zero of the criterion.
inline double series_rate_approx(double delta, double epsilon, double q) {
  return 4.0 / std::log(8.0) * (1.0 - delta) * (epsilon * epsilon - 6.0 * delta) * (0.5 - q) * (0.5 - q);
}

// Bell coefficients parameterized by (delta, epsilon) as in the series expansion.
inline BellDiagonalState lambda_from_delta_epsilon(double delta, double epsilon) {
  return {(1.0 - delta) * (1.0 + epsilon) / 2.0, (1.0 - delta) * (1.0 - epsilon) / 2.0, delta / 2.0, delta / 2.0};
}

struct SweepSpec {
  Protocol protocol = Protocol::six_state;
  double e_min = 0.0, e_max = 0.0, e_step = 0.01;
  std::vector<int> b_values{1};
  std::vector<double> q_values{0.0};
  bool optimize_q = false;
};

inline std::vector<double> grid_points(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument("invalid grid");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> g;
  for (std::size_t i = 0; i <= n; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

// Rows ordered by e, then b, then q.
inline std::vector<RateResult> sweep(const SweepSpec& s) {
  std::vector<RateResult> rows;
  for (double e : grid_points(s.e_min, s.e_max, s.e_step))
    for (int b : s.b_values) {
      if (s.optimize_q) {
        rows.push_back(optimize_preprocessing({s.protocol, e, b, 0.0}).result);
        continue;
      }
      for (double q : s.q_values) rows.push_back(rate({s.protocol, e, b, q}));
    }
  return rows;
}

inline std::string format_sig(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline const char* kRateCsvHeader = "e,b,q,rate,rate_clamped,p_succ,lambda0,lambda1,lambda2,lambda3";

inline std::string to_csv_row(const RateResult& r) {
  std::string s = format_sig(r.e) + "," + std::to_string(r.b) + "," + format_sig(r.q) + "," + format_sig(r.rate) + "," +
                  format_sig(r.rate_clamped) + "," + format_sig(r.p_succ);
  for (double l : r.lambdas_used.values()) s += "," + format_sig(l);
  return s;
}

inline void write_csv(std::ostream& out, const std::vector<RateResult>& rows) {
  out << kRateCsvHeader << "\n";
  for (const auto& r : rows) out << to_csv_row(r) << "\n";
}

inline nlohmann::ordered_json to_json(const RateResult& r) {
  nlohmann::ordered_json j;
  j["protocol"] = to_string(r.protocol);
  j["e"] = r.e;
  j["b"] = r.b;
  j["q"] = r.q;
  j["rate"] = r.rate;
  j["rate_clamped"] = r.rate_clamped;
  j["p_succ"] = r.p_succ;
  j["lambdas"] = r.lambdas_used.values();
  return j;
}

}  // namespace qkdsec
