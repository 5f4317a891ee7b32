#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "lemma_checks.hpp"

using namespace qkdsec;
using namespace qkdsec::testing;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void report(int id, bool ok, double secs, double limit, const std::string& detail) {
  const bool pass = ok && secs < limit;
  if (!pass) ++failures;
  std::printf("[%s] %d: %s (%.2f s, limit %.0f s)\n", pass ? "PASS" : "FAIL", id, detail.c_str(), secs, limit);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

void criterion1() {
  const auto t0 = Clock::now();
  const double t = find_threshold(Protocol::six_state, 1, false);
  const double secs = seconds_since(t0);
  report(1, std::abs(t - 0.1260) <= 5e-4, secs, 1.0, fmt("six-state one-way threshold %.6f, target 0.1260 +- 0.0005", t));
}

void criterion2() {
  const auto t0 = Clock::now();
  const double t = find_threshold(Protocol::six_state, 1, true);
  const double secs = seconds_since(t0);
  report(2, std::abs(t - 0.141) <= 1e-3, secs, 10.0,
         fmt("six-state threshold with preprocessing %.6f, target 0.141 +- 0.001", t));
}

void criterion3() {
  const auto t0 = Clock::now();
  const double plain = find_threshold(Protocol::bb84, 1, false);
  const double noisy = find_threshold(Protocol::bb84, 1, true);
  const double secs = seconds_since(t0);
  report(3, std::abs(plain - 0.110) <= 1e-3 && std::abs(noisy - 0.124) <= 1e-3, secs, 30.0,
         fmt("BB84 thresholds %.6f and %.6f with preprocessing, targets 0.110 and 0.124 +- 0.001", plain, noisy));
}

void criterion4() {
  const double target = 0.5 - std::sqrt(5.0) / 10.0;
  const auto t0 = Clock::now();
  const auto scan = ad_limit_scan(200);
  const double analytic = ad_limit_analytic();
  const double secs = seconds_since(t0);
  bool monotone = true;
  for (std::size_t i = 1; i < scan.thresholds.size(); ++i) monotone &= scan.thresholds[i] >= scan.thresholds[i - 1];
  report(4, std::abs(scan.extrapolated - target) <= 1e-4 && std::abs(analytic - target) <= 1e-4 && monotone, secs, 5.0,
         fmt("advantage-distillation limit: scan to b=200 gives %.6f, analytic %.6f, target %.6f +- 1e-4",
             scan.extrapolated, analytic, target));
}

void criterion5() {
  const auto t0 = Clock::now();
  CounterRng rng(5);
  std::size_t instances = 0, violations = 0;
  double worst = -INFINITY;
  auto check = [&](const JointDistribution& p, std::size_t l) {
    const auto r = pa_distance_exhaustive(p, l);
    ++instances;
    worst = std::max(worst, r.avg_distance - r.bound);
    violations += r.avg_distance > r.bound + 1e-10;
  };
  for (std::size_t nx = 2; nx <= kPaMaxX; ++nx) {
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < nx) ++bits;
    for (std::size_t ne = 1; ne <= kPaMaxE; ++ne) {
      for (std::size_t l = 1; l <= std::min(bits, kPaMaxL); ++l) {
        check(JointDistribution::with_sizes({nx, ne}, random_weights(nx * ne, rng)), l);
        check(JointDistribution::with_sizes({nx, ne}, random_weights(nx * ne, rng, 0.5, 0.2 + 0.8 * rng.uniform())), l);
        // E determines X up to its residue class modulo ne.
        std::vector<double> w(nx * ne, 0.0);
        for (std::size_t x = 0; x < nx; ++x) w[x * ne + x % ne] = 1.0 / static_cast<double>(nx);
        check(JointDistribution::with_sizes({nx, ne}, w), l);
      }
    }
  }
  const double secs = seconds_since(t0);
  report(5, violations == 0, secs, 120.0,
         fmt("privacy amplification: %zu exhaustive instances, %zu violations, max(avg - bound) = %.3g", instances,
             violations, worst));
}

void criterion6() {
  const auto t0 = Clock::now();
  std::size_t relations = 0, bad = 0, lemmas = 0;
  double worst = 0.0;
  std::uint64_t seed = 600;
  for (const auto& c : lemma_checks()) {
    const auto t = run_lemma(c, 1000, seed++, 1e-9);
    ++lemmas;
    relations += t.relations;
    bad += t.failures;
    worst = std::max(worst, t.worst);
    if (t.failures) std::printf("       %s: %zu failing relations, worst %.3g\n", c.name, t.failures, t.worst);
  }
  const double secs = seconds_since(t0);
  report(6, bad == 0 && lemmas == 8, secs, 120.0,
         fmt("entropy calculus: %zu lemmas x 1000 instances, %zu relations, %zu beyond 1e-9 (worst %.3g)", lemmas,
             relations, bad, worst));
}

void criterion7() {
  const std::size_t n = 10000;
  const double eps = 1e-3, h = binary_entropy(0.1);
  const double delta = aep_delta(static_cast<double>(n), 2, eps);
  const auto t0 = Clock::now();
  const auto classes = bsc_product_classes(n, 0.1);
  const double hmin = smooth_min_entropy_classes(classes, eps) / n;
  const double hmax = smooth_max_entropy_classes(classes, eps) / n;
  const double secs = seconds_since(t0);
  report(7, hmin >= h - delta && hmax <= h + delta && std::abs(delta - 0.10366) < 1e-5, secs, 60.0,
         fmt("classical AEP: Hmin/n = %.6f >= %.6f, Hmax/n = %.6f <= %.6f (h = %.6f, delta = %.5f)", hmin, h - delta,
             hmax, h + delta, h, delta));
}

void criterion8() {
  const auto t0 = Clock::now();
  const double e = 0.05;
  const std::size_t b = 3, blocks = 100000;
  const auto [x, y] = sample_bsc_pair(blocks * b, e, 8);
  const auto ad = advantage_distill(x, y, b, 8);
  const double acc_exp = std::pow(1 - e, 3) + std::pow(e, 3);
  const double err_exp = std::pow(e, 3) / acc_exp;
  const double acc = static_cast<double>(ad.accepted) / static_cast<double>(ad.blocks);
  const double err = static_cast<double>((ad.x_out ^ ad.y_out).weight()) / static_cast<double>(ad.accepted);
  const bool ad_ok = ad.blocks == blocks && std::abs(acc - acc_exp) <= 3 * std::sqrt(acc_exp * (1 - acc_exp) / blocks) &&
                     std::abs(err - err_exp) <= 3 * std::sqrt(err_exp * (1 - err_exp) / ad.accepted);

  const std::size_t n = 20, trials = 10000;
  const double ir_eps = 1e-3;
  const auto prm = choose_hash_ir(n, 0.1, ir_eps);
  std::size_t ir_fail = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const auto [xi, yi] = sample_bsc_pair(n, 0.1, 100000 + i);
    const auto tr = ir_hash_encode(xi, prm.k, 200000 + i);
    const auto dec = ir_hash_decode(yi, tr, prm.t, i);
    ir_fail += dec.aborted() || *dec.x_hat != xi;
  }
  const double ir_rate = static_cast<double>(ir_fail) / trials;

  PipelineConfig cfg;
  cfg.n_raw = 20000;
  cfg.e = 0.03;
  cfg.b = 1;
  cfg.ir = IrScheme::hash;
  cfg.ell = 16;
  cfg.seed = 7;
  const std::string a = run_pipeline(cfg).dump(), c = run_pipeline(cfg).dump();
  const double secs = seconds_since(t0);
  report(8, ad_ok && ir_rate <= ir_eps && a == c, secs, 60.0,
         fmt("simulator: AD accept %.6f (expect %.6f), accepted error %.4g (expect %.4g), hash IR failure %.4g <= %.0e, "
             "seed-7 reports %s",
             acc, acc_exp, err, err_exp, ir_rate, ir_eps, a == c ? "identical" : "differ"));
}

void criterion9() {
  const auto t0 = Clock::now();
  const double asym = rate({Protocol::six_state, 0.05, 1, 0.0}).rate;
  const auto p = FiniteKeyParams::schedule(1000000000000ULL, 1, 1e-9);
  const auto s = security_deltas(p);
  const double key_rate =
      s.valid ? static_cast<double>(finite_key_length(p, asym, 0.0)) / static_cast<double>(p.N) : NAN;
  const double secs = seconds_since(t0);
  report(9, s.valid && std::abs(key_rate - asym) <= 0.01, secs, 1.0,
         fmt("finite key at N=1e12: l/N = %.6f, asymptotic six-state rate at e=0.05 = %.6f, gap %.6f, tolerance 0.01",
             key_rate, asym, asym - key_rate));
  const double expected = static_cast<double>(p.n) / static_cast<double>(p.N) * (asym - s.delta);
  std::printf("[INFO] 9: delta = %.6f; l/N matches n/N (rate - delta) = %.6f within %.1e\n", s.delta, expected,
              std::abs(key_rate - expected));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                    criterion6, criterion7, criterion8, criterion9};
  for (const auto& c : criteria) {
    try {
      c();
    } catch (const std::exception& ex) {
      ++failures;
      std::printf("[FAIL] exception: %s\n", ex.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures ? 1 : 0;
}
