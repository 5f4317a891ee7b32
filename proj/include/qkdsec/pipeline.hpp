#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "advantage.hpp"
#include "estimation.hpp"
#include "hashing.hpp"
#include "reconciliation.hpp"
#include "smooth.hpp"

namespace qkdsec {

enum class IrScheme { hash, repetition, hamming };

inline IrScheme parse_ir_scheme(const std::string& s) {
  if (s == "hash") return IrScheme::hash;
  if (s == "repetition") return IrScheme::repetition;
  if (s == "hamming") return IrScheme::hamming;
  throw std::invalid_argument("unknown reconciliation scheme '" + s + "'");
}

inline std::string to_string(IrScheme s) {
  switch (s) {
    case IrScheme::hash: return "hash";
    case IrScheme::repetition: return "repetition";
    case IrScheme::hamming: return "hamming";
  }
  return "?";
}

struct PipelineConfig {
  std::size_t n_raw = 1000;
  double e = 0.0;
  std::size_t b = 1;
  IrScheme ir = IrScheme::hash;
  std::size_t repetition_length = 3;
  double ir_eps = 1e-3;
  double pa_eps = 1e-6;
  double pe_eps = 1e-6;
  std::size_t ell = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> pe_samples{};  // default n_raw / 10

  std::size_t pe_count() const { return pe_samples.value_or(std::max<std::size_t>(1, n_raw / 10)); }

  void validate() const {
    if (n_raw < 2) throw std::invalid_argument("n_raw must be at least 2");
    if (!(e >= 0.0 && e <= 0.5)) throw std::domain_error("error rate must lie in [0, 1/2]");
    if (b < 1) throw std::invalid_argument("block length must be >= 1");
    if (ell < 1) throw std::invalid_argument("output key length must be >= 1");
    if (pe_count() == 0 || pe_count() >= n_raw) throw std::invalid_argument("parameter estimation sample count must lie in [1, n_raw)");
    for (double v : {ir_eps, pa_eps, pe_eps})
      if (!(v > 0.0 && v < 1.0)) throw std::domain_error("failure budgets must lie in (0,1)");
    if (ir == IrScheme::repetition && repetition_length < 1) throw std::invalid_argument("repetition length must be >= 1");
  }
};

inline constexpr std::uint64_t kPeStream = 0x9E;
inline constexpr std::uint64_t kPaStream = 0x9A;
inline constexpr double kPipelineMaxBallLog2 = 22.0;

struct PipelineReport {
  nlohmann::json json;
  bool aborted = false;
  std::string abort_stage;
  bool agreement = false;
  BitString key_a, key_b;
  std::vector<std::string> warnings;

  std::string dump() const { return json.dump(2); }
};

// PE -> AD -> IR -> PA on a simulated BSC source. Every random choice derives from cfg.seed.
inline PipelineReport run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  PipelineReport rep;
  nlohmann::json& j = rep.json;
  j["config"] = {{"n_raw", cfg.n_raw}, {"e", cfg.e}, {"b", cfg.b}, {"ir", to_string(cfg.ir)},
                 {"ir_eps", cfg.ir_eps}, {"pa_eps", cfg.pa_eps}, {"pe_eps", cfg.pe_eps},
                 {"ell", cfg.ell}, {"seed", cfg.seed}, {"pe_samples", cfg.pe_count()}};
  auto abort_at = [&](const std::string& stage, const std::string& why) {
    rep.aborted = true;
    rep.abort_stage = stage;
    j["aborted"] = true;
    j["abort_stage"] = stage;
    j["abort_reason"] = why;
    j["agreement"] = false;
    j["warnings"] = rep.warnings;
    return rep;
  };

  auto [x0, y0] = sample_bsc_pair(cfg.n_raw, cfg.e, cfg.seed);

  // Parameter estimation on a random subset; those positions are discarded.
  const std::size_t m = cfg.pe_count();
  std::vector<std::size_t> perm(cfg.n_raw);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  CounterRng pe_rng(cfg.seed, kPeStream);
  for (std::size_t i = 0; i < m; ++i) std::swap(perm[i], perm[i + pe_rng.below(cfg.n_raw - i)]);
  std::vector<bool> tested(cfg.n_raw, false);
  std::vector<std::size_t> samples;
  for (std::size_t i = 0; i < m; ++i) {
    tested[perm[i]] = true;
    samples.push_back(x0.get(perm[i]) != y0.get(perm[i]) ? 1 : 0);
  }
  const double tol = hoeffding_l1_tolerance(m, cfg.pe_eps);
  const auto pe = parameter_estimate(samples, 2, {{1.0 - cfg.e, cfg.e}, tol});
  j["pe"] = {{"samples", m}, {"observed_error", pe.frequencies[1]}, {"distance", pe.distance},
             {"tolerance", tol}, {"accepted", pe.accept}};
  if (!pe.accept) return abort_at("pe", "observed statistics outside the acceptance region");
  BitString x, y;
  for (std::size_t i = 0; i < cfg.n_raw; ++i)
    if (!tested[i]) {
      x.push_back(x0.get(i));
      y.push_back(y0.get(i));
    }

  // Advantage distillation.
  double e_key = cfg.e;
  if (cfg.b > 1) {
    auto ad = advantage_distill(x, y, cfg.b, cfg.seed);
    j["ad"] = {{"blocks", ad.blocks}, {"accepted", ad.accepted}, {"accept_rate", ad.accept_rate()},
               {"public_bits", ad.public_bits}, {"errors_after", ad.errors()}};
    if (ad.accepted == 0) return abort_at("ad", "no block accepted");
    x = std::move(ad.x_out);
    y = std::move(ad.y_out);
    const double a = std::pow(1.0 - cfg.e, static_cast<double>(cfg.b));
    const double c = std::pow(cfg.e, static_cast<double>(cfg.b));
    e_key = c / (a + c);
  } else {
    j["ad"] = {{"blocks", 0}, {"accepted", 0}, {"accept_rate", 1.0}, {"public_bits", 0}, {"errors_after", (x ^ y).weight()}};
  }

  // Information reconciliation.
  std::size_t leak = 0;
  BitString xa, xb;
  nlohmann::json ir;
  ir["scheme"] = to_string(cfg.ir);
  if (cfg.ir == IrScheme::hash) {
    const std::size_t n = x.size();
    std::size_t len = n;
    HashIrParams prm{};
    std::size_t blocks = 1;
    for (;;) {
      blocks = (n + len - 1) / len;
      prm = choose_hash_ir(len, e_key, cfg.ir_eps / static_cast<double>(blocks));
      if (prm.log2_ball <= kPipelineMaxBallLog2 || len == 1) break;
      len = (len + 1) / 2;
    }
    std::size_t total_candidates = 0;
    for (std::size_t k = 0; k < blocks; ++k) {
      const std::size_t start = k * len, bl = std::min(len, n - start);
      const auto p = bl == len ? prm : choose_hash_ir(bl, e_key, cfg.ir_eps / static_cast<double>(blocks));
      const auto tr = ir_hash_encode(x.slice(start, bl), p.k, cfg.seed + k);
      const auto dec = ir_hash_decode(y.slice(start, bl), tr, p.t, cfg.seed + k);
      leak += tr.leakage_bits;
      total_candidates += dec.candidates;
      if (dec.aborted()) {
        ir["leakage_bits"] = leak;
        ir["success"] = false;
        j["ir"] = ir;
        return abort_at("ir", "no candidate matched the hash in block " + std::to_string(k));
      }
      xa.append(x.slice(start, bl));
      xb.append(*dec.x_hat);
    }
    ir["block_length"] = len;
    ir["blocks"] = blocks;
    ir["radius"] = prm.t;
    ir["hash_bits"] = prm.k;
    ir["candidates"] = total_candidates;
  } else {
    const auto code = cfg.ir == IrScheme::hamming ? LinearCode::hamming84() : LinearCode::repetition(cfg.repetition_length);
    const std::size_t usable = x.size() / code.length() * code.length();
    if (usable == 0) return abort_at("ir", "fewer bits than one code block");
    const auto xs = x.slice(0, usable), ys = y.slice(0, usable);
    const auto tr = ir_code_encode(xs, code, cfg.seed);
    const auto dec = ir_code_decode(ys, tr, code);
    leak = tr.leakage_bits;
    ir["code"] = code.name();
    ir["blocks"] = usable / code.length();
    ir["discarded_bits"] = x.size() - usable;
    if (dec.aborted()) {
      ir["leakage_bits"] = leak;
      ir["success"] = false;
      j["ir"] = ir;
      return abort_at("ir", "decoder detected an uncorrectable block");
    }
    xa = xs;
    xb = *dec.x_hat;
  }
  ir["leakage_bits"] = leak;
  ir["success"] = xa == xb;
  ir["residual_errors"] = (xa ^ xb).weight();
  j["ir"] = ir;

  // Privacy amplification.
  const std::size_t nk = xa.size();
  const double hmin = smooth_min_entropy_classes({{-static_cast<double>(nk), 1.0, static_cast<double>(nk)}}, cfg.pa_eps);
  const double admissible_real = hmin - static_cast<double>(leak) - 2.0 * std::log2(1.0 / cfg.pa_eps);
  const long long admissible = admissible_real > 0.0 ? static_cast<long long>(std::floor(admissible_real)) : 0;
  j["pa"] = {{"input_bits", nk}, {"ell", cfg.ell}, {"ell_admissible", admissible}, {"smooth_min_entropy", hmin}};
  if (static_cast<long long>(cfg.ell) > admissible)
    rep.warnings.push_back("ell = " + std::to_string(cfg.ell) + " exceeds the admissible length " +
                           std::to_string(admissible));
  if (cfg.ell > nk) return abort_at("pa", "ell exceeds the reconciled key length " + std::to_string(nk));
  const auto f = sample_hash(nk, cfg.ell, cfg.seed ^ kPaStream);
  rep.key_a = privacy_amplify(xa, f);
  rep.key_b = privacy_amplify(xb, f);
  rep.agreement = rep.key_a == rep.key_b;
  j["key_a"] = rep.key_a.to_hex();
  j["key_b"] = rep.key_b.to_hex();
  j["agreement"] = rep.agreement;
  j["total_leakage"] = leak;
  j["aborted"] = false;
  j["abort_stage"] = nullptr;
  j["warnings"] = rep.warnings;
  return rep;
}

}  // namespace qkdsec
