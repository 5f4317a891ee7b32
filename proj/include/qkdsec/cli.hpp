#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "distribution.hpp"
#include "entropy.hpp"
#include "finitekey.hpp"
#include "keyrate.hpp"
#include "pipeline.hpp"
#include "smooth.hpp"

namespace qkdsec {

enum ExitCode : int { kExitOk = 0, kExitAbort = 1, kExitUsage = 2 };

namespace detail {

inline std::string threshold_str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// Writes to --output when given, otherwise to `out`.
struct Sink {
  std::string path;
  std::ostream* out;

  void write(const std::string& text) const {
    if (path.empty()) {
      *out << text;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file " + path);
    f << text;
  }
};

}  // namespace detail

inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Secret-key rates, thresholds, entropies, post-processing simulation and finite-key bounds"};
  app.name("qkdsec");
  app.require_subcommand(1);
  app.fallthrough(false);

  std::string protocol_s = "six-state", format, output;
  double e = 0.0, q = 0.0, eps = 0.0;
  int b = 1;
  bool optimize_q = false;
  const auto protocols = CLI::IsMember({"six-state", "bb84"});

  auto add_output = [&](CLI::App* s, const std::string& default_format) {
    s->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->default_str(default_format);
    s->add_option("--output", output, "Write the result to this file instead of stdout");
  };

  // rate
  auto* rate_cmd = app.add_subcommand("rate", "Asymptotic key rate for one parameter point");
  rate_cmd->add_option("--protocol", protocol_s, "six-state or bb84")->required()->check(protocols);
  rate_cmd->add_option("--e", e, "Error rate")->required()->check(CLI::Range(0.0, 0.5));
  rate_cmd->add_option("--b", b, "Advantage-distillation block length")->check(CLI::Range(1, 100000));
  auto* rate_q = rate_cmd->add_option("--q", q, "Noisy-preprocessing flip probability")->check(CLI::Range(0.0, 0.5));
  rate_cmd->add_flag("--optimize-q", optimize_q, "Maximize the rate over q")->excludes(rate_q);
  add_output(rate_cmd, "csv");
  rate_cmd->footer("CSV columns: " + std::string(kRateCsvHeader));

  // threshold
  int b_scan = 0;
  auto* thr_cmd = app.add_subcommand("threshold", "Largest error rate with a positive key rate");
  thr_cmd->add_option("--protocol", protocol_s, "six-state or bb84")->check(protocols);
  auto* thr_b = thr_cmd->add_option("--b", b, "Advantage-distillation block length")->check(CLI::Range(1, 100000));
  thr_cmd->add_flag("--optimize-q", optimize_q, "Optimize the preprocessing flip probability");
  thr_cmd->add_option("--b-scan", b_scan, "Scan the asymptotic advantage-distillation criterion for b = 1..max")
      ->check(CLI::Range(4, 100000))
      ->excludes(thr_b);
  add_output(thr_cmd, "csv");
  thr_cmd->footer("--b-scan CSV columns: b,threshold (last row b=inf is the extrapolated limit)");

  // sweep
  double e_min = 0.0, e_max = 0.0, e_step = 0.01;
  auto* sweep_cmd = app.add_subcommand("sweep", "Rate table over a grid of error rates");
  sweep_cmd->add_option("--protocol", protocol_s, "six-state or bb84")->required()->check(protocols);
  sweep_cmd->add_option("--e-min", e_min, "First error rate")->required()->check(CLI::Range(0.0, 0.5));
  sweep_cmd->add_option("--e-max", e_max, "Last error rate")->required()->check(CLI::Range(0.0, 0.5));
  sweep_cmd->add_option("--e-step", e_step, "Grid step")->required()->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--b", b, "Advantage-distillation block length")->check(CLI::Range(1, 100000));
  auto* sweep_q = sweep_cmd->add_option("--q", q, "Flip probability")->check(CLI::Range(0.0, 0.5));
  sweep_cmd->add_flag("--optimize-q", optimize_q, "Optimize q at every grid point")->excludes(sweep_q);
  add_output(sweep_cmd, "csv");
  sweep_cmd->footer("CSV columns: " + std::string(kRateCsvHeader));

  // entropy
  std::string input, measure;
  auto* ent_cmd = app.add_subcommand("entropy", "Entropy of a distribution table, conditioned on its last column");
  ent_cmd->add_option("--input", input, "Table file: 'label_1 ... label_k weight' per line")->required()->check(CLI::ExistingFile);
  ent_cmd->add_option("--measure", measure, "Entropy measure")
      ->required()
      ->check(CLI::IsMember({"shannon", "min", "max", "collision", "smooth-min", "smooth-max"}));
  ent_cmd->add_option("--eps", eps, "Smoothing parameter")->check(CLI::Range(0.0, 0.999999999));
  add_output(ent_cmd, "csv");

  // simulate
  std::size_t n_raw = 0, ell = 0, sim_b = 1;
  std::string ir = "hash";
  std::uint64_t seed = 0;
  double ir_eps = 1e-3, pa_eps = 1e-6;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the post-processing pipeline on a simulated source");
  sim_cmd->add_option("--n", n_raw, "Raw key length")->required()->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));
  sim_cmd->add_option("--e", e, "Error rate")->required()->check(CLI::Range(0.0, 0.5));
  sim_cmd->add_option("--b", sim_b, "Advantage-distillation block length")->check(CLI::Range(std::size_t{1}, std::size_t{1000}));
  sim_cmd->add_option("--ir", ir, "Reconciliation scheme")->check(CLI::IsMember({"hash", "repetition", "hamming"}));
  sim_cmd->add_option("--ell", ell, "Final key length")->required()->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
  sim_cmd->add_option("--seed", seed, "RNG seed");
  sim_cmd->add_option("--ir-eps", ir_eps, "Reconciliation failure budget")->check(CLI::Range(1e-15, 0.5));
  sim_cmd->add_option("--pa-eps", pa_eps, "Privacy-amplification security parameter")->check(CLI::Range(1e-15, 0.5));
  sim_cmd->add_option("--output", output, "Write the report to this file instead of stdout");

  // finite-key
  std::uint64_t big_n = 0, fk_b = 1, fk_m = 0, fk_k = 0;
  double fk_eps = 1e-9;
  std::optional<double> fk_e;
  auto* fk_cmd = app.add_subcommand("finite-key", "Finite-key security parameters and key length");
  fk_cmd->add_option("--N", big_n, "Number of signals")->required()->check(CLI::Range(std::uint64_t{10}, std::uint64_t{1} << 62));
  fk_cmd->add_option("--b", fk_b, "Block length")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1000}));
  fk_cmd->add_option("--eps", fk_eps, "Security parameter")->check(CLI::Range(1e-300, 0.999999));
  auto* fk_m_opt = fk_cmd->add_option("--m", fk_m, "Parameter-estimation sample count")->check(CLI::PositiveNumber);
  auto* fk_k_opt = fk_cmd->add_option("--k", fk_k, "Discarded subsystem count")->check(CLI::PositiveNumber);
  fk_m_opt->needs(fk_k_opt);
  fk_k_opt->needs(fk_m_opt);
  fk_cmd->add_option("--e", fk_e, "Error rate: also report the key length for --protocol")->check(CLI::Range(0.0, 0.5));
  fk_cmd->add_option("--protocol", protocol_s, "six-state or bb84")->check(protocols);
  add_output(fk_cmd, "json");

  std::vector<std::string> argv_s{"qkdsec"};
  argv_s.insert(argv_s.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_s) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex, out, err);
    return kExitUsage;
  }

  const detail::Sink sink{output, &out};
  if (format.empty()) format = *fk_cmd ? "json" : "csv";
  const bool json = format == "json";
  try {
    if (*rate_cmd) {
      ProtocolParams p{parse_protocol(protocol_s), e, b, q};
      const RateResult r = optimize_q ? optimize_preprocessing(p).result : rate(p);
      if (json)
        sink.write(to_json(r).dump(2) + "\n");
      else
        sink.write(std::string(kRateCsvHeader) + "\n" + to_csv_row(r) + "\n");
      return kExitOk;
    }
    if (*thr_cmd) {
      if (b_scan > 0) {
        const auto scan = ad_limit_scan(b_scan);
        if (json) {
          nlohmann::ordered_json j;
          j["b_max"] = b_scan;
          j["thresholds"] = scan.thresholds;
          j["extrapolated_limit"] = scan.extrapolated;
          j["analytic_limit"] = ad_limit_analytic();
          sink.write(j.dump(2) + "\n");
        } else {
          std::ostringstream s;
          s << "b,threshold\n";
          for (std::size_t i = 0; i < scan.thresholds.size(); ++i)
            s << i + 1 << "," << format_sig(scan.thresholds[i]) << "\n";
          s << "inf," << format_sig(scan.extrapolated) << "\n";
          sink.write(s.str());
        }
        return kExitOk;
      }
      const double t = find_threshold(parse_protocol(protocol_s), b, optimize_q);
      if (json) {
        nlohmann::ordered_json j;
        j["protocol"] = protocol_s;
        j["b"] = b;
        j["optimize_q"] = optimize_q;
        j["threshold"] = t;
        sink.write(j.dump(2) + "\n");
      } else {
        sink.write(detail::threshold_str(t) + "\n");
      }
      return kExitOk;
    }
    if (*sweep_cmd) {
      if (e_max < e_min) throw std::invalid_argument("--e-max must not be below --e-min");
      SweepSpec s{parse_protocol(protocol_s), e_min, e_max, e_step, {b}, {q}, optimize_q};
      const auto rows = sweep(s);
      if (json) {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& r : rows) j.push_back(to_json(r));
        sink.write(j.dump(2) + "\n");
      } else {
        std::ostringstream o;
        write_csv(o, rows);
        sink.write(o.str());
      }
      return kExitOk;
    }
    if (*ent_cmd) {
      std::ifstream f(input);
      const auto p = parse_distribution(f);
      double v = 0.0;
      const bool single = p.factors() == 1;
      std::vector<std::size_t> last{p.factors() - 1};
      const JointDistribution qd = single ? JointDistribution({}, {1.0}) : p.marginal(last);
      if (measure == "shannon")
        v = single ? (std::abs(p.total() - 1.0) > kNormTol ? throw std::domain_error("distribution is not normalized")
                                                           : shannon_entropy(p.weights()))
                   : shannon_conditional(p, p.factors() - 1);
      else if (measure == "min")
        v = classical_min_entropy(p, qd);
      else if (measure == "max")
        v = classical_max_entropy(p, qd);
      else if (measure == "collision")
        v = classical_collision_entropy(p, qd);
      else if (measure == "smooth-min")
        v = smooth_min_entropy_classical(p, qd, eps);
      else
        v = smooth_max_entropy_classical(p, qd, eps);
      if (json) {
        nlohmann::ordered_json j;
        j["measure"] = measure;
        j["eps"] = eps;
        j["value"] = v;
        sink.write(j.dump(2) + "\n");
      } else {
        sink.write("measure,eps,value\n" + measure + "," + format_sig(eps) + "," + format_sig(v) + "\n");
      }
      return kExitOk;
    }
    if (*sim_cmd) {
      PipelineConfig cfg;
      cfg.n_raw = n_raw;
      cfg.e = e;
      cfg.b = sim_b;
      cfg.ir = parse_ir_scheme(ir);
      cfg.ell = ell;
      cfg.seed = seed;
      cfg.ir_eps = ir_eps;
      cfg.pa_eps = pa_eps;
      const auto rep = run_pipeline(cfg);
      for (const auto& w : rep.warnings) err << "warning: " << w << "\n";
      sink.write(rep.dump() + "\n");
      if (rep.aborted) {
        err << "aborted at stage " << rep.abort_stage << "\n";
        return kExitAbort;
      }
      return kExitOk;
    }
    if (*fk_cmd) {
      const auto p = fk_m_opt->count() ? FiniteKeyParams::with_mk(big_n, fk_b, fk_eps, fk_m, fk_k)
                                       : FiniteKeyParams::schedule(big_n, fk_b, fk_eps);
      auto j = bound_report(p);
      int code = kExitOk;
      if (fk_e) {
        const auto r = rate({parse_protocol(protocol_s), *fk_e, static_cast<int>(fk_b), 0.0});
        const double asym = r.rate;
        j["asymptotic_rate"] = asym;
        if (j["valid"].get<bool>()) {
          const auto l = finite_key_length(p, asym * static_cast<double>(fk_b), 0.0);
          j["key_length"] = l;
          j["key_rate"] = static_cast<double>(l) / static_cast<double>(p.N);
        } else {
          code = kExitAbort;
        }
      }
      if (!j["valid"].get<bool>()) err << "invalid parameters: " << j["reason"].get<std::string>() << "\n";
      if (json) {
        sink.write(j.dump(2) + "\n");
      } else {
        std::ostringstream o;
        o << "quantity,value\n";
        for (auto it = j.begin(); it != j.end(); ++it) {
          o << it.key() << ",";
          if (it.value().is_number_float())
            o << format_sig(it.value().get<double>());
          else
            o << it.value().dump();
          o << "\n";
        }
        sink.write(o.str());
      }
      return code;
    }
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitAbort;
  }
  return kExitUsage;
}

}  // namespace qkdsec
