#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cohinfo/capacity.hpp"
#include "cohinfo/channel_spec.hpp"
#include "cohinfo/parallel.hpp"
#include "cohinfo/serialize.hpp"
#include "cohinfo/tomography.hpp"
#include "cohinfo/version.hpp"

namespace cohinfo {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct HelpRequested {
  std::string text;
};

enum class Command { ci, optimize, singularity, scan_delta, tomo_state, tomo_process };

inline const char* command_name(Command c) {
  switch (c) {
    case Command::ci: return "ci";
    case Command::optimize: return "optimize";
    case Command::singularity: return "singularity";
    case Command::scan_delta: return "scan-delta";
    case Command::tomo_state: return "tomo-state";
    case Command::tomo_process: return "tomo-process";
  }
  return "?";
}

struct JobConfig {
  Command command = Command::ci;
  std::string channel_spec;
  std::string channel_b_spec;
  std::string state_spec;
  std::string family_spec;
  bool general = false;
  std::string via = "direct";        // ci: direct | purification
  std::string side = "output";       // singularity: output | env
  std::string method = "spectral";   // singularity: spectral | regression
  std::array<double, 2> window{1e-4, 1e-1};
  int window_points = 40;
  std::string axis = "r1";           // scan-delta: r1 | r2 | r3
  std::vector<double> fixed;         // scan-delta: the two non-axis values
  int grid = 51;
  std::int64_t shots = 100000;
  std::uint64_t seed = 1;
  int resamples = 0;
  int restarts = 16;
  std::optional<double> qa;
  std::optional<double> qb;
  bool emit_counts = false;
  std::string format = "json";       // json | csv
  std::string output_path;           // empty: stdout
  int threads = 0;                   // 0: resolve from COHINFO_THREADS
};

struct CurvePoint {
  double param = 0.0;
  double value = 0.0;
  std::optional<double> std_dev;
};

/// CSV writer: header `param,value[,std]`, one row per point, ascending
/// parameter order, 17 significant digits (doubles round-trip exactly).
inline void emit_csv(const std::vector<CurvePoint>& curve, std::ostream& os) {
  if (curve.empty()) throw std::invalid_argument("emit_csv: empty curve");
  const bool with_std = curve.front().std_dev.has_value();
  os << (with_std ? "param,value,std\n" : "param,value\n");
  char buf[64];
  auto fmt = [&buf](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  for (const CurvePoint& pt : curve) {
    os << fmt(pt.param) << ',' << fmt(pt.value);
    if (with_std) os << ',' << fmt(pt.std_dev.value_or(0.0));
    os << '\n';
  }
  if (!os) throw std::runtime_error("emit_csv: write failed");
}

namespace detail {

inline void parse_fixed_spec(const std::string& spec, const std::string& axis,
                             JobConfig& cfg) {
  // e.g. "r2=0.07,r3=0.27"; exactly the two non-axis parameters, any order.
  std::array<std::optional<double>, 3> values;
  for (const std::string& part : split_top_level(spec, ',')) {
    const std::size_t eq = part.find('=');
    if (eq == std::string::npos)
      throw UsageError("--fixed entries must look like r2=0.07: " + part);
    const std::string key = part.substr(0, eq);
    if (key != "r1" && key != "r2" && key != "r3")
      throw UsageError("--fixed keys must be r1, r2 or r3: " + part);
    const int idx = key[1] - '1';
    if (values[idx].has_value()) throw UsageError("--fixed repeats " + key);
    values[idx] = parse_number(part.substr(eq + 1), "--fixed");
  }
  const int axis_idx = axis[1] - '1';
  if (values[axis_idx].has_value())
    throw UsageError("--fixed must not pin the scan axis " + axis);
  cfg.fixed.clear();
  for (int a = 0; a < 3; ++a) {
    if (a == axis_idx) continue;
    if (!values[a].has_value())
      throw UsageError("--fixed is missing r" + std::to_string(a + 1));
    cfg.fixed.push_back(*values[a]);
  }
}

/// Constructs every object named in the config and discards it, so malformed
/// specs surface as usage errors before any computation starts.
inline void validate_specs(const JobConfig& cfg) {
  switch (cfg.command) {
    case Command::ci: {
      const KrausChannel ch = parse_channel(cfg.channel_spec);
      const DensityMatrix rho = parse_state_point(cfg.state_spec);
      if (rho.dim() != ch.d_in)
        throw UsageError("state dimension does not match channel input");
      if (cfg.via != "direct" && cfg.via != "purification")
        throw UsageError("--via must be direct or purification");
      break;
    }
    case Command::optimize: {
      const KrausChannel ch = parse_channel(cfg.channel_spec);
      if (!cfg.general) {
        const StateFamily fam = parse_family(cfg.family_spec);
        const DensityMatrix probe =
            fam.generator(std::vector<double>(fam.arity, 0.0));
        if (probe.dim() != ch.d_in)
          throw UsageError("family dimension does not match channel input");
      } else if (ch.d_in > 8) {
        throw UsageError("--general supports input dimension up to 8");
      }
      break;
    }
    case Command::singularity: {
      const KrausChannel ch = parse_channel(cfg.channel_spec);
      const StateFamily fam = parse_family(cfg.family_spec);
      if (fam.arity != 1) throw UsageError("singularity needs a one-parameter family");
      const DensityMatrix probe = fam.generator({0.0});
      if (probe.dim() != ch.d_in)
        throw UsageError("family dimension does not match channel input");
      if (cfg.side != "output" && cfg.side != "env")
        throw UsageError("--side must be output or env");
      if (cfg.method != "spectral" && cfg.method != "regression")
        throw UsageError("--method must be spectral or regression");
      if (!(cfg.window[0] > 0.0 && cfg.window[1] > cfg.window[0]))
        throw UsageError("--window must satisfy 0 < lo < hi");
      break;
    }
    case Command::scan_delta: {
      const KrausChannel a = parse_channel(cfg.channel_spec);
      const KrausChannel b = parse_channel(cfg.channel_b_spec);
      const StateFamily fam = parse_family(cfg.family_spec);
      if (fam.arity != 3) throw UsageError("scan-delta needs a three-parameter family");
      const DensityMatrix probe = fam.generator({0.0, 0.0, 0.0});
      if (probe.dim() != a.d_in * b.d_in)
        throw UsageError("family dimension does not match the joint channel input");
      break;
    }
    case Command::tomo_state: {
      const DensityMatrix rho = parse_state_point(cfg.state_spec);
      int dim = rho.dim();
      if (!cfg.channel_spec.empty()) {
        const KrausChannel ch = parse_channel(cfg.channel_spec);
        if (rho.dim() != ch.d_in)
          throw UsageError("state dimension does not match channel input");
        dim = ch.d_out;
      }
      if (dim < 2 || dim > 8) throw UsageError("tomography dimension must lie in [2, 8]");
      if (cfg.shots < 1) throw UsageError("tomo-state needs --shots >= 1");
      break;
    }
    case Command::tomo_process: {
      const KrausChannel ch = parse_channel(cfg.channel_spec);
      if (ch.d_in > 6) throw UsageError("tomo-process supports input dimension up to 6");
      if (ch.d_out < 2 || ch.d_out > 8)
        throw UsageError("tomo-process output dimension must lie in [2, 8]");
      break;
    }
  }
  if (cfg.format != "json" && cfg.format != "csv")
    throw UsageError("--format must be json or csv");
  if (cfg.format == "csv" && cfg.command != Command::scan_delta)
    throw UsageError("--format csv is only available for scan-delta");
}

}  // namespace detail

/// Builds the validated JobConfig from raw arguments (without argv[0]).
/// Throws UsageError for anything malformed, HelpRequested for -h/--help.
inline JobConfig parse_args(std::vector<std::string> args) {
  CLI::App app{"coherent-information toolkit for finite-dimensional quantum channels"};
  app.require_subcommand(1);

  JobConfig cfg;
  std::string fixed_spec;

  auto add_common = [&cfg](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "RNG seed recorded in the output");
    sub->add_option("--output", cfg.output_path, "write the result to this file");
    sub->add_option("--format", cfg.format, "json (default) or csv (curves only)");
  };

  CLI::App* ci = app.add_subcommand("ci", "coherent information of a channel at a state");
  ci->add_option("--channel", cfg.channel_spec, "channel spec, e.g. platypus:3")->required();
  ci->add_option("--state", cfg.state_spec, "state spec, e.g. u:0.445")->required();
  ci->add_option("--via", cfg.via, "evaluation route: direct | purification");
  add_common(ci);

  CLI::App* opt = app.add_subcommand("optimize", "maximize coherent information");
  opt->add_option("--channel", cfg.channel_spec)->required();
  opt->add_option("--family", cfg.family_spec, "family spec: u | wv:<v> | r");
  opt->add_flag("--general", cfg.general, "optimize over all input states");
  opt->add_option("--grid", cfg.grid, "grid points per axis for the family search");
  opt->add_option("--restarts", cfg.restarts, "random restarts for --general");
  add_common(opt);

  CLI::App* sing = app.add_subcommand("singularity", "log-singularity rate of the entropy");
  sing->add_option("--channel", cfg.channel_spec)->required();
  sing->add_option("--family", cfg.family_spec, "one-parameter family: u | wv:<v>")->required();
  sing->add_option("--side", cfg.side, "output (default) or env");
  sing->add_option("--method", cfg.method, "spectral (default) or regression");
  sing->add_option("--window", cfg.window, "regression window lo hi")->expected(2);
  sing->add_option("--points", cfg.window_points, "regression sample count");
  add_common(sing);

  CLI::App* scan = app.add_subcommand("scan-delta", "nonadditivity along one family axis");
  scan->add_option("--channel-a", cfg.channel_spec)->required();
  scan->add_option("--channel-b", cfg.channel_b_spec)->required();
  scan->add_option("--family", cfg.family_spec, "family spec (default r)");
  scan->add_option("--axis", cfg.axis, "scan axis: r1 | r2 | r3")->required();
  scan->add_option("--fixed", fixed_spec, "the other two values, e.g. r2=0.07,r3=0.27")
      ->required();
  scan->add_option("--grid", cfg.grid, "number of scan points");
  scan->add_option("--qa", cfg.qa, "single-channel maximum of channel A");
  scan->add_option("--qb", cfg.qb, "single-channel maximum of channel B");
  scan->add_option("--restarts", cfg.restarts, "restarts when qa/qb are auto-computed");
  scan->add_option("--threads", cfg.threads, "worker cap (default: COHINFO_THREADS)");
  add_common(scan);

  CLI::App* tstate = app.add_subcommand("tomo-state", "simulated state tomography");
  tstate->add_option("--state", cfg.state_spec)->required();
  tstate->add_option("--channel", cfg.channel_spec, "optionally send the state through this");
  tstate->add_option("--shots", cfg.shots, "shots per measurement setting");
  tstate->add_option("--resamples", cfg.resamples, "Monte Carlo resamples for error bars");
  tstate->add_flag("--emit-counts", cfg.emit_counts, "include the raw counts in the output");
  add_common(tstate);

  CLI::App* tproc = app.add_subcommand("tomo-process", "simulated process tomography");
  tproc->add_option("--channel", cfg.channel_spec)->required();
  tproc->add_option("--shots", cfg.shots, "shots per probe and setting; 0 = exact");
  add_common(tproc);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    CLI::App* active = nullptr;
    for (CLI::App* sub : app.get_subcommands()) active = sub;
    throw HelpRequested{active != nullptr ? active->help() : app.help()};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (ci->parsed()) cfg.command = Command::ci;
  else if (opt->parsed()) cfg.command = Command::optimize;
  else if (sing->parsed()) cfg.command = Command::singularity;
  else if (scan->parsed()) cfg.command = Command::scan_delta;
  else if (tstate->parsed()) cfg.command = Command::tomo_state;
  else cfg.command = Command::tomo_process;

  if (cfg.command == Command::optimize && cfg.general != cfg.family_spec.empty())
    throw UsageError("optimize needs exactly one of --family or --general");
  if (cfg.command == Command::scan_delta) {
    if (cfg.family_spec.empty()) cfg.family_spec = "r";
    if (cfg.axis != "r1" && cfg.axis != "r2" && cfg.axis != "r3")
      throw UsageError("--axis must be r1, r2 or r3");
    detail::parse_fixed_spec(fixed_spec, cfg.axis, cfg);
  }
  if (cfg.shots < 0) throw UsageError("--shots must be nonnegative");
  if (cfg.grid < 1) throw UsageError("--grid must be positive");

  try {
    detail::validate_specs(cfg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

struct RunOutcome {
  nlohmann::json envelope;
  std::vector<CurvePoint> curve;
  int exit_code = 0;
};

/// Executes a validated config and builds the result envelope. Numerical
/// failures (non-convergence, ill-conditioning) yield exit code 1.
inline RunOutcome run(const JobConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutcome out;
  nlohmann::json config_echo{{"seed", cfg.seed}};
  nlohmann::json results;

  switch (cfg.command) {
    case Command::ci: {
      const KrausChannel ch = parse_channel(cfg.channel_spec);
      const DensityMatrix rho = parse_state_point(cfg.state_spec);
      config_echo["channel"] = cfg.channel_spec;
      config_echo["state"] = cfg.state_spec;
      config_echo["via"] = cfg.via;
      const double value = cfg.via == "purification"
                               ? coherent_information_via_purification(ch, rho)
                               : coherent_information(ch, rho);
      const CoherentInfoEvaluator eval(ch);
      results["coherent_information"] = value;
      results["entropy_output"] = von_neumann_entropy(eval.output_state(rho));
      results["entropy_environment"] = von_neumann_entropy(eval.environment_state(rho));
      break;
    }
    case Command::optimize: {
      const KrausChannel ch = parse_channel(cfg.channel_spec);
      config_echo["channel"] = cfg.channel_spec;
      OptimizationResult r;
      if (cfg.general) {
        config_echo["mode"] = "general";
        config_echo["restarts"] = cfg.restarts;
        r = optimize_ci_general(ch, cfg.restarts, cfg.seed);
      } else {
        config_echo["mode"] = "family";
        config_echo["family"] = cfg.family_spec;
        config_echo["grid"] = cfg.grid;
        r = optimize_ci_family(ch, parse_family(cfg.family_spec), cfg.grid);
      }
      results["best_params"] = r.best_params;
      results["best_value"] = r.best_value;
      results["evaluations"] = r.evaluations;
      results["converged"] = r.converged;
      if (!r.converged) out.exit_code = 1;
      break;
    }
    case Command::singularity: {
      const KrausChannel ch = parse_channel(cfg.channel_spec);
      const StateFamily fam = parse_family(cfg.family_spec);
      config_echo["channel"] = cfg.channel_spec;
      config_echo["family"] = cfg.family_spec;
      config_echo["side"] = cfg.side;
      config_echo["method"] = cfg.method;
      const KrausChannel target = cfg.side == "env" ? complementary(ch) : ch;
      SingularityEstimate est;
      if (cfg.method == "spectral") {
        est = singularity_rate_spectral(target, fam);
      } else {
        config_echo["window"] = cfg.window;
        config_echo["points"] = cfg.window_points;
        est = singularity_rate_regression(target, fam, cfg.window, cfg.window_points);
      }
      results["x"] = est.x;
      results["method"] = cfg.method;
      results["fit_residual"] = est.fit_residual;
      results["eps_window"] = est.eps_window;
      break;
    }
    case Command::scan_delta: {
      const KrausChannel a = parse_channel(cfg.channel_spec);
      const KrausChannel b = parse_channel(cfg.channel_b_spec);
      const StateFamily fam = parse_family(cfg.family_spec);
      config_echo["channel_a"] = cfg.channel_spec;
      config_echo["channel_b"] = cfg.channel_b_spec;
      config_echo["family"] = cfg.family_spec;
      config_echo["axis"] = cfg.axis;
      config_echo["fixed"] = cfg.fixed;
      config_echo["grid"] = cfg.grid;
      const double qa = cfg.qa ? *cfg.qa : optimize_ci_general(a, cfg.restarts, cfg.seed).best_value;
      const double qb = cfg.qb ? *cfg.qb : optimize_ci_general(b, cfg.restarts, cfg.seed).best_value;
      results["qa"] = qa;
      results["qa_source"] = cfg.qa ? "supplied" : "optimized";
      results["qb"] = qb;
      results["qb_source"] = cfg.qb ? "supplied" : "optimized";
      const int axis_idx = cfg.axis[1] - '1';
      const int threads = cfg.threads > 0 ? cfg.threads : thread_cap_from_env();
      const auto curve = scan_delta(a, b, fam, axis_idx, {cfg.fixed[0], cfg.fixed[1]},
                                    cfg.grid, qa, qb, threads);
      for (const auto& [p, v] : curve) out.curve.push_back({p, v, std::nullopt});
      break;
    }
    case Command::tomo_state: {
      DensityMatrix truth = parse_state_point(cfg.state_spec);
      config_echo["state"] = cfg.state_spec;
      if (!cfg.channel_spec.empty()) {
        truth = apply(parse_channel(cfg.channel_spec), truth);
        config_echo["channel"] = cfg.channel_spec;
      }
      config_echo["shots"] = cfg.shots;
      const ProjectorSet ps = ic_projectors(truth.dim());
      const CountRecord counts = simulate_counts(truth, ps, cfg.shots, cfg.seed);
      const ReconstructionResult rec = mle_reconstruct(counts, ps);
      results["fidelity_to_truth"] = fidelity(rec.rho_hat, truth);
      results["entropy_estimate"] = von_neumann_entropy(rec.rho_hat);
      results["entropy_truth"] = von_neumann_entropy(truth);
      results["log_likelihood"] = rec.log_likelihood;
      results["iterations"] = rec.iterations;
      results["converged"] = rec.converged;
      if (cfg.resamples >= 2) {
        config_echo["resamples"] = cfg.resamples;
        results["mc_std_entropy"] = monte_carlo_errors(counts, ps, cfg.resamples);
      }
      if (cfg.emit_counts) results["counts"] = counts_to_json(counts, ps);
      if (!rec.converged) out.exit_code = 1;
      break;
    }
    case Command::tomo_process: {
      const KrausChannel ch = parse_channel(cfg.channel_spec);
      config_echo["channel"] = cfg.channel_spec;
      config_echo["shots"] = cfg.shots;
      const ProcessTomographyResult r = process_tomography(ch, ch.d_in, cfg.shots, cfg.seed);
      results["process_fidelity"] = r.fidelity_to_truth;
      results["all_converged"] = r.all_converged;
      results["exact"] = cfg.shots == 0;
      if (!r.all_converged) out.exit_code = 1;
      break;
    }
  }

  if (!out.curve.empty()) {
    nlohmann::json curve_json = nlohmann::json::array();
    for (const CurvePoint& pt : out.curve) {
      nlohmann::json row = {pt.param, pt.value};
      if (pt.std_dev) row.push_back(*pt.std_dev);
      curve_json.push_back(std::move(row));
    }
    out.envelope["curve"] = std::move(curve_json);
  }
  const auto t1 = std::chrono::steady_clock::now();
  out.envelope["command"] = command_name(cfg.command);
  out.envelope["config"] = std::move(config_echo);
  out.envelope["results"] = std::move(results);
  out.envelope["seed"] = cfg.seed;
  out.envelope["version"] = kVersion;
  // Kept in its own object so byte-level comparisons can drop it.
  out.envelope["timing"] = {
      {"wall_time_ms",
       std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()}};
  return out;
}

/// argv-level entry point; maps outcomes onto the exit-code contract
/// (0 success, 1 numerical failure, 2 usage error).
inline int cli_main(int argc, const char* const* argv) {
  JobConfig cfg;
  try {
    cfg = parse_args(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const HelpRequested& h) {
    std::cout << h.text;
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  RunOutcome out;
  try {
    out = run(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (cfg.format == "csv") {
      if (cfg.output_path.empty()) {
        emit_csv(out.curve, std::cout);
      } else {
        std::ofstream file(cfg.output_path);
        if (!file) throw std::runtime_error("cannot open " + cfg.output_path);
        emit_csv(out.curve, file);
      }
    } else {
      const std::string text = out.envelope.dump(2) + "\n";
      if (cfg.output_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream file(cfg.output_path);
        if (!file) throw std::runtime_error("cannot open " + cfg.output_path);
        file << text;
        if (!file) throw std::runtime_error("write failed: " + cfg.output_path);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return out.exit_code;
}

}  // namespace cohinfo
