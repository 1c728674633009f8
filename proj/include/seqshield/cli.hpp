#pragma once

// Command-line front end. `run_cli` is the whole program; tools/seqshield.cpp
// only forwards argv.
//
// Exit codes: 0 success, 2 usage or validation error, 3 I/O error. Errors
// print one line on the diagnostic stream:
//   seqshield: error=<usage|validation|parse|io|internal> message="..."

#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "seqshield/adversary.hpp"
#include "seqshield/coordinator.hpp"
#include "seqshield/errors.hpp"
#include "seqshield/experiments.hpp"
#include "seqshield/results_io.hpp"
#include "seqshield/rules.hpp"
#include "seqshield/scenario.hpp"
#include "seqshield/schedule_core.hpp"

namespace seqshield::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse " + what + " value '" + s + "'");
  }
}

inline std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) out.push_back(parse_double(tok, what));
  if (out.empty()) throw ValidationError(what + " list is empty");
  return out;
}

inline std::vector<int> parse_cases(const std::string& s) {
  std::vector<int> out;
  for (double v : parse_list(s, "--cases")) {
    if (v != std::floor(v) || v < 1 || v > 7) throw ValidationError("case ids must be integers in 1..7");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

inline std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string human(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

struct ThetaFlags {
  std::optional<double> w;
  std::optional<double> kappa;
  bool theta0 = false;

  void add(CLI::App* app) {
    app->add_option("--w", w, "trust weight in [0,1] for untrusted vehicles");
    app->add_option("--kappa", kappa, "admissible-interval shrink factor in [0,1]");
    app->add_flag("--theta0", theta0, "baseline rule (w=0, kappa=1)");
  }
  RuleParams resolve() const {
    if (theta0 && (w || kappa)) throw ValidationError("--theta0 cannot be combined with --w/--kappa");
    RuleParams p = RuleParams::baseline();
    if (w) p.w = *w;
    if (kappa) p.kappa = *kappa;
    seqshield::validate(p);
    return p;
  }
};

struct GridFlags {
  std::string w_grid;
  std::string kappa_grid;

  void add(CLI::App* app) {
    app->add_option("--w-grid", w_grid, "trust-weight grid start:stop:step (default 0:1:0.1)");
    app->add_option("--kappa-grid", kappa_grid, "kappa values v1,v2,... (default 0.25,0.5,0.75,1)");
  }
  std::vector<RuleParams> resolve() const {
    if (w_grid.empty() && kappa_grid.empty()) return default_theta_grid();
    double start = 0.0, stop = 1.0, step = 0.1;
    if (!w_grid.empty()) {
      const auto parts = split(w_grid, ':');
      if (parts.size() != 3) throw ValidationError("--w-grid must be start:stop:step");
      start = parse_double(parts[0], "--w-grid");
      stop = parse_double(parts[1], "--w-grid");
      step = parse_double(parts[2], "--w-grid");
    }
    const std::vector<double> kappas =
        kappa_grid.empty() ? std::vector<double>{0.25, 0.5, 0.75, 1.0} : parse_list(kappa_grid, "--kappa-grid");
    return make_theta_grid(start, stop, step, kappas);
  }
};

struct SearchFlags {
  int grid_points = 201;
  int attack_points = 21;
  int refine_iters = 2;
  int max_iters = 100;
  bool eval_proxy = false;

  void add(CLI::App* app, bool with_proxy = true) {
    app->add_option("--grid-points", grid_points, "best-response grid points per vehicle")->capture_default_str();
    app->add_option("--attack-points", attack_points, "worst-case grid points per untrusted vehicle")
        ->capture_default_str();
    app->add_option("--refine-iters", refine_iters, "worst-case coordinate-ascent rounds")->capture_default_str();
    app->add_option("--max-iters", max_iters, "best-response sweeps")->capture_default_str();
    if (with_proxy) app->add_flag("--eval-proxy", eval_proxy, "score tuning against surveillance ETAs");
  }
  SearchConfigs resolve() const {
    SearchConfigs c;
    c.best_response.grid_points = grid_points;
    c.best_response.max_iters = max_iters;
    c.attack.grid_points_per_dim = attack_points;
    c.attack.refine_iters = refine_iters;
    c.eval_proxy = eval_proxy;
    return c;
  }
  nlohmann::ordered_json to_json() const {
    return {{"grid_points", grid_points},
            {"attack_points", attack_points},
            {"refine_iters", refine_iters},
            {"max_iters", max_iters},
            {"eval_proxy", eval_proxy}};
  }
};

inline nlohmann::ordered_json grid_json(const std::vector<RuleParams>& grid) {
  auto a = nlohmann::ordered_json::array();
  for (const auto& p : grid) a.push_back({p.w, p.kappa});
  return a;
}

inline Scenario load_scenario_file(const std::string& path) {
  if (path.empty()) throw ValidationError("--scenario is required");
  return load_scenario(read_file(path));
}

inline void write_or_print(const std::string& path, const std::string& bytes, std::ostream& out) {
  if (path.empty())
    out << bytes;
  else
    write_file(path, bytes);
}

inline std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

}  // namespace detail

/// Runs the CLI with `args` (without the program name).
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  using namespace detail;
  CLI::App app{"Secure vertiport arrival sequencing simulator", "seqshield"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string scenario_path, out_path;
  std::uint64_t seed = 0;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "master RNG seed")->envname("SEQSHIELD_SEED")->capture_default_str();
  };

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random scenario file");
  int gen_n = 6, gen_m = 1;
  double gen_horizon = -1.0, gen_smin = 2.0, gen_eps = 0.5, gen_sigma = -1.0;
  auto add_generation = [&](CLI::App* sub) {
    sub->add_option("--n", gen_n, "vehicle count")->capture_default_str();
    sub->add_option("--horizon", gen_horizon, "ETA horizon in seconds (default 10*s_min)");
    sub->add_option("--s-min", gen_smin, "minimum separation in seconds")->capture_default_str();
    sub->add_option("--sigma", gen_sigma, "surveillance-noise half-width (default epsilon/2)");
    sub->add_option("--epsilon", gen_eps, "uncertainty half-width")->capture_default_str();
    sub->add_option("--m-size", gen_m, "number of untrusted vehicles")->capture_default_str();
    add_seed(sub);
  };
  auto generate = [&] {
    if (gen_n < 0 || gen_m < 0) throw ValidationError("--n and --m-size must be >= 0");
    const double horizon = gen_horizon < 0.0 ? 10.0 * gen_smin : gen_horizon;
    const double sigma = gen_sigma < 0.0 ? gen_eps / 2.0 : gen_sigma;
    return generate_scenario(static_cast<std::size_t>(gen_n), horizon, gen_smin, sigma, gen_eps,
                             static_cast<std::size_t>(gen_m), seed);
  };
  add_generation(gen);
  gen->add_option("--out", out_path, "scenario file to write (stdout if omitted)");

  // solve
  auto* solve = app.add_subcommand("solve", "schedule one report profile under a rule");
  ThetaFlags solve_theta;
  std::string deltas_arg;
  solve->add_option("--scenario", scenario_path, "scenario JSON")->required();
  solve->add_option("--deltas", deltas_arg, "per-vehicle deviations d1,d2,... (default truthful)");
  solve->add_option("--out", out_path, "write the report here instead of stdout");
  solve_theta.add(solve);

  // best-response
  auto* br = app.add_subcommand("best-response", "self-interested best responses");
  ThetaFlags br_theta;
  SearchFlags br_search;
  int br_vehicle = 0;
  br->add_option("--scenario", scenario_path, "scenario JSON")->required();
  br->add_option("--vehicle", br_vehicle, "single untrusted vehicle id (default: iterate over all)");
  br->add_option("--out", out_path, "write the report here instead of stdout");
  br_theta.add(br);
  br_search.add(br, false);

  // worst-case
  auto* wc = app.add_subcommand("worst-case", "malicious worst-case deviation");
  ThetaFlags wc_theta;
  SearchFlags wc_search;
  wc->add_option("--scenario", scenario_path, "scenario JSON")->required();
  wc->add_option("--out", out_path, "write the report here instead of stdout");
  wc_theta.add(wc);
  wc_search.add(wc, false);

  // tune
  auto* tn = app.add_subcommand("tune", "grid-search the rule parameters");
  std::string mode_arg;
  GridFlags tn_grid;
  SearchFlags tn_search;
  tn->add_option("--mode", mode_arg, "self | malicious")->required()->check(CLI::IsMember({"self", "malicious"}));
  tn->add_option("--scenario", scenario_path, "scenario JSON")->required();
  tn->add_option("--out", out_path, "per-theta CSV (stdout summary only if omitted)");
  tn_grid.add(tn);
  tn_search.add(tn);

  // cases
  auto* cs = app.add_subcommand("cases", "run the seven-case study on one scenario");
  std::string cases_arg = "1,2,3,4,5,6,7";
  GridFlags cs_grid;
  SearchFlags cs_search;
  int cs_jobs = 1;
  auto* cs_scenario = cs->add_option("--scenario", scenario_path, "scenario JSON (generated from --seed if omitted)");
  cs->add_option("--cases", cases_arg, "comma-separated case ids")->capture_default_str();
  cs->add_option("--out", out_path, "results CSV (stdout if omitted)");
  cs->add_option("--jobs", cs_jobs, "accepted for symmetry with sweep; a single scenario runs serially");
  add_generation(cs);
  for (const char* flag : {"--n", "--horizon", "--s-min", "--sigma", "--epsilon", "--m-size"})
    cs_scenario->excludes(cs->get_option(flag));
  cs_grid.add(cs);
  cs_search.add(cs);

  // sweep
  auto* sw = app.add_subcommand("sweep", "sensitivity sweep over one generation parameter");
  std::string sw_param, sw_values;
  int sw_reps = 1, sw_jobs = 1;
  BaseConfig sw_base;
  std::optional<double> sw_sigma, sw_horizon;
  GridFlags sw_grid;
  SearchFlags sw_search;
  sw->add_option("--param", sw_param, "n | s_min | sigma | m_size | epsilon")->required();
  sw->add_option("--values", sw_values, "comma-separated values")->required();
  sw->add_option("--reps", sw_reps, "scenarios per value")->capture_default_str();
  sw->add_option("--jobs", sw_jobs, "worker threads")->capture_default_str();
  sw->add_option("--n", sw_base.n, "base vehicle count")->capture_default_str();
  sw->add_option("--s-min", sw_base.s_min, "base separation")->capture_default_str();
  sw->add_option("--epsilon", sw_base.epsilon, "base uncertainty half-width")->capture_default_str();
  sw->add_option("--sigma", sw_sigma, "base noise half-width (default epsilon/2)");
  sw->add_option("--horizon", sw_horizon, "ETA horizon (default 10*s_min)");
  sw->add_option("--m-size", sw_base.m_size, "base untrusted count")->capture_default_str();
  sw->add_option("--out", out_path, "results CSV (stdout if omitted)");
  add_seed(sw);
  sw_grid.add(sw);
  sw_search.add(sw);

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  auto fail = [&](const char* kind, const std::string& msg, int code) {
    std::string m = msg;
    for (auto& c : m)
      if (c == '\n' || c == '"') c = c == '\n' ? ' ' : '\'';
    err << "seqshield: error=" << kind << " message=\"" << m << "\"\n";
    return code;
  };

  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), kExitUsage);
  }

  try {
    if (*gen) {
      const Scenario s = generate();
      write_or_print(out_path, serialize_scenario(s), out);
      return kExitOk;
    }

    if (*solve) {
      const Scenario s = load_scenario_file(scenario_path);
      const RuleParams p = solve_theta.resolve();
      DeviationVector d = DeviationVector::zeros(s.size());
      if (!deltas_arg.empty()) d.delta = parse_list(deltas_arg, "--deltas");
      const ReportVector r = apply_deviation(s, d);
      const std::vector<double> u = effective_etas(r, s, p);
      const Schedule sch = solve_schedule(u, s.s_min);
      const ScheduleCost ct = schedule_cost(sch, s.true_etas());
      const ScheduleCost cr = schedule_cost(sch, r.tau_hat);
      std::ostringstream os;
      os << "rule: w=" << human(p.w) << " kappa=" << human(p.kappa) << "\n";
      os << "order:";
      for (int id : sch.order) os << ' ' << id;
      os << "\ntimes:";
      for (int id = 1; id <= static_cast<int>(s.size()); ++id) os << ' ' << human(sch.time_of(id));
      os << "\ncost_true: " << human(ct.total) << "\ncost_reported: " << human(cr.total) << "\n";
      os << "id,report,surv_tau,admissible,effective,assigned,cost_true\n";
      for (const auto& v : s.vehicles) {
        const std::size_t i = static_cast<std::size_t>(v.id - 1);
        os << v.id << ',' << human(r.tau_hat[i]) << ',' << human(v.surv_tau) << ','
           << (admissible(r.tau_hat[i], v.surv_tau, v.epsilon) ? 1 : 0) << ',' << human(u[i]) << ','
           << human(sch.times[i]) << ',' << human(ct.per_vehicle[i]) << "\n";
      }
      write_or_print(out_path, os.str(), out);
      return kExitOk;
    }

    if (*br) {
      const Scenario s = load_scenario_file(scenario_path);
      const RuleParams p = br_theta.resolve();
      const SearchConfigs c = br_search.resolve();
      std::ostringstream os;
      if (br_vehicle != 0) {
        const BestResponseResult res =
            best_response(s, p, br_vehicle, DeviationVector::zeros(s.size()), c.best_response.grid_points);
        os << "vehicle,delta_star,own_cost,truthful_cost,candidates\n";
        os << br_vehicle << ',' << human(res.delta_star) << ',' << human(res.own_cost) << ','
           << human(own_cost_at(s, p, br_vehicle, DeviationVector::zeros(s.size()), 0.0)) << ','
           << res.candidates_evaluated << "\n";
      } else {
        const FixedPointResult fp = iterated_best_response(s, p, c.best_response);
        os << "converged: " << (fp.converged ? "true" : "false") << "\niterations: " << fp.iterations << "\n";
        os << "vehicle,delta_star,own_cost\n";
        for (int id : s.untrusted_ids())
          os << id << ',' << human(fp.deltas[id]) << ',' << human(own_cost_at(s, p, id, fp.deltas, fp.deltas[id]))
             << "\n";
        os << "cost_true: " << human(system_cost_under(s, p, fp.deltas)) << "\n";
      }
      write_or_print(out_path, os.str(), out);
      return kExitOk;
    }

    if (*wc) {
      const Scenario s = load_scenario_file(scenario_path);
      const RuleParams p = wc_theta.resolve();
      const AttackResult atk = worst_case_deviation(s, p, wc_search.resolve().attack);
      std::ostringstream os;
      os << "worst_cost: " << human(atk.worst_cost) << "\n";
      os << "truthful_cost: " << human(system_cost_under(s, p, DeviationVector::zeros(s.size()))) << "\n";
      os << "candidates: " << atk.candidates_evaluated << "\ndeltas:";
      for (double d : atk.deltas.delta) os << ' ' << human(d);
      os << "\n";
      write_or_print(out_path, os.str(), out);
      return kExitOk;
    }

    if (*tn) {
      const Scenario s = load_scenario_file(scenario_path);
      const auto grid = tn_grid.resolve();
      const TuneMode mode = mode_arg == "self" ? TuneMode::self_interested : TuneMode::malicious;
      RunManifest man;
      man.command = "tune";
      man.started_utc = utc_now();
      const TuneResult res = tune(s, mode, grid, tn_search.resolve());
      out << "mode: " << to_string(mode) << "\ntheta_star: w=" << human(res.theta_star.w)
          << " kappa=" << human(res.theta_star.kappa) << "\nobjective: " << human(res.objective) << "\n";
      if (!out_path.empty()) {
        std::string csv = "rule_w,rule_kappa,objective,br_converged\n";
        for (const auto& e : res.per_theta)
          csv += seqshield::detail::shortest(e.theta.w) + "," + seqshield::detail::shortest(e.theta.kappa) + "," +
                 seqshield::detail::shortest(e.objective) + "," + (e.converged ? "1" : "0") + "\n";
        write_file(out_path, csv);
        man.config = {{"scenario", scenario_path}, {"mode", to_string(mode)}, {"theta_grid", grid_json(grid)},
                      {"search", tn_search.to_json()}};
        man.master_seed = s.seed;
        man.outputs.push_back({out_path, content_digest(csv)});
        man.finished_utc = utc_now();
        write_file(manifest_path(out_path), man.to_json());
      }
      return kExitOk;
    }

    if (*cs) {
      if (cs_jobs < 1) throw ValidationError("--jobs must be >= 1");
      const Scenario s = scenario_path.empty() ? generate() : load_scenario_file(scenario_path);
      const auto grid = cs_grid.resolve();
      const auto ids = parse_cases(cases_arg);
      RunManifest man;
      man.command = "cases";
      man.started_utc = utc_now();
      const auto rows = run_cases(s, ids, grid, cs_search.resolve());
      if (out_path.empty()) {
        out << results_csv(rows);
        return kExitOk;
      }
      const std::string digest = write_results(rows, out_path);
      man.config = {{"scenario", scenario_path.empty() ? nlohmann::ordered_json("generated")
                                                        : nlohmann::ordered_json(scenario_path)},
                    {"scenario_digest", content_digest(serialize_scenario(s))},
                    {"cases", ids},
                    {"theta_grid", grid_json(grid)},
                    {"search", cs_search.to_json()}};
      man.master_seed = s.seed;
      man.cell_seeds.push_back({"scenario", s.seed});
      man.outputs.push_back({out_path, digest});
      man.finished_utc = utc_now();
      write_file(manifest_path(out_path), man.to_json());
      return kExitOk;
    }

    if (*sw) {
      sw_base.sigma = sw_sigma;
      sw_base.horizon = sw_horizon;
      const auto values = parse_list(sw_values, "--values");
      const auto grid = sw_grid.resolve();
      RunManifest man;
      man.command = "sweep";
      man.started_utc = utc_now();
      const auto rows = run_sweep(sw_base, sw_param, values, sw_reps, seed, grid, sw_search.resolve(), sw_jobs);
      if (out_path.empty()) {
        out << results_csv(rows);
        return kExitOk;
      }
      const std::string digest = write_results(rows, out_path);
      nlohmann::ordered_json base = {{"n", sw_base.n},
                                     {"s_min", sw_base.s_min},
                                     {"epsilon", sw_base.epsilon},
                                     {"m_size", sw_base.m_size}};
      base["sigma"] = sw_sigma ? nlohmann::ordered_json(*sw_sigma) : nlohmann::ordered_json("epsilon/2");
      base["horizon"] = sw_horizon ? nlohmann::ordered_json(*sw_horizon) : nlohmann::ordered_json("10*s_min");
      man.config = {{"param", sw_param}, {"values", values},        {"reps", sw_reps},
                    {"base", base},      {"theta_grid", grid_json(grid)}, {"search", sw_search.to_json()},
                    {"jobs", sw_jobs}};
      man.master_seed = seed;
      for (const auto& c : sweep_cells(sw_param, values, sw_reps, seed))
        man.cell_seeds.push_back({sw_param + "=" + seqshield::detail::shortest(c.value) + ";rep=" +
                                      std::to_string(c.rep),
                                  c.seed});
      man.outputs.push_back({out_path, digest});
      man.finished_utc = utc_now();
      write_file(manifest_path(out_path), man.to_json());
      return kExitOk;
    }
  } catch (const IoError& e) {
    return fail("io", e.what(), kExitIo);
  } catch (const ParseError& e) {
    return fail("parse", e.what(), kExitUsage);
  } catch (const ValidationError& e) {
    return fail("validation", e.what(), kExitUsage);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return fail("usage", "no subcommand", kExitUsage);
}

}  // namespace seqshield::cli
