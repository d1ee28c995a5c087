#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "rnash/ergodic.hpp"
#include "rnash/error.hpp"
#include "rnash/genfun.hpp"
#include "rnash/meanfield.hpp"
#include "rnash/montecarlo.hpp"
#include "rnash/parallel.hpp"
#include "rnash/riccati.hpp"
#include "rnash/sequence.hpp"

namespace rnash::cli {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

const ExperimentConfig& need_config(const RunRequest& req) {
  if (!req.config) config_error("command '" + req.command + "' needs --config");
  return *req.config;
}

const GameDescription& need_game(const ExperimentConfig& cfg) {
  if (!cfg.game) config_error("config has no 'game' table");
  return *cfg.game;
}

CostStencil need_stencil(const ExperimentConfig& cfg) {
  const GameDescription& g = need_game(cfg);
  if (g.mode != "shift_invariant") config_error("this command needs a shift_invariant game");
  return make_stencil(g.stencil_f, g.stencil_g);
}

std::uint64_t seed_of(const RunRequest& req) {
  if (req.seed) return *req.seed;
  return req.config ? req.config->numerics.seed : 1;
}

double need_rho(const Numerics& n) {
  if (!n.rho) config_error("numerics.rho (gathering radius candidate) is required");
  return *n.rho;
}

ContourPlan plan_for(const SymbolPair& s, const Numerics& n) {
  ContourPlan plan = default_plan(s, n.H);
  if (n.r) plan.r = *n.r;
  if (n.n_nodes > 0) plan.n_nodes = n.n_nodes;
  return plan;
}

std::string complex_text(Complex z) {
  std::ostringstream os;
  os << format_double(z.real()) << (z.imag() < 0 ? "-" : "+") << format_double(std::abs(z.imag())) << "i";
  return os.str();
}

json decay_json(const DecayCertificate& c) {
  return {{"kind", "decay"},
          {"gauge", c.gauge == DecayCertificate::Gauge::Rate ? "rate" : "sequence"},
          {"rate", c.rate},
          {"constant", c.constant},
          {"argmax_h", c.argmax_h},
          {"argmax_k", c.argmax_k},
          {"argmax_player", c.argmax_player},
          {"argmax_t", c.argmax_t},
          {"truncation", c.truncation}};
}

json gathering_json(const GatheringReport& g) {
  return {{"kind", "strong_gathering"},
          {"rho", g.rho},
          {"min_distance", g.min_distance},
          {"argmin", complex_text(g.argmin)},
          {"winding", g.winding}};
}

json compatibility_json(const CompatibilityReport& c) {
  return {{"kind", "compatibility"},
          {"minimum", c.minimum},
          {"t_at", c.t_at},
          {"z_at", complex_text(c.z_at)},
          {"pass", c.pass}};
}

// ---------------------------------------------------------------- solve

CommandResult cmd_solve(const RunRequest& req) {
  const ExperimentConfig& cfg = need_config(req);
  const GameSpec game = build_game(need_game(cfg));
  const Numerics& n = cfg.numerics;
  CommandResult out;
  CoefficientFlow flow;
  if (n.refine) {
    RefinedFlow r = integrate_to_tolerance(game, n.H, n.tol, n.steps);
    out.certificates.push_back({{"kind", "integration"},
                                {"steps", r.steps},
                                {"last_change", r.last_change},
                                {"converged", r.converged}});
    flow = std::move(r.flow);
  } else {
    flow = integrate_backward(game, n.steps, n.H);
    out.certificates.push_back({{"kind", "integration"}, {"steps", n.steps}});
  }
  if (n.r) out.certificates.push_back(decay_json(certify_decay(flow, *n.r)));

  CsvTable coeffs({"t", "player", "h", "k", "value"});
  const std::size_t M = flow.samples();
  for (std::size_t m = 0; m < M; ++m) {
    if (m % static_cast<std::size_t>(n.output_every) != 0 && m + 1 != M) continue;
    for (std::size_t p = 0; p < flow.values[m].size(); ++p) {
      const Matrix& c = flow.values[m][p];
      for (Eigen::Index h = 0; h < c.rows(); ++h) {
        for (Eigen::Index k = 0; k < c.cols(); ++k) {
          coeffs.add({flow.grid[m], p, static_cast<long>(h), static_cast<long>(k), c(h, k)});
        }
      }
    }
  }
  CsvTable eta_table({"t", "eta"});
  const std::vector<double> e = eta(flow, game.d);
  for (std::size_t m = 0; m < M; ++m) {
    if (m % static_cast<std::size_t>(n.output_every) != 0 && m + 1 != M) continue;
    eta_table.add({flow.grid[m], e[m]});
  }
  out.notes.push_back("c(0) sup norm: " + format_double(flow.values[0][0].cwiseAbs().maxCoeff()));
  out.tables.emplace_back("flow", std::move(coeffs));
  out.tables.emplace_back("eta", std::move(eta_table));
  return out;
}

// ---------------------------------------------------------------- genfun

CommandResult cmd_genfun(const RunRequest& req) {
  const ExperimentConfig& cfg = need_config(req);
  const CostStencil stencil = need_stencil(cfg);
  const double T = need_game(cfg).T;
  const Numerics& n = cfg.numerics;
  SymbolPair symbol = build_symbol(stencil);
  CommandResult out;
  out.certificates.push_back(gathering_json(check_strong_gathering(symbol, need_rho(n))));
  out.certificates.push_back(compatibility_json(check_compatibility(symbol, T)));
  const ContourPlan plan = plan_for(symbol, n);
  const bool aliasing = get_or<bool>(command_section(cfg, "genfun"), "check_aliasing", false);
  std::vector<double> taus = n.t_samples;
  if (taus.empty()) {
    for (int j = 0; j <= 4; ++j) taus.push_back(T * j / 4.0);
  }
  CsvTable coeffs({"t", "tau", "h", "k", "value"});
  CsvTable decay({"tau", "contour_max", "max_weighted", "violations"});
  int violations_total = 0;
  for (double tau : taus) {
    if (tau < 0.0 || tau > T) config_error("numerics.t_samples must lie in [0, T]");
    const Extraction ex = extract_coefficients(symbol, plan, tau, n.H, aliasing);
    double max_weighted = 0.0;
    int violations = 0;
    for (int h = 0; h < n.H; ++h) {
      for (int k = 0; k < n.H; ++k) {
        coeffs.add({T - tau, tau, h, k, ex.c(h, k)});
        const double w = std::abs(ex.c(h, k)) * std::pow(plan.r, h + k);
        max_weighted = std::max(max_weighted, w);
        if (w > ex.contour_max) ++violations;
      }
    }
    violations_total += violations;
    decay.add({tau, ex.contour_max, max_weighted, violations});
  }
  out.certificates.push_back({{"kind", "cauchy_decay"},
                              {"r", plan.r},
                              {"n_nodes", plan.n_nodes},
                              {"violations", violations_total}});
  out.tables.emplace_back("coefficients", std::move(coeffs));
  out.tables.emplace_back("cauchy_decay", std::move(decay));
  return out;
}

// ---------------------------------------------------------------- ergodic

// Stationary residual f + c_0h c_0k - Q_hk - Q_kh, Q = Toep(c_0.) c. Every
// term is a finite sum inside the window because the Toeplitz factor is
// lower triangular.
Rational chain_residual(int h, int k, const std::vector<std::vector<Rational>>& c, const Matrix& f) {
  Rational r = 0;
  if (h < f.rows() && k < f.cols()) r += Rational(static_cast<long>(std::lround(f(h, k))));
  r += c[0][h] * c[0][k];
  for (int j = 0; j <= h; ++j) r -= c[0][h - j] * c[j][k];
  for (int j = 0; j <= k; ++j) r -= c[0][k - j] * c[j][h];
  return r;
}

CommandResult cmd_ergodic_oracle(const RunRequest& req) {
  if (*req.oracle != "directed-chain") config_error("unknown oracle '" + *req.oracle + "'");
  const int H = req.oracle_H.value_or(12);
  if (H < 1 || H > 400) config_error("--H must lie in [1, 400]");
  CommandResult out;
  std::vector<std::vector<Rational>> c(H, std::vector<Rational>(H));
  for (int h = 0; h < H; ++h) {
    for (int k = 0; k < H; ++k) c[h][k] = directed_chain_oracle_exact(h, k, Sign::Plus);
  }
  CsvTable table({"h", "k", "value", "exact"});
  double max_diff = 0.0;
  for (int h = 0; h < H; ++h) {
    for (int k = 0; k < H; ++k) {
      const double v = directed_chain_oracle(h, k, Sign::Plus);
      max_diff = std::max(max_diff, std::abs(v - static_cast<double>(c[h][k])));
      std::ostringstream exact;
      exact << c[h][k];
      table.add({h, k, v, exact.str()});
    }
  }
  Matrix f(2, 2);
  f << 1, -1, -1, 1;
  bool residual_zero = true;
  for (int h = 0; h < H; ++h) {
    for (int k = 0; k < H; ++k) residual_zero = residual_zero && chain_residual(h, k, c, f) == 0;
  }
  const ExactErgodicValue ev = directed_chain_ergodic_value(H, 1);
  out.certificates.push_back({{"kind", "directed_chain_oracle"},
                              {"H", H},
                              {"max_abs_diff_to_rational", max_diff},
                              {"exact_residual_zero", residual_zero},
                              {"lambda_partial", ev.lambda},
                              {"lambda_tail_bound", ev.tail_bound}});
  out.notes.push_back("lambda partial sum " + format_double(ev.lambda) + " (tail <= " +
                      format_double(ev.tail_bound) + ")");
  out.tables.emplace_back("ergodic", std::move(table));
  return out;
}

CommandResult cmd_ergodic(const RunRequest& req) {
  if (req.oracle) return cmd_ergodic_oracle(req);
  const ExperimentConfig& cfg = need_config(req);
  const CostStencil stencil = need_stencil(cfg);
  const Numerics& n = cfg.numerics;
  const YAML::Node sec = command_section(cfg, "ergodic");
  const std::string sign_name = get_or<std::string>(sec, "sign", "plus");
  if (sign_name != "plus" && sign_name != "minus") config_error("ergodic.sign must be plus or minus");
  const Sign sign = sign_name == "plus" ? Sign::Plus : Sign::Minus;
  SymbolPair symbol = build_symbol(stencil);
  CommandResult out;
  ContourPlan plan;
  if (n.rho) {
    out.certificates.push_back(gathering_json(check_strong_gathering(symbol, *n.rho)));
    plan = plan_for(symbol, n);
  } else {
    // Uncertified path: user radius below 1, flagged in the sidecar.
    if (!n.r) config_error("without numerics.rho an explicit numerics.r < 1 is required");
    plan.r = *n.r;
    plan.n_nodes = n.n_nodes > 0 ? n.n_nodes : 256;
    while (plan.n_nodes < 4 * n.H) plan.n_nodes *= 2;
  }
  const Extraction ex = ergodic_coefficients(symbol, plan, n.H, sign,
                                             get_or<bool>(sec, "check_aliasing", false));
  const ErgodicValue ev = ergodic_value(ex.c, need_game(cfg).d, plan.r);
  CsvTable table({"h", "k", "value"});
  for (int h = 0; h < n.H; ++h) {
    for (int k = 0; k < n.H; ++k) table.add({h, k, ex.c(h, k)});
  }
  out.certificates.push_back({{"kind", "ergodic"},
                              {"certified", ex.certified},
                              {"sign", sign_name},
                              {"r", plan.r},
                              {"max_imag", ex.max_imag},
                              {"lambda", ev.lambda},
                              {"lambda_tail_bound", ev.tail_bound}});
  if (!ex.certified) out.notes.push_back("UNCERTIFIED: sub-unit radius extraction");
  out.tables.emplace_back("ergodic", std::move(table));
  return out;
}

// ---------------------------------------------------------------- sweep

CommandResult cmd_sweep(const RunRequest& req) {
  const ExperimentConfig& cfg = need_config(req);
  const CostStencil stencil = need_stencil(cfg);
  const Numerics& n = cfg.numerics;
  SymbolPair symbol = build_symbol(stencil);
  CommandResult out;
  out.certificates.push_back(gathering_json(check_strong_gathering(symbol, need_rho(n))));
  const ContourPlan plan = plan_for(symbol, n);
  std::vector<double> horizons = n.horizons.empty() ? std::vector<double>{1, 2, 4, 8} : n.horizons;
  SweepOptions opt;
  opt.d = need_game(cfg).d;
  opt.threads = req.threads;
  opt.quadrature_intervals = get_or<int>(command_section(cfg, "sweep"), "quadrature_intervals", 64);
  const ConvergenceReport rep = convergence_sweep(symbol, horizons, n.H, plan, opt);
  CsvTable table({"T", "l1_gap", "trace_gap", "mu"});
  for (std::size_t j = 0; j < rep.horizons.size(); ++j) {
    table.add({rep.horizons[j], rep.l1_gaps[j], rep.trace_gaps[j], rep.mu_by_horizon[j]});
  }
  out.certificates.push_back({{"kind", "convergence"},
                              {"lambda", rep.lambda},
                              {"lambda_tail_bound", rep.lambda_tail},
                              {"fitted_rate", rep.fitted_rate},
                              {"fit_points", rep.fit_points},
                              {"epsilon", rep.epsilon},
                              {"mu_estimate", rep.mu_estimate},
                              {"mu_error", rep.mu_error}});
  out.tables.emplace_back("sweep", std::move(table));
  return out;
}

// ---------------------------------------------------------------- nash-mc

CommandResult cmd_nash_mc(const RunRequest& req) {
  const ExperimentConfig& cfg = need_config(req);
  const CostStencil stencil = need_stencil(cfg);
  const GameDescription& g = need_game(cfg);
  const Numerics& n = cfg.numerics;
  const YAML::Node sec = command_section(cfg, "nash-mc");
  McParams p;
  p.T = g.T;
  p.d = g.d;
  p.rho = need_rho(n);
  p.truncation = n.H;
  p.flow_steps = n.steps;
  p.dt = n.dt;
  p.n_paths = n.paths;
  p.seed = seed_of(req);
  p.threads = req.threads;
  DeviationSpec dev;
  dev.player = get_or<int>(sec, "player", 0);
  dev.weight = get_or<double>(sec, "weight", 1.0);
  const double drift = get_or<double>(sec, "drift", 0.5);
  dev.drift = Vector::Constant(g.d, drift);
  if (sec && sec["declared_L"]) dev.declared_L = get_or<double>(sec, "declared_L", 0.0);
  const std::vector<int> Ns = get_int_list(sec, "N_list", {8, 16, 32});
  const NashExperiment ex = epsilon_nash_experiment(stencil, Ns, dev, p);
  CommandResult out;
  CsvTable table({"N", "gain_mean", "std_error", "upper_bound", "envelope", "J_equilibrium",
                  "J_deviation", "threshold_L"});
  for (const NashGainRow& r : ex.rows) {
    table.add({r.N, r.mean, r.std_error, r.upper_bound, r.envelope, r.j_equilibrium, r.j_deviation,
               r.threshold_L});
  }
  out.certificates.push_back(decay_json(ex.certificate));
  out.certificates.push_back({{"kind", "epsilon_nash"}, {"rho", ex.rho}, {"delta", ex.delta}});
  out.tables.emplace_back("nash", std::move(table));
  return out;
}

// ---------------------------------------------------------------- meanfield

CommandResult cmd_meanfield(const RunRequest& req) {
  const ExperimentConfig& cfg = need_config(req);
  const Numerics& n = cfg.numerics;
  const YAML::Node sec = command_section(cfg, "meanfield");
  CostFamily costs;
  double T = get_or<double>(sec, "T", 1.0);
  if (cfg.game && cfg.game->mode != "shift_invariant") {
    costs.f = cfg.game->f;
    costs.g = cfg.game->g;
    if (costs.g.empty()) costs.g.assign(costs.f.size(), Matrix::Zero(costs.N(), costs.N()));
    T = cfg.game->T;
  } else {
    const int N = get_or<int>(sec, "N", 16);
    costs = generate_mf_costs(N, get_or<double>(sec, "kappa", 1.0), get_or<double>(sec, "K", 0.0),
                              seed_of(req));
  }
  const int N = costs.N();
  const MfScalingBudget budget = check_mf_scaling(costs);
  const HorizonScan scan = scan_horizon_condition(budget.K_f, budget.K_g, T);
  CommandResult out;
  out.certificates.push_back({{"kind", "mf_budget"},
                              {"kappa_f", budget.kappa_f},
                              {"kappa_g", budget.kappa_g},
                              {"K_f", budget.K_f},
                              {"K_g", budget.K_g}});
  out.certificates.push_back({{"kind", "horizon_condition"},
                              {"feasible", scan.feasible},
                              {"M", scan.M},
                              {"kg_sup", scan.kg_sup},
                              {"kf_sup", scan.kf_sup},
                              {"reason", scan.reason}});
  double M = get_or<double>(sec, "M", scan.feasible ? scan.M : 0.0);
  if (!scan.feasible && !(sec && sec["M"])) {
    throw Error(ErrorCode::MonotonicityBarrierCrossed,
                "horizon condition infeasible and no meanfield.M given: " + scan.reason);
  }
  MfSolveOptions opt;
  opt.threads = req.threads;
  const std::string storage = get_or<std::string>(sec, "storage", "auto");
  if (storage == "dense") opt.storage = MfStorage::Dense;
  else if (storage == "checkpoints") opt.storage = MfStorage::Checkpoints;
  else if (storage == "monitor") opt.storage = MfStorage::MonitorOnly;
  else if (storage != "auto") config_error("meanfield.storage must be auto, dense, checkpoints or monitor");
  const MfSolveResult res = solve_mf_system(costs, T, std::max(n.steps, 64), M, opt);
  const Envelopes env = gronwall_envelopes(budget, M, N, res.monitor.grid);
  const MfMonitor& mon = res.monitor;
  CsvTable table({"t", "min_eig_Bc", "norm_offdiag", "kappa0", "norm_column", "kappa1", "norm_diag",
                  "kappa2", "est_lhs", "envelope_sum", "d_norm_sq", "d_bound"});
  int violations = 0;
  double C = 0.0;
  for (std::size_t j = 0; j < mon.grid.size(); ++j) {
    const double sum = env.kappa0[j] + env.kappa1[j] + env.kappa2[j];
    violations += (mon.norm_offdiag[j] > env.kappa0[j]) + (mon.norm_column[j] > env.kappa1[j]) +
                  (mon.norm_diag[j] > env.kappa2[j]);
    C = std::max(C, mon.est_lhs[j]);
    table.add({mon.grid[j], mon.min_eig_Bc[j], mon.norm_offdiag[j], env.kappa0[j], mon.norm_column[j],
               env.kappa1[j], mon.norm_diag[j], env.kappa2[j], mon.est_lhs[j], sum, mon.d_norm_sq[j],
               mon.d_bound[j]});
  }
  out.certificates.push_back({{"kind", "mf_envelopes"},
                              {"N", N},
                              {"M", M},
                              {"violations", violations},
                              {"measured_C", C},
                              {"envelope_C", env.kappa0.back() + env.kappa1.back() + env.kappa2.back()},
                              {"min_eig_Bc", *std::min_element(mon.min_eig_Bc.begin(), mon.min_eig_Bc.end())}});
  out.tables.emplace_back("monitor", std::move(table));
  return out;
}

// ---------------------------------------------------------------- certify-seq

CommandResult cmd_certify_seq(const RunRequest& req) {
  const ExperimentConfig& cfg = need_config(req);
  const YAML::Node sec = command_section(cfg, "certify-seq");
  if (!sec || !sec["alpha"]) config_error("certify_seq.alpha is required");
  const double alpha = get_or<double>(sec, "alpha", 1.0);
  const int R = get_or<int>(sec, "radius", 16);
  const double gamma = get_or<double>(sec, "gamma", 0.0);
  DecaySequence beta = make_exponential_fourier_seq(alpha, R);
  if (gamma > 0.0) beta = tilt(beta, gamma);
  const SelfControlCertificate cert = certify_self_controlled(beta, get_or<double>(sec, "tol_tail", 8.0));
  const Window conv = convolve(beta, beta);
  CsvTable table({"i", "beta", "conv", "ratio"});
  for (int i = -R; i <= R; ++i) table.add({i, beta(i), conv[i], conv[i] / beta(i)});
  CommandResult out;
  out.certificates.push_back({{"kind", "self_controlled"},
                              {"alpha", alpha},
                              {"gamma", gamma},
                              {"radius", R},
                              {"constant", cert.constant},
                              {"window_constant", cert.window_constant},
                              {"tail_slack", cert.tail_slack},
                              {"argmax", cert.argmax}});
  out.notes.push_back("self-control constant " + format_double(cert.constant));
  out.tables.emplace_back("sequence", std::move(table));
  return out;
}

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::Certification: return 2;
    case ErrorClass::Numerical: return 3;
    case ErrorClass::Config: return 4;
  }
  return 4;
}

}  // namespace

int resolve_threads(int flag) {
  if (std::getenv("RICCATI_NASH_THREADS")) return default_thread_count();
  return flag > 0 ? flag : default_thread_count();
}

CommandResult execute(const RunRequest& req) {
  if (std::find(kCommands.begin(), kCommands.end(), req.command) == kCommands.end()) {
    config_error("unknown command '" + req.command + "'");
  }
  if (req.config && !req.config->command.empty() && req.config->command != req.command) {
    config_error("config declares command '" + req.config->command + "' but '" + req.command + "' was run");
  }
  if (req.oracle && req.command != "ergodic") config_error("--oracle applies to ergodic only");
  if (req.command == "solve") return cmd_solve(req);
  if (req.command == "genfun") return cmd_genfun(req);
  if (req.command == "ergodic") return cmd_ergodic(req);
  if (req.command == "sweep") return cmd_sweep(req);
  if (req.command == "nash-mc") return cmd_nash_mc(req);
  if (req.command == "meanfield") return cmd_meanfield(req);
  return cmd_certify_seq(req);
}

int run(const RunRequest& req) {
  const auto start = std::chrono::steady_clock::now();
  try {
    const CommandResult result = execute(req);
    std::filesystem::path dir = req.out_dir ? *req.out_dir : (req.config ? req.config->out_dir : "out");
    const std::vector<std::string> formats =
        req.config ? req.config->formats : std::vector<std::string>{"csv", "json"};
    const bool csv = std::find(formats.begin(), formats.end(), "csv") != formats.end();
    const bool js = std::find(formats.begin(), formats.end(), "json") != formats.end();
    std::string stem = req.command;
    if (csv) {
      for (const auto& [name, table] : result.tables) write_atomic(dir / (name + ".csv"), table.str());
    }
    if (js) {
      Sidecar side;
      if (req.config) {
        side.config_hash = sha256_hex(req.config->raw_text);
      } else {
        std::ostringstream canon;
        canon << "oracle=" << req.oracle.value_or("") << ";H=" << req.oracle_H.value_or(12);
        side.config_hash = sha256_hex(canon.str());
      }
      side.seed = seed_of(req);
      side.command = req.command;
      side.certificates = result.certificates;
      side.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      write_atomic(dir / (stem + ".json"), side.str());
    }
    if (!req.quiet) {
      for (const std::string& note : result.notes) std::cerr << note << "\n";
      for (const auto& [name, table] : result.tables) {
        std::cerr << "wrote " << (dir / (name + ".csv")).string() << " (" << table.rows() << " rows)\n";
      }
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "riccati_nash " << req.command << ": " << e.what() << "\n";
    return exit_code(error_class(e.code()));
  } catch (const YAML::Exception& e) {
    std::cerr << "riccati_nash " << req.command << ": ConfigError: " << e.what() << "\n";
    return 4;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "riccati_nash " << req.command << ": ConfigError: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "riccati_nash " << req.command << ": internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace rnash::cli
