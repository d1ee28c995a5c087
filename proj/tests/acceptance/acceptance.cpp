// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "rnash/core.hpp"
#include "rnash/ergodic.hpp"
#include "rnash/error.hpp"
#include "rnash/genfun.hpp"
#include "rnash/meanfield.hpp"
#include "rnash/montecarlo.hpp"
#include "rnash/riccati.hpp"
#include "rnash/sequence.hpp"

using namespace rnash;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

Matrix nu_chain(double nu) {
  Matrix f(2, 2);
  f << nu * nu, -nu, -nu, 1;
  return f;
}

// ---------------------------------------------------------------- 1

void scalar_riccati(Outcome& o) {
  GameSpec game = shift_invariant_game(make_stencil(Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1)), 1, 1, 1.0);
  CoefficientFlow flow = integrate_backward(game, 1000);
  const double err = std::abs(flow.reduced(0)(0, 0) - std::tanh(1.0));
  o.detail << "|c00(0) - tanh 1| = " << err;
  o.require(err <= 1e-9, "tolerance 1e-9");
}

// ---------------------------------------------------------------- 2

void chain_oracle(Outcome& o) {
  auto c = [](int h, int k) { return directed_chain_oracle_exact(h, k, Sign::Plus); };
  o.require(c(0, 0) == Rational(1) && c(0, 1) == Rational(-1, 2) && c(1, 1) == Rational(3, 8),
            "c00 = 1, c01 = -1/2, c11 = 3/8");
  // The stationary system has finite sums only (the Toeplitz factor is lower
  // triangular), so the double residual is a direct measurement.
  double worst = 0.0;
  bool exact_zero = true;
  for (int h = 0; h <= 20; ++h) {
    for (int k = 0; k <= 20; ++k) {
      const int f = (h < 2 && k < 2) ? (h == k ? 1 : -1) : 0;
      double r = f + directed_chain_oracle(0, h, Sign::Plus) * directed_chain_oracle(0, k, Sign::Plus);
      Rational q = Rational(f) + c(0, h) * c(0, k);
      for (int j = 0; j <= h; ++j) {
        r -= directed_chain_oracle(0, h - j, Sign::Plus) * directed_chain_oracle(j, k, Sign::Plus);
        q -= c(0, h - j) * c(j, k);
      }
      for (int j = 0; j <= k; ++j) {
        r -= directed_chain_oracle(0, k - j, Sign::Plus) * directed_chain_oracle(j, h, Sign::Plus);
        q -= c(0, k - j) * c(j, h);
      }
      worst = std::max(worst, std::abs(r));
      exact_zero = exact_zero && q == 0;
    }
  }
  bool cc = true;
  for (int h = 1; h <= 40; ++h)
    for (int k = 1; h + k <= 40; ++k) cc = cc && c(h, k) == c(0, h + k) - c(0, h + k - 1);
  // |c_hk| (h+k)^{5/2} stays bounded: the decay that controls the tails.
  double tail_const = 0.0;
  for (int n = 2; n <= 40; ++n) tail_const = std::max(tail_const, std::abs(directed_chain_oracle(0, n, Sign::Plus)) * std::pow(n, 2.5));
  o.detail << "max residual " << worst << ", exact residual zero " << exact_zero << ", c-c identity " << cc
           << ", sup |c_0n| n^{5/2} = " << tail_const;
  o.require(worst <= 1e-9, "residual 1e-9");
  o.require(exact_zero, "exact residual");
  o.require(cc, "c-c identity for h + k <= 40");
}

// ---------------------------------------------------------------- 3, 4

struct GenfunInstance {
  CostStencil stencil = make_stencil(nu_chain(1.5), Matrix::Zero(2, 2));
  SymbolPair symbol;
  ContourPlan plan;
  CoefficientFlow ode;
  std::vector<double> taus;
  std::vector<Extraction> ex;
};

GenfunInstance& genfun_instance() {
  static GenfunInstance g = [] {
    GenfunInstance g;
    const double T = 1.0;
    const int H = 12;
    g.symbol = build_symbol(g.stencil);
    (void)check_strong_gathering(g.symbol, 1.4);
    (void)check_compatibility(g.symbol, T);
    g.plan = default_plan(g.symbol, H);
    g.ode = integrate_backward(shift_invariant_game(g.stencil, std::nullopt, 1, T), 1024, 24);
    for (int m : {0, 256, 512, 768, 1024}) {
      g.taus.push_back(T - g.ode.grid[m]);
      g.ex.push_back(extract_coefficients(g.symbol, g.plan, g.taus.back(), H));
    }
    return g;
  }();
  return g;
}

void genfun_vs_ode(Outcome& o) {
  GenfunInstance& g = genfun_instance();
  double worst = 0.0;
  for (std::size_t j = 0; j < g.taus.size(); ++j) {
    const int m = 256 * static_cast<int>(j);
    worst = std::max(worst, (g.ex[j].c - g.ode.reduced(m).topLeftCorner(12, 12)).cwiseAbs().maxCoeff());
  }
  o.detail << "r = " << g.plan.r << ", 5 samples, max entrywise gap " << worst;
  o.require(g.plan.r == 0.5 * (1.0 + 1.4), "r = (1 + rho)/2");
  o.require(worst <= 1e-6, "tolerance 1e-6");
}

void cauchy_decay(Outcome& o) {
  GenfunInstance& g = genfun_instance();
  // h + k <= 12 reaches index 12, so this criterion extracts with H = 13.
  std::vector<Extraction> ex;
  for (double tau : g.taus) ex.push_back(extract_coefficients(g.symbol, g.plan, tau, 13));
  double contour = 0.0;
  for (const Extraction& e : ex) contour = std::max(contour, e.contour_max);
  int violations = 0, checked = 0;
  double worst_ratio = 0.0;
  for (int h = 0; h <= 12; ++h) {
    for (int k = 0; h + k <= 12; ++k) {
      double lhs = 0.0;
      for (const Extraction& e : ex) lhs = std::max(lhs, std::abs(e.c(h, k)) * std::pow(g.plan.r, h + k));
      // The same entry from the independent ODE flow at every grid time.
      for (std::size_t m = 0; m < g.ode.samples(); ++m)
        lhs = std::max(lhs, std::abs(g.ode.reduced(m)(h, k)) * std::pow(g.plan.r, h + k));
      violations += lhs > contour;
      worst_ratio = std::max(worst_ratio, lhs / contour);
      ++checked;
    }
  }
  o.detail << checked << " entries, " << violations << " violations, max ratio " << worst_ratio;
  o.require(violations == 0, "zero violations");
}

// ---------------------------------------------------------------- 5

void picard_contraction(Outcome& o) {
  DecaySequence beta = make_exponential_fourier_seq(2.0, 64);
  Matrix f(2, 2);
  f << 1, -1, -1, 1;
  CostStencil s = make_stencil(0.1 * f, Matrix::Zero(2, 2));
  PicardOptions opt;
  opt.truncation = 16;
  opt.steps = 512;
  double dist = 0.0;
  bool converged = true;
  auto factors = [&](double T) {
    GameSpec game = shift_invariant_game(s, std::nullopt, 1, T);
    PicardResult r = picard_solve(game, beta, opt);
    converged = converged && r.converged;
    dist = std::max(dist, weighted_distance(r.flow, integrate_backward(game, opt.steps, opt.truncation), r.d));
    return r.contraction_factors;
  };
  std::vector<double> full = factors(0.5), half = factors(0.25);
  o.require(converged, "Picard converged");
  o.require(full.size() >= 3 && half.size() >= 3, "three contraction factors");
  // Contraction factor of J on the ball K: sampled sup of |||J(a) - J(b)||| / |||a - b|||.
  const double l_full = picard_ball_lipschitz(shift_invariant_game(s, std::nullopt, 1, 0.5), beta, opt, 32);
  const double l_half = picard_ball_lipschitz(shift_invariant_game(s, std::nullopt, 1, 0.25), beta, opt, 32);
  const double ball_ratio = l_half / l_full;
  o.detail << "distance to ODE " << dist << ", ball factor ratio " << ball_ratio << " (" << l_half << " / "
           << l_full << "), trace factor ratios";
  o.require(std::abs(ball_ratio - 0.5) <= 0.4 * 0.5, "ball factor ratio 0.5 +- 40%");
  for (std::size_t m = 0; m < 3 && m < full.size() && m < half.size(); ++m) {
    // Local factors at the iterates; O(T) iterates make them scale like T^2.
    const double ratio = half[m] / full[m];
    o.detail << " " << ratio;
    o.require(ratio <= 0.6, "trace factor ratio <= 0.6");
  }
  o.require(dist <= 1e-5, "distance 1e-5");
}

// ---------------------------------------------------------------- 6

void long_time(Outcome& o) {
  SymbolPair s = build_symbol(make_stencil(nu_chain(1.5), Matrix::Zero(2, 2)));
  (void)check_strong_gathering(s, 1.4);
  ContourPlan plan = default_plan(s, 16);
  ConvergenceReport rep = convergence_sweep(s, {1.0, 2.0, 4.0, 8.0}, 16, plan);
  bool l1 = true, tr = true;
  for (std::size_t i = 1; i < rep.l1_gaps.size(); ++i) {
    l1 = l1 && rep.l1_gaps[i] < rep.l1_gaps[i - 1];
    tr = tr && rep.trace_gaps[i] < rep.trace_gaps[i - 1];
  }
  const double slope = -rep.fitted_rate;
  o.detail << "l1 gaps";
  for (double v : rep.l1_gaps) o.detail << " " << v;
  o.detail << "; slope " << slope << " vs bound " << -2.0 * rep.epsilon * 0.8 << " (eps " << rep.epsilon
           << ", " << rep.fit_points << " points)";
  o.require(rep.l1_gaps.size() == 4, "four horizons");
  o.require(l1, "l1 gaps strictly decreasing");
  o.require(tr, "trace gaps decreasing");
  o.require(rep.fit_points == 4, "all gaps above the fit floor");
  o.require(slope <= -2.0 * rep.epsilon * (1.0 - 0.2), "slope bound");
}

// ---------------------------------------------------------------- 7

void epsilon_nash(Outcome& o) {
  McParams p;
  p.T = 1.0;
  p.rho = 1.4;
  p.truncation = 32;
  p.flow_steps = 1024;
  p.dt = 1e-3;
  p.n_paths = 10000;
  p.seed = 2024;
  CostStencil chain = make_stencil(nu_chain(1.5), Matrix::Zero(2, 2));
  DeviationSpec dev;
  dev.drift = Vector::Constant(1, 0.5);
  NashExperiment ex = epsilon_nash_experiment(chain, {8, 16, 32}, dev, p);
  bool within = true, monotone = true;
  o.detail << "N: mean +- se, upper";
  for (std::size_t j = 0; j < ex.rows.size(); ++j) {
    const NashGainRow& r = ex.rows[j];
    o.detail << " | " << r.N << ": " << r.mean << " +- " << r.std_error << ", " << r.upper_bound;
    within = within && r.mean <= 3.0 * r.std_error;
    if (j > 0) monotone = monotone && r.upper_bound <= ex.rows[j - 1].upper_bound;
  }
  NashExperiment null_ex = epsilon_nash_experiment(chain, {8, 16, 32}, DeviationSpec{}, p);
  bool zero = true;
  for (const NashGainRow& r : null_ex.rows) zero = zero && r.mean == 0.0 && r.max_abs_paired == 0.0;
  o.detail << "; null deviation exact zero " << zero;
  o.require(ex.rows.size() == 3, "three N");
  o.require(within, "gains within 3 se above 0");
  o.require(monotone, "upper bound nonincreasing in N");
  o.require(zero, "null deviation");
}

// ---------------------------------------------------------------- 8

double measured_C(const MfMonitor& m) { return *std::max_element(m.est_lhs.begin(), m.est_lhs.end()); }

void mean_field(Outcome& o) {
  const double T = 1.0;
  double C16 = 0.0, final16 = 0.0, min_eig = std::numeric_limits<double>::infinity();
  int violations = 0;
  for (int N : {16, 64}) {
    CostFamily fam = generate_mf_costs(N, 1.0, 0.0, 1);
    MfScalingBudget bud = check_mf_scaling(fam);
    HorizonScan scan = scan_horizon_condition(bud.K_f, bud.K_g, T);
    MfSolveResult r = solve_mf_system(fam, T, 128, scan.M);
    Envelopes e = gronwall_envelopes(bud, scan.M, N, r.monitor.grid);
    const MfMonitor& m = r.monitor;
    for (std::size_t n = 0; n < m.grid.size(); ++n) {
      violations += (m.norm_offdiag[n] > e.kappa0[n]) + (m.norm_column[n] > e.kappa1[n]) +
                    (m.norm_diag[n] > e.kappa2[n]);
      min_eig = std::min(min_eig, m.min_eig_Bc[n]);
    }
    if (N == 16) {
      C16 = measured_C(m);
      final16 = m.est_lhs.back();
    }
  }
  const auto start = std::chrono::steady_clock::now();
  CostFamily big = generate_mf_costs(256, 1.0, 0.0, 1);
  MfScalingBudget bud = check_mf_scaling(big);
  MfSolveOptions opt;
  opt.storage = MfStorage::MonitorOnly;
  MfSolveResult r = solve_mf_system(big, T, 64, scan_horizon_condition(bud.K_f, bud.K_g, T).M, opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (double v : r.monitor.min_eig_Bc) min_eig = std::min(min_eig, v);
  const double C256 = measured_C(r.monitor);
  const double final256 = r.monitor.est_lhs.back();
  // The sup over t is attained at t = 0, where it equals kappa_g for every N;
  // the left side at the final time carries the N-dependence of the solution.
  o.detail << "envelope violations " << violations << ", sup_t C(16) = " << C16 << ", sup_t C(256) = " << C256
           << ", C(16) at forward t = T " << final16 << ", C(256) at forward t = T " << final256
           << ", min eig sym B(c) = " << min_eig << ", N = 256 solve " << secs << " s";
  o.require(violations == 0, "envelope domination");
  o.require(std::abs(C256 - C16) <= 0.1 * C16, "sup_t C within 10%");
  o.require(std::abs(final256 - final16) <= 0.1 * final16, "final-time C within 10%");
  o.require(min_eig >= -1e-8, "min eig >= -1e-8");
  o.require(secs < 300.0, "N = 256 runtime < 5 min");
}

// ---------------------------------------------------------------- 9

void horizon_scanner(Outcome& o) {
  bool ok = true;
  for (double T : {0.5, 1.0, 2.0, 8.0}) {
    HorizonScan z = scan_horizon_condition(0.0, 0.0, T);
    ok = ok && z.feasible && z.M == 1.0 / (2.0 * T);
    HorizonScan edge = scan_horizon_condition(0.0, 1.0 / (2.0 * std::numbers::e * T), T);
    ok = ok && !edge.feasible && edge.kg_sup == 1.0 / (2.0 * std::numbers::e * T);
  }
  o.detail << "K = 0 feasible at M = 1/(2T), boundary K_g infeasible: " << ok;
  o.require(ok, "scanner cases");
}

// ---------------------------------------------------------------- 10

void sde_value(Outcome& o) {
  CostStencil s = make_stencil(Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1));
  GameSpec game = shift_invariant_game(s, 1, 1, 1.0);
  CoefficientFlow flow = integrate_backward(game, 1000);
  FeedbackControl control = project_equilibrium_control(flow, 1, certify_decay(flow, 1.0));
  const Matrix x0 = Matrix::Zero(1, 1);
  TrajectoryBatch fine = simulate(game, control, x0, 1e-3, 100000, 17);
  TrajectoryBatch coarse = simulate(game, control, x0, 1e-2, 100000, 17);
  // Weak-error constant fitted from the step pair on common normals.
  const double C = std::abs(coarse.mean_cost() - fine.mean_cost()) / (1e-2 - 1e-3);
  const double exact = std::log(std::cosh(1.0));
  const double err = std::abs(fine.mean_cost() - exact);
  const double bound = 3.0 * (fine.std_error() + C * 1e-3);
  o.detail << "mean " << fine.mean_cost() << " vs log cosh 1 = " << exact << ", |err| " << err << " <= " << bound
           << " (se " << fine.std_error() << ", C " << C << ")";
  o.require(err <= bound, "3 (se + C dt)");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<void(Outcome&)> run;
  };
  const std::vector<Criterion> criteria{
      {1, "scalar Riccati oracle", 1.0, scalar_riccati},
      {2, "directed-chain ergodic oracle", 5.0, chain_oracle},
      {3, "generating function vs ODE", 30.0, genfun_vs_ode},
      {4, "Cauchy decay certificate", 30.0, cauchy_decay},
      {5, "Picard cross-check and contraction", 20.0, picard_contraction},
      {6, "long-time convergence", 120.0, long_time},
      {7, "epsilon-Nash Monte Carlo", 600.0, epsilon_nash},
      {8, "mean-field envelopes", 600.0, mean_field},
      {9, "horizon condition scanner", 1.0, horizon_scanner},
      {10, "SDE value recovery", 60.0, sde_value},
  };
  // RNASH_ACCEPTANCE_ONLY=4,5 restricts the run (for iteration; ctest runs all).
  std::vector<int> only;
  if (const char* env = std::getenv("RNASH_ACCEPTANCE_ONLY")) {
    std::stringstream ss(env);
    std::string item;
    while (std::getline(ss, item, ',')) only.push_back(std::stoi(item));
  }
  int failures = 0;
  int ran = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    ++ran;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const Error& e) {
      o.pass = false;
      o.detail << " [error " << error_name(e.code()) << ": " << e.what() << "]";
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_s) {
      o.pass = false;
      o.detail << " [runtime over " << c.limit_s << " s]";
    }
    failures += !o.pass;
    std::printf("%s criterion %d (%s): %s; %.2f s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
