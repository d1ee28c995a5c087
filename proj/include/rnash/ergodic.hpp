#pragma once

#include <vector>

#include "rnash/core.hpp"
#include "rnash/genfun.hpp"

namespace rnash {

struct ErgodicValue {
  double lambda = 0.0;      // d * sum_{h<H} cbar_hh
  double tail_bound = 0.0;  // bound on d * sum_{h>=H} |cbar_hh|
};

// Tail from the rate gauge |cbar_hk| <= K r^{-(h+k)} with K measured on the
// window; r <= 1 reports an infinite tail.
[[nodiscard]] ErgodicValue ergodic_value(const Matrix& cbar, int d, double r);

// Exact partial sum of the directed-chain diagonal in rational arithmetic.
// Tail: a_n n^{5/2} is nonincreasing for a_n = |binom(3/2, n)|, n >= 2, so
// sum_{h>=H} a_{2h} <= a_{2H} (1 + 2H/3).
struct ExactErgodicValue {
  Rational partial_sum;
  double lambda = 0.0;
  double tail_bound = 0.0;
};
[[nodiscard]] ExactErgodicValue directed_chain_ergodic_value(int H, int d);

struct ConvergenceReport {
  std::vector<double> horizons;
  std::vector<double> l1_gaps;     // sum_{h,k<H} |c^T_hk(0) - cbar_hk|
  std::vector<double> trace_gaps;  // |d tr c^T(0) - lambda|
  std::vector<double> mu_by_horizon;
  double lambda = 0.0;
  double lambda_tail = 0.0;
  double mu_estimate = 0.0;
  double mu_error = 0.0;  // extrapolation correction magnitude plus the spread to the previous horizon
  double fitted_rate = 0.0;  // -slope of the least-squares fit of log l1_gaps against T
  int fit_points = 0;
  double epsilon = 0.0;      // min Re xi on the closed r-disc
};

struct SweepOptions {
  int d = 1;
  int quadrature_intervals = 64;  // Simpson intervals for the mu integral (even)
  double noise_floor = 1e-8;      // gaps below 10x this are dropped from the fit
  int threads = 0;
};

// Extracts c^T(0) for every horizon and compares with cbar (sign plus).
// The symbol must be certified and compatible up to the largest horizon.
[[nodiscard]] ConvergenceReport convergence_sweep(const SymbolPair& symbol, std::vector<double> horizons,
                                                  int H, const ContourPlan& plan,
                                                  const SweepOptions& options = {});

// Same with an explicit ergodic reference (e.g. the minus branch).
[[nodiscard]] ConvergenceReport convergence_sweep_against(const SymbolPair& symbol,
                                                          std::vector<double> horizons, int H,
                                                          const ContourPlan& plan, const Matrix& cbar,
                                                          const SweepOptions& options = {});

struct NormalizationRow {
  double s = 0.0;       // fraction of the horizon
  double value = 0.0;   // u_T(sT, x)
  double gap = 0.0;     // |u_T(sT, x) / T - (1 - s) lambda|
};

struct NormalizationTable {
  std::vector<NormalizationRow> rows;
  double max_gap = 0.0;
  double lambda = 0.0;
};

// u_T(sT, x) = 1/2 sum c_hk(sT) x_h x_k + d int_{sT}^T tr c, with x_h scalar
// components (x.size() <= H, missing components are 0).
[[nodiscard]] NormalizationTable value_normalization_check(const SymbolPair& symbol, double T,
                                                           const std::vector<double>& t_fracs,
                                                           const Vector& x, int H,
                                                           const ContourPlan& plan, int d = 1,
                                                           int quadrature_intervals = 64);

// Least-squares slope of log(y) against x over the entries with y > floor.
struct ExponentialFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};
[[nodiscard]] ExponentialFit fit_exponential(const std::vector<double>& x, const std::vector<double>& y,
                                             double floor);

}  // namespace rnash
