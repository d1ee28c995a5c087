#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rnash/core.hpp"

namespace rnash {

// Player cost families (f^i), (g^i) of N x N symmetric matrices.
struct CostFamily {
  std::vector<Matrix> f;
  std::vector<Matrix> g;
  [[nodiscard]] int N() const { return static_cast<int>(f.size()); }
};

// Weighted norm sup_i (N sum_{all h, k != i} |a^i_hk|^2 + N sum_{k != i} |a^k_ki|^2 + |a^i_ii|^2).
[[nodiscard]] double mf_weighted_norm(const std::vector<Matrix>& a);
// B(a)_hk = a^h_hk.
[[nodiscard]] Matrix mf_B(const std::vector<Matrix>& a);
// Smallest eigenvalue of the symmetric part of B(a).
[[nodiscard]] double mf_min_eig_B(const std::vector<Matrix>& a);

struct MfScalingBudget {
  double kappa_f = 0.0;
  double kappa_g = 0.0;
  // Tightest floors B(f) >= -K_f I and B(g) >= -K_g I (negative when B is
  // uniformly positive).
  double K_f = 0.0;
  double K_g = 0.0;
};

[[nodiscard]] MfScalingBudget check_mf_scaling(const CostFamily& costs);

// Random mean-field-like family: B-pattern = D + sigma (e e^T - I)/N with
// Rademacher e and D in [0.9, 1], so B(f), B(g) are positive semidefinite;
// off-pattern entries +-tau/N^2. Rescaled so the weighted norm of each of f
// and g equals kappa_target. Deterministic in the seed.
[[nodiscard]] CostFamily generate_mf_costs(int N, double kappa_target, double K_target,
                                           std::uint64_t seed);

struct HorizonScan {
  bool feasible = false;
  double M = 0.0;
  double kg_sup = 0.0;  // sup_M M e^{-2MT} = 1 / (2 e T)
  double kf_sup = 0.0;  // best K_f bound found among M with M e^{-2MT} > K_g
  std::string reason;
};

// Searches M with M e^{-2MT} > K_g and 2M(M e^{-MT} - K_g)/(1 - e^{-2MT}) > K_f.
[[nodiscard]] HorizonScan scan_horizon_condition(double K_f, double K_g, double T);

struct Envelopes {
  std::vector<double> grid;
  std::vector<double> kappa0;
  std::vector<double> kappa1;
  std::vector<double> kappa2;
};

// kappa0 = (kg + kf t) e^{(1+4M+)t}, kappa1 = 2 kappa0 e^{2 int_0^t sqrt(kappa0)} (trapezoid),
// kappa2 = (kg + (kf + kappa0 kappa1 / N^2) t) e^{(2+M+)t} with running kappa0, kappa1.
[[nodiscard]] Envelopes gronwall_envelopes(const MfScalingBudget& budget, double M, int N,
                                           const std::vector<double>& grid);

// Per-sample monitor on the forward grid t_n = n T / steps.
struct MfMonitor {
  std::vector<double> grid;
  std::vector<double> min_eig_Bc;
  std::vector<double> norm_offdiag;   // sup_i N sum_{all h, k != i} |c^i_hk|^2
  std::vector<double> norm_column;    // sup_k N sum_{i != k} |c^i_ik|^2
  std::vector<double> norm_diag;      // sup_i |c^i_ii|^2
  std::vector<double> est_lhs;        // left side of the final N-uniform estimate
  std::vector<double> d_norm_sq;      // |D|_2^2, D_ik = sum_{j != i} c^i_kj c^j_ji
  std::vector<double> d_bound;        // (norm_column / N) sum_i sum_{h, k != i} |c^i_hk|^2
};

enum class MfStorage { Dense, Checkpoints, MonitorOnly };

struct MfSolveOptions {
  std::optional<MfStorage> storage;  // default: Dense for N <= 64, Checkpoints otherwise
  int checkpoint_every = 32;
  bool halt_on_barrier = true;
  int threads = 0;
};

struct MfSolveResult {
  CoefficientFlow flow;              // backward convention: grid in original time, c(T) = g
  MfMonitor monitor;
  std::optional<double> barrier_crossing;  // forward time of the first sample below -M_guess
  MfStorage storage = MfStorage::Dense;
};

// Forward RK4 from c(0) = g. Throws MonotonicityBarrierCrossed (value: the
// forward crossing time) when the smallest eigenvalue of sym B(c) drops below
// -M_guess and halt_on_barrier is set; BlowUpDetected on blow-up.
[[nodiscard]] MfSolveResult solve_mf_system(const CostFamily& costs, double T, int steps,
                                            double M_guess, const MfSolveOptions& options = {});

}  // namespace rnash
