#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rnash/core.hpp"
#include "rnash/sequence.hpp"

namespace rnash {

// Right-hand sides in forward time s = T - t, i.e. dc/ds.
//
// Reduced: f_hk + c_0h c_0k - Q_hk - Q_kh with Q = Toep(c_0.) c, where the
// Toeplitz factor is lower triangular (directed) or circulant (cyclic).
[[nodiscard]] Matrix reduced_rhs(const Matrix& c, const Matrix& f, Indexing indexing);
// Full: f^i - c^i E^i c^i - sum_{j != i} (c^j E^j c^i + c^i E^j c^j).
[[nodiscard]] std::vector<Matrix> full_rhs(const std::vector<Matrix>& c, const std::vector<Matrix>& f);
// B(c)_hk = c^h_hk.
[[nodiscard]] Matrix own_feedback_matrix(const std::vector<Matrix>& c);

// Largest |entry| bound before an integration is declared blown up.
inline constexpr double kBlowUpThreshold = 1e9;

// Classical RK4 with fixed step T/steps on the backward system, terminal
// data g. Truncation is the H of an infinite shift-invariant game and is
// ignored otherwise (finite games are solved on N).
[[nodiscard]] CoefficientFlow integrate_backward(const GameSpec& game, int steps, int truncation = 32);

struct RefinedFlow {
  CoefficientFlow flow;
  int steps = 0;
  double last_change = 0.0;  // sup difference to the previous (half-step) run
  bool converged = false;
};

// Doubles steps from initial_steps until two runs differ by < tol in sup norm
// on the coarse grid.
[[nodiscard]] RefinedFlow integrate_to_tolerance(const GameSpec& game, int truncation,
                                                 double tol = 1e-8, int initial_steps = 512,
                                                 int max_steps = 1 << 15);

struct DecayCertificate {
  enum class Gauge { Sequence, Rate };
  Gauge gauge = Gauge::Rate;
  double rate = 1.0;                     // r for the rate gauge
  std::optional<DecaySequence> sequence;  // beta for the sequence gauge
  double constant = 0.0;
  int argmax_h = 0;
  int argmax_k = 0;
  int argmax_player = 0;
  double argmax_t = 0.0;
  int truncation = 0;
};

// Sequence gauge: sup |c_hk(t)| / (beta_h beta_k), indices relative to the
// owning player (cyclically centered for finite games).
[[nodiscard]] DecayCertificate certify_decay(const CoefficientFlow& flow, const DecaySequence& beta);
// Rate gauge: sup |c_hk(t)| r^{h+k}.
[[nodiscard]] DecayCertificate certify_decay(const CoefficientFlow& flow, double r);
[[nodiscard]] DecayCertificate certify_decay(const Matrix& c, double r);

struct PicardOptions {
  int steps = 512;
  int truncation = 32;
  int max_iters = 200;
  double tol = 1e-12;
  // |f| v |g| <= domination_bound * beta (x) beta is required.
  double domination_bound = 1.0;
};

struct PicardResult {
  CoefficientFlow flow;
  std::vector<double> increments;           // |||c_{m+1} - c_m||| per iteration
  std::vector<double> contraction_factors;  // increments[m] / increments[m-1]
  int iterations = 0;
  bool converged = false;
  double weighted_norm = 0.0;  // |||c||| of the fixed point
  double domination_constant = 0.0;
  Matrix d;                    // beta (x) beta + |g| v |f| on the index window
};

[[nodiscard]] PicardResult picard_solve(const GameSpec& game, const DecaySequence& beta,
                                        const PicardOptions& options = {});

// Sampled Lipschitz constant of the Picard map on the ball |c_hk| <= 2 d_hk:
// sup over random pairs (a, b) of |||J(a) - J(b)||| / |||a - b|||. This is the
// quantity bounded linearly in T; the trace factors of picard_solve are local
// factors at the iterates and shrink faster when the iterates are O(T).
[[nodiscard]] double picard_ball_lipschitz(const GameSpec& game, const DecaySequence& beta,
                                           const PicardOptions& options = {}, int pairs = 16,
                                           std::uint64_t seed = 1);

// |||a - b||| = sup_{h,k,t} |a_hk(t) - b_hk(t)| / d_hk over two reduced flows.
[[nodiscard]] double weighted_distance(const CoefficientFlow& a, const CoefficientFlow& b,
                                       const Matrix& d);
// d_hk = beta_h beta_k + |g_hk| v |f_hk| for a reduced flow of the given game.
[[nodiscard]] Matrix picard_weights(const GameSpec& game, const DecaySequence& beta, int truncation);

struct GeneralDecayedResult {
  CoefficientFlow flow;
  DecayCertificate certificate;
  double domination_constant = 0.0;
};

[[nodiscard]] GeneralDecayedResult solve_general_decayed(const GameSpec& game, const DecaySequence& beta,
                                                         int steps = 512,
                                                         double domination_bound = 1.0);

}  // namespace rnash
