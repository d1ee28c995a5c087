#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rnash/core.hpp"
#include "rnash/riccati.hpp"

namespace rnash {

// |alpha(t, 0)| <= R and |alpha(t, x) - alpha(t, y)| <= L |x - y|.
struct Admissibility {
  double R = 0.0;
  double L = 0.0;
};

// Linear feedback alpha^i(t, x) = -sum_k gains(t)_ik x^k + drift_i, with the
// gains linearly interpolated between grid samples and a constant drift.
struct FeedbackControl {
  enum class Kind { Equilibrium, Deviation };
  Kind kind = Kind::Equilibrium;
  int n_players = 0;
  std::vector<double> grid;
  std::vector<Matrix> gains;  // N x N per grid sample
  Matrix drift;               // N x d, N x 1 (broadcast over coordinates) or empty
  int player = -1;            // deviating player for Kind::Deviation
  Admissibility admissibility;
  double threshold_L = 0.0;   // admissible Lipschitz threshold of the equilibrium
  double lipschitz = 0.0;     // Schur bound sqrt(|K|_1 |K|_inf), max over samples

  [[nodiscard]] Matrix gain_at(double t) const;
};

// alpha^{*i} = -sum_{j<H} c_0j(t) x^{[i+j]_N}: every j is wrapped mod N.
// Requires the decay certificate of the flow; its tail enters threshold_L.
[[nodiscard]] FeedbackControl project_equilibrium_control(const CoefficientFlow& flow, int N,
                                                          const std::optional<DecayCertificate>& cert);

// Replaces the control of `player` by psi = weight alpha^{*p} - linear x + drift.
// The control class A_{R,L} is declared by (R, L); L defaults to the
// admissible threshold. Throws InadmissibleDeviation when L is below the
// threshold or when psi leaves the declared class.
struct DeviationSpec {
  int player = 0;
  double weight = 1.0;
  Vector linear;          // length N or empty
  Vector drift;           // length d or 1 (broadcast) or empty
  std::optional<double> declared_L;
  std::optional<double> declared_R;
};
[[nodiscard]] FeedbackControl make_deviation(const FeedbackControl& base, const DeviationSpec& spec);

struct SimulationOptions {
  std::vector<int> tracked;  // players whose costs are accumulated; empty = all
  int threads = 0;
  int chunk = 64;            // paths per work unit; fixed for determinism
};

struct TrajectoryBatch {
  int n_paths = 0;
  int n_steps = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::vector<int> tracked;
  Matrix x0;                          // N x d
  Matrix costs;                       // n_paths x tracked.size()
  std::vector<double> mean_sq_norm;   // E|X_{t_n}|^2, n = 0..n_steps

  [[nodiscard]] double mean_cost(int column = 0) const;
  [[nodiscard]] double std_error(int column = 0) const;
  [[nodiscard]] double sup_second_moment() const;
};

// Euler-Maruyama for dX = alpha dt + sqrt(2) dB with left-endpoint running
// cost 1/2 (|alpha^i|^2 + <F^i x, x>) and terminal cost 1/2 <G^i x, x>.
// The step is T / ceil(T / dt). Normals are addressed by
// (path, step, player-coordinate block), so results do not depend on threads.
[[nodiscard]] TrajectoryBatch simulate(const GameSpec& game, const FeedbackControl& control,
                                       const Matrix& x0, double dt, int n_paths, std::uint64_t seed,
                                       const SimulationOptions& options = {});

// I.i.d. uniform entries in [-1, 1], determined by the seed.
[[nodiscard]] Matrix default_initial_state(int N, int d, std::uint64_t seed);

struct McParams {
  double T = 1.0;
  int d = 1;
  double rho = 1.4;         // gathering radius to certify
  int truncation = 32;      // H of the infinite-game flow
  int flow_steps = 1024;
  double dt = 1e-3;
  int n_paths = 10000;
  std::uint64_t seed = 1;
  std::optional<Matrix> x0; // N x d; default_initial_state otherwise
  int threads = 0;
};

struct NashGainRow {
  int N = 0;
  double mean = 0.0;       // J^0(alpha*) - J^0(alpha*,-0, psi)
  double std_error = 0.0;
  double upper_bound = 0.0; // max(0, mean + 1.96 se)
  double envelope = 0.0;    // delta^M + (delta^-M + N) delta^N
  double j_equilibrium = 0.0;
  double j_deviation = 0.0;
  double max_abs_paired = 0.0;  // max_p |gain_p|
  double threshold_L = 0.0;
};

struct NashExperiment {
  std::vector<NashGainRow> rows;
  double rho = 0.0;
  double delta = 0.0;  // (1 + 1/rho) / 2
  DecayCertificate certificate;
};

// Requires strong gathering at params.rho, compatibility on [0, T] and
// f, g positive semidefinite (eigenvalue floor -1e-12).
[[nodiscard]] NashExperiment epsilon_nash_experiment(const CostStencil& stencil,
                                                     const std::vector<int>& N_list,
                                                     const DeviationSpec& deviation,
                                                     const McParams& params);

}  // namespace rnash
