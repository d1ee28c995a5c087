#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace rnash {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// [a]_b: representative of a modulo b in [0, b).
[[nodiscard]] inline int mod(long a, long b) {
  long r = a % b;
  return static_cast<int>(r < 0 ? r + b : r);
}

// Signed cyclic representative of a modulo n in (-n/2, n/2].
[[nodiscard]] inline int centered(long a, long n) {
  int r = mod(a, n);
  return 2 * r > n ? r - static_cast<int>(n) : r;
}

// Width-ell stencil of a shift-invariant game: player i's cost couples
// coordinates i, ..., i + ell - 1.
struct CostStencil {
  Matrix f;
  Matrix g;

  [[nodiscard]] int ell() const { return static_cast<int>(f.rows()); }
};

// Validates shape and symmetry. Asymmetry up to 1e-12 is symmetrized away.
[[nodiscard]] CostStencil make_stencil(Matrix f, Matrix g);

struct ShiftInvariantMode {
  CostStencil stencil;
  std::optional<int> n_players;  // nullopt: infinitely many players

  [[nodiscard]] bool infinite() const { return !n_players.has_value(); }
};

struct GeneralMode {
  std::vector<Matrix> f;
  std::vector<Matrix> g;

  [[nodiscard]] int n_players() const { return static_cast<int>(f.size()); }
};

struct MeanFieldLikeMode {
  GeneralMode costs;
  double kappa_f = 0.0;
  double kappa_g = 0.0;
};

struct GameSpec {
  std::variant<ShiftInvariantMode, GeneralMode, MeanFieldLikeMode> mode;
  int d = 1;
  double T = 1.0;

  [[nodiscard]] bool shift_invariant() const {
    return std::holds_alternative<ShiftInvariantMode>(mode);
  }
  [[nodiscard]] const ShiftInvariantMode& si() const { return std::get<ShiftInvariantMode>(mode); }
  // Costs of General and MeanFieldLike games.
  [[nodiscard]] const GeneralMode& general() const;
};

// Unvalidated game description as read from a config file.
struct GameDescription {
  std::string mode;  // "shift_invariant" | "general" | "mean_field_like"
  std::optional<int> n_players;
  int d = 1;
  double T = 1.0;
  Matrix stencil_f;
  Matrix stencil_g;
  std::vector<Matrix> f;
  std::vector<Matrix> g;
  double kappa_f = 0.0;
  double kappa_g = 0.0;
};

[[nodiscard]] GameSpec build_game(const GameDescription& config);

[[nodiscard]] GameSpec shift_invariant_game(const CostStencil& stencil, std::optional<int> n_players,
                                            int d, double T);
[[nodiscard]] GameSpec general_game(std::vector<Matrix> f, std::vector<Matrix> g, int d, double T);

// Player costs f^i, g^i of a finite cyclic shift-invariant game.
[[nodiscard]] GeneralMode expand_costs(const CostStencil& stencil, int N);

enum class Layout { Reduced, Full };

// Reduced flows of infinite games use directed N-indexing (entries with a
// negative relative index are absent); finite games use cyclic indices mod N.
enum class Indexing { Directed, Cyclic };

struct CoefficientFlow {
  std::vector<double> grid;                 // t_0 = 0 < ... < t_M = T
  Layout layout = Layout::Reduced;
  Indexing indexing = Indexing::Directed;
  int truncation = 0;                       // H (reduced) or N (full)
  std::vector<std::vector<Matrix>> values;  // values[m][p]; p = 0 when reduced

  [[nodiscard]] std::size_t samples() const { return grid.size(); }
  [[nodiscard]] const Matrix& reduced(std::size_t m) const { return values[m][0]; }
  [[nodiscard]] const Matrix& player(std::size_t m, int i) const { return values[m][i]; }
  [[nodiscard]] double T() const { return grid.back(); }
  // Piecewise-linear interpolation of a reduced flow (or of player p).
  [[nodiscard]] Matrix at(double t, int p = 0) const;
};

// (c^i)_{hk} = c_{[h-i]_N, [k-i]_N}. c must be N x N, or smaller and
// zero-padded.
[[nodiscard]] Matrix shift_matrix(const Matrix& c, int i, int N);

// c^i at every sample of a reduced flow.
[[nodiscard]] std::vector<Matrix> expand_shift_invariant(const CoefficientFlow& flow, int i, int N);

class ShiftInvariantExpansion {
 public:
  ShiftInvariantExpansion(CoefficientFlow source, int N);
  [[nodiscard]] Matrix materialize(std::size_t sample, int i) const;
  [[nodiscard]] const CoefficientFlow& source() const { return source_; }
  [[nodiscard]] int players() const { return n_; }

 private:
  CoefficientFlow source_;
  int n_;
};

// eta(t_m) = int_{t_m}^T d tr c^p(s) ds by trapezoid on the flow grid.
[[nodiscard]] std::vector<double> eta(const CoefficientFlow& flow, int d, int p = 0);

}  // namespace rnash
