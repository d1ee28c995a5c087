#include "rnash/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rnash/error.hpp"

namespace rnash {
namespace {

constexpr double kSymmetryTolerance = 1e-12;

void symmetrize_checked(Matrix& a, const std::string& what) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, what + " is not square");
  }
  double asym = 0.0;
  for (Eigen::Index h = 0; h < a.rows(); ++h) {
    for (Eigen::Index k = h + 1; k < a.cols(); ++k) {
      asym = std::max(asym, std::abs(a(h, k) - a(k, h)));
    }
  }
  if (asym > kSymmetryTolerance) {
    std::ostringstream msg;
    msg << what << " has asymmetry " << asym;
    throw Error(ErrorCode::NonSymmetricCost, msg.str());
  }
  if (asym > 0.0) {
    Matrix s = 0.5 * (a + a.transpose());
    a = s;
  }
}

}  // namespace

CostStencil make_stencil(Matrix f, Matrix g) {
  if (f.size() == 0) throw Error(ErrorCode::EmptyStencil, "stencil f is empty");
  if (g.size() == 0) g = Matrix::Zero(f.rows(), f.cols());
  if (f.rows() != g.rows() || f.cols() != g.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "stencil f and g differ in shape");
  }
  symmetrize_checked(f, "stencil f");
  symmetrize_checked(g, "stencil g");
  return CostStencil{std::move(f), std::move(g)};
}

const GeneralMode& GameSpec::general() const {
  if (const auto* m = std::get_if<GeneralMode>(&mode)) return *m;
  if (const auto* m = std::get_if<MeanFieldLikeMode>(&mode)) return m->costs;
  throw Error(ErrorCode::DimensionMismatch, "game is shift-invariant, not general");
}

GameSpec shift_invariant_game(const CostStencil& stencil, std::optional<int> n_players, int d,
                              double T) {
  CostStencil s = make_stencil(stencil.f, stencil.g);
  if (d < 1) throw Error(ErrorCode::DimensionMismatch, "state dimension d must be >= 1");
  if (!(T >= 0.0)) throw Error(ErrorCode::DimensionMismatch, "horizon T must be >= 0");
  if (n_players && *n_players < s.ell()) {
    throw Error(ErrorCode::DimensionMismatch, "finite shift-invariant game needs N >= ell");
  }
  return GameSpec{ShiftInvariantMode{std::move(s), n_players}, d, T};
}

GameSpec general_game(std::vector<Matrix> f, std::vector<Matrix> g, int d, double T) {
  if (f.empty()) throw Error(ErrorCode::EmptyStencil, "general game has no players");
  if (g.empty()) g.assign(f.size(), Matrix::Zero(f[0].rows(), f[0].cols()));
  if (f.size() != g.size()) throw Error(ErrorCode::DimensionMismatch, "f and g player counts differ");
  const Eigen::Index N = static_cast<Eigen::Index>(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i].rows() != N || f[i].cols() != N || g[i].rows() != N || g[i].cols() != N) {
      throw Error(ErrorCode::DimensionMismatch, "player costs must be N x N with N players");
    }
    symmetrize_checked(f[i], "f^" + std::to_string(i));
    symmetrize_checked(g[i], "g^" + std::to_string(i));
  }
  if (d < 1) throw Error(ErrorCode::DimensionMismatch, "state dimension d must be >= 1");
  if (!(T >= 0.0)) throw Error(ErrorCode::DimensionMismatch, "horizon T must be >= 0");
  return GameSpec{GeneralMode{std::move(f), std::move(g)}, d, T};
}

GameSpec build_game(const GameDescription& config) {
  if (config.mode == "shift_invariant") {
    return shift_invariant_game(make_stencil(config.stencil_f, config.stencil_g), config.n_players,
                                config.d, config.T);
  }
  if (config.mode == "general" || config.mode == "mean_field_like") {
    GameSpec spec = general_game(config.f, config.g, config.d, config.T);
    if (config.mode == "general") return spec;
    if (config.kappa_f < 0.0 || config.kappa_g < 0.0) {
      throw Error(ErrorCode::ConfigError, "scaling budgets must be nonnegative");
    }
    GeneralMode costs = std::get<GeneralMode>(spec.mode);
    spec.mode = MeanFieldLikeMode{std::move(costs), config.kappa_f, config.kappa_g};
    return spec;
  }
  throw Error(ErrorCode::ConfigError, "unknown game mode '" + config.mode + "'");
}

GeneralMode expand_costs(const CostStencil& stencil, int N) {
  if (N < stencil.ell()) throw Error(ErrorCode::DimensionMismatch, "N must be >= ell");
  Matrix f = Matrix::Zero(N, N);
  Matrix g = Matrix::Zero(N, N);
  f.topLeftCorner(stencil.ell(), stencil.ell()) = stencil.f;
  g.topLeftCorner(stencil.ell(), stencil.ell()) = stencil.g;
  GeneralMode out;
  for (int i = 0; i < N; ++i) {
    out.f.push_back(shift_matrix(f, i, N));
    out.g.push_back(shift_matrix(g, i, N));
  }
  return out;
}

Matrix CoefficientFlow::at(double t, int p) const {
  if (grid.empty()) throw Error(ErrorCode::IndexOutOfRange, "empty flow");
  if (t <= grid.front()) return values.front()[p];
  if (t >= grid.back()) return values.back()[p];
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  std::size_t m = static_cast<std::size_t>(it - grid.begin());
  double t0 = grid[m - 1];
  double t1 = grid[m];
  double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * values[m - 1][p] + w * values[m][p];
}

Matrix shift_matrix(const Matrix& c, int i, int N) {
  if (i < 0 || i >= N) throw Error(ErrorCode::IndexOutOfRange, "player index out of range");
  if (c.rows() > N || c.cols() > N) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient matrix larger than N");
  }
  Matrix out = Matrix::Zero(N, N);
  const int H = static_cast<int>(c.rows());
  for (int hs = 0; hs < H; ++hs) {
    for (int ks = 0; ks < H; ++ks) {
      out(mod(hs + i, N), mod(ks + i, N)) = c(hs, ks);
    }
  }
  return out;
}

std::vector<Matrix> expand_shift_invariant(const CoefficientFlow& flow, int i, int N) {
  if (flow.layout != Layout::Reduced) {
    throw Error(ErrorCode::DimensionMismatch, "expand_shift_invariant needs a reduced flow");
  }
  std::vector<Matrix> out;
  out.reserve(flow.samples());
  for (std::size_t m = 0; m < flow.samples(); ++m) out.push_back(shift_matrix(flow.reduced(m), i, N));
  return out;
}

ShiftInvariantExpansion::ShiftInvariantExpansion(CoefficientFlow source, int N)
    : source_(std::move(source)), n_(N) {
  if (source_.layout != Layout::Reduced) {
    throw Error(ErrorCode::DimensionMismatch, "expansion source must be reduced");
  }
  if (source_.truncation > N) {
    throw Error(ErrorCode::DimensionMismatch, "truncation exceeds N");
  }
}

Matrix ShiftInvariantExpansion::materialize(std::size_t sample, int i) const {
  if (sample >= source_.samples()) throw Error(ErrorCode::IndexOutOfRange, "sample out of range");
  return shift_matrix(source_.reduced(sample), i, n_);
}

std::vector<double> eta(const CoefficientFlow& flow, int d, int p) {
  const std::size_t M = flow.samples();
  std::vector<double> out(M, 0.0);
  for (std::size_t m = M - 1; m-- > 0;) {
    double dt = flow.grid[m + 1] - flow.grid[m];
    double tr0 = flow.values[m][p].trace();
    double tr1 = flow.values[m + 1][p].trace();
    out[m] = out[m + 1] + 0.5 * dt * d * (tr0 + tr1);
  }
  return out;
}

}  // namespace rnash
